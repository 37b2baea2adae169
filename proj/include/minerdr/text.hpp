#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace minerdr::text {

[[nodiscard]] std::string_view trim(std::string_view s);

/// Splits one CSV record on commas; double-quoted fields may contain commas
/// and `""` escapes.
[[nodiscard]] std::vector<std::string> split_csv(std::string_view line);

/// Splits on `sep`, trimming each piece.
[[nodiscard]] std::vector<std::string> split(std::string_view s, char sep);

/// Shortest decimal form that parses back to the same double.
[[nodiscard]] std::string format_double(double value);

/// Strict parse of a whole token; nullopt on trailing garbage.
[[nodiscard]] std::optional<double> parse_double(std::string_view token);
[[nodiscard]] std::optional<long long> parse_int(std::string_view token);

}  // namespace minerdr::text
