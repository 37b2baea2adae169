#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace minerdr {

/// A calendar day, counted from 1970-01-01 (naive local grid time).
struct Day {
    std::int64_t value = 0;
    auto operator<=>(const Day&) const = default;
};

/// An hour-long interval start, counted in hours from 1970-01-01T00:00
/// (naive local grid time, no timezone).
struct Hour {
    std::int64_t value = 0;
    auto operator<=>(const Hour&) const = default;

    [[nodiscard]] Hour operator+(std::int64_t hours) const { return Hour{value + hours}; }
    [[nodiscard]] Hour operator-(std::int64_t hours) const { return Hour{value - hours}; }
    [[nodiscard]] std::int64_t operator-(Hour other) const { return value - other.value; }
};

/// A minute-resolution instant, used for the 15-minute 4CP variant.
struct Minute {
    std::int64_t value = 0;
    auto operator<=>(const Minute&) const = default;
};

struct CivilDate {
    int year = 1970;
    unsigned month = 1;  // 1..12
    unsigned day = 1;    // 1..31
};

[[nodiscard]] Day make_day(int year, unsigned month, unsigned day);
[[nodiscard]] CivilDate civil(Day day);
[[nodiscard]] Hour make_hour(int year, unsigned month, unsigned day, unsigned hour);
[[nodiscard]] Minute make_minute(int year, unsigned month, unsigned day, unsigned hour,
                                 unsigned minute);

[[nodiscard]] inline Day day_of(Hour h) {
    return Day{h.value >= 0 ? h.value / 24 : (h.value - 23) / 24};
}
[[nodiscard]] inline Day day_of(Minute m) {
    return Day{m.value >= 0 ? m.value / 1440 : (m.value - 1439) / 1440};
}
[[nodiscard]] inline unsigned hour_of_day(Hour h) {
    return static_cast<unsigned>(h.value - day_of(h).value * 24);
}
[[nodiscard]] inline unsigned hour_of_day(Minute m) {
    return static_cast<unsigned>((m.value - day_of(m).value * 1440) / 60);
}
[[nodiscard]] inline Hour first_hour(Day d) { return Hour{d.value * 24}; }
[[nodiscard]] inline Minute to_minute(Hour h) { return Minute{h.value * 60}; }

[[nodiscard]] unsigned month_of(Day d);
[[nodiscard]] inline unsigned month_of(Hour h) { return month_of(day_of(h)); }
[[nodiscard]] inline unsigned month_of(Minute m) { return month_of(day_of(m)); }
[[nodiscard]] int year_of(Day d);

/// `YYYY-MM-DDTHH:00`.
[[nodiscard]] std::string format_hour(Hour h);
/// `YYYY-MM-DDTHH:MM`.
[[nodiscard]] std::string format_minute(Minute m);
/// `YYYY-MM-DD`.
[[nodiscard]] std::string format_day(Day d);

/// Accepts `YYYY-MM-DDTHH:MM` (also with a space separator and optional
/// `:SS`). Minutes and seconds must be zero for an hourly stamp.
[[nodiscard]] std::optional<Hour> parse_hour(std::string_view text);
[[nodiscard]] std::optional<Minute> parse_minute(std::string_view text);
[[nodiscard]] std::optional<Day> parse_day(std::string_view text);

/// US daylight-saving rule (since 2007): the repeated 01:00 hour on the
/// first Sunday of November.
[[nodiscard]] bool is_dst_fallback_hour(Hour h);
/// The skipped 02:00 hour on the second Sunday of March.
[[nodiscard]] bool is_dst_springforward_hour(Hour h);

}  // namespace minerdr
