#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "minerdr/drmodel.hpp"
#include "minerdr/indicators.hpp"
#include "minerdr/regress.hpp"
#include "minerdr/sarima.hpp"
#include "minerdr/stats.hpp"
#include "minerdr/transform.hpp"

namespace minerdr::serialize {

using Json = nlohmann::json;

inline constexpr std::string_view kTransformFormat = "minerdr.transform.v1";
inline constexpr std::string_view kModelFormat = "minerdr.model.v1";
inline constexpr std::string_view kReportFormat = "report.v1";

// Artifacts keep full double precision; NaN is written as null.
[[nodiscard]] Json to_json(const transform::FittedTransform& t);
[[nodiscard]] transform::FittedTransform fitted_transform_from_json(const Json& j);
[[nodiscard]] Json to_json(const transform::TransformSet& set);
[[nodiscard]] transform::TransformSet transform_set_from_json(const Json& j);

[[nodiscard]] Json to_json(const sarima::SarimaOrder& order);
[[nodiscard]] sarima::SarimaOrder sarima_order_from_json(const Json& j);
[[nodiscard]] Json to_json(const sarima::SarimaFit& fit);
[[nodiscard]] sarima::SarimaFit sarima_fit_from_json(const Json& j);

[[nodiscard]] Json to_json(const drmodel::DemandModel& model);
[[nodiscard]] drmodel::DemandModel model_from_json(const Json& j);

// Report fragments.
[[nodiscard]] Json to_json(const stats::TestReport& r);
[[nodiscard]] Json to_json(const stats::CorrelationResult& r);
[[nodiscard]] Json to_json(const regress::StepResult& r);
[[nodiscard]] Json to_json(const regress::FitMetrics& m);
[[nodiscard]] Json to_json(const indicators::CpInterval& c);
[[nodiscard]] Json to_json(const sarima::Selection& s);
[[nodiscard]] Json to_json(const drmodel::FitReport& r);

/// Copy with every number rounded to `digits` significant digits.
[[nodiscard]] Json rounded(const Json& j, int digits = 12);

/// Two-space indented text with a trailing newline.
[[nodiscard]] std::string dump(const Json& j);

/// Parses a JSON file; malformed input raises DataError.
[[nodiscard]] Json read_file(const std::filesystem::path& path);

/// Checks the `format` field; throws DataError naming the expected format.
void expect_format(const Json& j, std::string_view format);

}  // namespace minerdr::serialize
