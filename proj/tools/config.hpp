#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "minerdr/drmodel.hpp"
#include "minerdr/panel.hpp"

namespace minerdr::cli {

enum class FourcpSource { system_load, own_load };

struct RunConfig {
    std::vector<std::filesystem::path> inputs;
    std::optional<std::filesystem::path> schema;
    std::optional<std::filesystem::path> panel;
    std::optional<std::filesystem::path> transform;
    std::optional<std::filesystem::path> model;
    std::filesystem::path out = ".";

    Season season = Season::non_summer;
    SeasonMask mask;

    int trend_window_days = 7;
    double outlier_z = 3.0;
    double train_fraction = 0.5;
    std::optional<std::uint64_t> split_seed;
    double alpha = 0.05;
    std::size_t min_days = 60;
    std::size_t ljung_box_lags = 48;
    std::vector<regress::Stage> stages;  // empty: season defaults
    FourcpSource fourcp_source = FourcpSource::system_load;
    std::vector<sarima::SarimaOrder> sarima_grid;

    std::optional<std::uint64_t> seed;
    std::size_t days = 120;
    std::optional<Day> start;
    drmodel::ScenarioOptions scenario;
    drmodel::SyntheticOptions synthetic;

    std::vector<std::size_t> rsi_windows{7, 14, 21};
    std::vector<long> correlation_lags{0, 1, 24};

    /// Fit settings for the configured season.
    [[nodiscard]] drmodel::FitConfig fit_config() const;
};

/// Applies `key = value` settings in order. Unknown keys and malformed
/// values raise PreconditionError naming the key.
void apply_settings(RunConfig& config, const std::vector<std::pair<std::string, std::string>>& settings);

/// Reads `key = value` lines; `#` starts a comment.
[[nodiscard]] std::vector<std::pair<std::string, std::string>> read_settings(const std::filesystem::path& path);

/// Splits `key=value`.
[[nodiscard]] std::pair<std::string, std::string> parse_assignment(const std::string& text);

/// Keys accepted by apply_settings(), with a short description each.
[[nodiscard]] const std::vector<std::pair<std::string, std::string>>& known_keys();

}  // namespace minerdr::cli
