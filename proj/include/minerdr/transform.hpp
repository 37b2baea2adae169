#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "minerdr/calendar.hpp"
#include "minerdr/panel.hpp"

namespace minerdr::transform {

/// Rolling maximum of daily peaks over a trailing window of days.
struct TrendCurve {
    Day first_day;
    std::vector<double> values;  // one per day starting at first_day
    int window_days = 7;

    /// Trend at `d`; days outside the fitted range take the nearest end value.
    [[nodiscard]] double at(Day d) const;
};

struct TrendResult {
    TrendCurve trend;
    std::vector<double> detrended;
};

/// Divides each hour by the trailing `window_days` maximum of daily peaks.
/// Missing hours (NaN) stay missing; days without data inherit the previous
/// day's trend.
[[nodiscard]] TrendResult extract_trend(Hour start, std::span<const double> series, int window_days = 7);

/// Empirical quantile map: sorted sample values paired with Hazen normal
/// scores Phi^-1((k - 0.5)/n).
struct QuantileMap {
    std::vector<double> values;  // nondecreasing
    std::vector<double> z;       // strictly increasing

    [[nodiscard]] bool empty() const { return values.empty(); }
    /// Normal score of `x`. Sample values map to their own score (tied values
    /// to the midpoint of their block); other values interpolate linearly and
    /// clamp at the ends.
    [[nodiscard]] double forward(double x) const;
    /// Piecewise-linear inverse, clamped to [min, max] of the sample.
    [[nodiscard]] double inverse(double z) const;
};

struct GaussianizeResult {
    std::vector<double> z;
    QuantileMap map;
};

/// Rank-based normal scores; ties broken by input order. NaN entries are
/// skipped and stay NaN. Requires >= 30 finite values that are not all equal.
[[nodiscard]] GaussianizeResult gaussianize(std::span<const double> series);

inline constexpr std::size_t kBinCount = 48;

/// Bin index = season * 24 + hour of day (summer first).
[[nodiscard]] std::size_t bin_of(Hour h);
[[nodiscard]] std::string bin_label(std::size_t bin);

struct BinStat {
    double mean = 0.0;
    double std = 1.0;  // sample standard deviation (n - 1)
    std::size_t count = 0;
};

using BinStats = std::array<std::optional<BinStat>, kBinCount>;

struct StandardizeResult {
    std::vector<double> tilde;
    BinStats stats;
};

/// Per-bin (x - mean) / std. `bins[i]` in [0, kBinCount). NaN entries are
/// skipped. Every populated bin needs >= 2 values and positive variance.
[[nodiscard]] StandardizeResult standardize(std::span<const double> z, std::span<const std::size_t> bins);

enum class Step { trend, gaussianize, standardize };

[[nodiscard]] std::string_view step_name(Step s);

struct FitOptions {
    bool detrend = false;
    int trend_window_days = 7;
};

/// Fitted N(.) for one series: optional trend division, Gaussianization and
/// hour-of-day x season standardization, applied in that order.
struct FittedTransform {
    std::vector<Step> steps;
    std::optional<TrendCurve> trend;
    QuantileMap quantiles;
    BinStats bins;

    [[nodiscard]] bool fitted() const { return !quantiles.empty(); }
    [[nodiscard]] std::vector<double> apply(Hour start, std::span<const double> x) const;
    [[nodiscard]] std::vector<double> invert(Hour start, std::span<const double> z) const;
    [[nodiscard]] double apply_one(Hour h, double x) const;
    [[nodiscard]] double invert_one(Hour h, double z) const;
};

/// Fits N(.) on the finite entries of `series`.
[[nodiscard]] FittedTransform fit(Hour start, std::span<const double> series, const FitOptions& options = {});

/// One fitted transform per panel series. Miner demand is detrended; the
/// exogenous series are only Gaussianized and standardized.
struct TransformSet {
    std::map<Series, FittedTransform> series;

    [[nodiscard]] const FittedTransform& at(Series s) const;
    /// Transformed copy of `panel`; series without a transform are copied as-is.
    [[nodiscard]] HourlyPanel apply(const HourlyPanel& panel) const;
};

[[nodiscard]] TransformSet fit_panel(const HourlyPanel& panel, int trend_window_days = 7);

struct OutlierResult {
    HourlyPanel panel;
    std::vector<Day> removed;
};

/// Drops days whose daily mean real-time price has |z| > threshold across
/// the days present in the panel (sample standard deviation).
[[nodiscard]] OutlierResult remove_outlier_days(const HourlyPanel& panel, double z_threshold = 3.0);

}  // namespace minerdr::transform
