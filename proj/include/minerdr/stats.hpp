#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "minerdr/calendar.hpp"
#include "minerdr/panel.hpp"

namespace minerdr::stats {

/// Uniform result of a hypothesis test or diagnostic statistic.
struct TestReport {
    std::string name;
    double statistic = 0.0;
    std::optional<double> p_value;  // empty for statistic-only diagnostics
    long df_or_lags = 0;
    std::string decision_note;
    std::map<std::string, double> extras;  // e.g. ADF critical values
};

struct CorrelationResult {
    double r = 0.0;
    double p_value = 1.0;
    std::size_t n = 0;
    std::string window_note;
};

struct Moments {
    double mean = 0.0;
    double std = 0.0;       // sample standard deviation (n - 1)
    double skewness = 0.0;  // adjusted Fisher-Pearson G1
};

/// Requires n >= 3 and positive variance.
[[nodiscard]] Moments moments(std::span<const double> x);

/// JB = n/6 (S^2 + K^2/4) with population skewness S and excess kurtosis K;
/// chi-square(2) upper tail. Requires n >= 30.
[[nodiscard]] TestReport jarque_bera(std::span<const double> x);

enum class AdfRegression { none, constant, constant_trend };

struct AdfOptions {
    AdfRegression regression = AdfRegression::constant;
    /// Upper bound for the lag search; default floor(12 (n/100)^(1/4)).
    std::optional<std::size_t> max_lag;
    /// Skip the AIC search and use exactly `max_lag` lags.
    bool fixed_lag = false;
};

/// Augmented Dickey-Fuller unit-root test. Lag order by AIC over a common
/// sample, final regression on the full sample for the chosen lag, p-value
/// from MacKinnon's (1994) response surface, critical values from his 2010
/// tables in `extras` (`cv_1pct`, `cv_5pct`, `cv_10pct`).
[[nodiscard]] TestReport adf_test(std::span<const double> x, const AdfOptions& options = {});

/// MacKinnon approximate p-value for a single-series tau statistic.
[[nodiscard]] double mackinnon_p(double tau, AdfRegression regression);
/// MacKinnon (2010) finite-sample critical value at level 0.01, 0.05 or 0.10.
[[nodiscard]] double mackinnon_crit(double level, AdfRegression regression, std::size_t nobs);

/// Studentized Breusch-Pagan: LM = n R^2 of e^2 on [1, regressors];
/// chi-square(k) with k regressor columns (no constant in `regressors`).
[[nodiscard]] TestReport breusch_pagan(std::span<const double> residuals, const Eigen::MatrixXd& regressors);

/// 23 hour-of-day dummy columns (hour 0 is the base level).
[[nodiscard]] Eigen::MatrixXd hour_of_day_dummies(Hour start, std::size_t n);

/// DW = sum (e_t - e_{t-1})^2 / sum e_t^2. No p-value.
[[nodiscard]] TestReport durbin_watson(std::span<const double> residuals);

/// Q = n(n+2) sum_{k<=h} r_k^2/(n-k); chi-square(h - fitted_params).
[[nodiscard]] TestReport ljung_box(std::span<const double> residuals, std::size_t h, std::size_t fitted_params = 0);

/// Sample autocorrelations r_0..r_max_lag. With `seasonal_period` > 0 the
/// series is first differenced at that lag.
[[nodiscard]] std::vector<double> acf(std::span<const double> x, std::size_t max_lag,
                                      std::size_t seasonal_period = 0);
/// Partial autocorrelations via Durbin-Levinson; entry 0 is 1.
[[nodiscard]] std::vector<double> pacf(std::span<const double> x, std::size_t max_lag,
                                       std::size_t seasonal_period = 0);

/// Pearson r with a t(n-2) two-sided p-value. Pairs with a non-finite side
/// are skipped. Requires n >= 3 usable pairs.
[[nodiscard]] CorrelationResult pearson(std::span<const double> x, std::span<const double> y);

struct CorrelationWindow {
    std::set<unsigned> hours;   // empty = all hours
    std::set<unsigned> months;  // empty = all months
    long lag = 0;               // y is taken at t - lag
};

/// Pearson correlation of panel series x_t against y_{t-lag}, restricted to
/// rows whose hour-of-day and month pass the filter. Requires n >= 30.
[[nodiscard]] CorrelationResult windowed_correlation(const HourlyPanel& panel, Series x, Series y,
                                                     const CorrelationWindow& window);

}  // namespace minerdr::stats
