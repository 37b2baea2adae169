#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "minerdr/panel.hpp"

namespace minerdr::regress {

/// Lagged copies of one panel series, optionally multiplied by a gate
/// indicator.
struct LagSpec {
    Series source = Series::temp_f;
    std::vector<int> lags{0};
    Gate gate = Gate::none;
};

/// Regressor identity: (series, gate, lag).
struct Column {
    Series source = Series::temp_f;
    Gate gate = Gate::none;
    int lag = 0;

    [[nodiscard]] std::string name() const;  // e.g. "rt_price@day[t-24]"
    bool operator==(const Column&) const = default;
};

struct Design {
    Eigen::MatrixXd X;
    std::vector<std::size_t> rows;          // panel row of each matrix row
    std::vector<Column> columns;
    std::vector<std::size_t> dropped_rows;  // requested rows lost to missing values
    std::vector<std::string> warnings;
};

/// Builds the lagged design on the rows where `mask` is nonzero. Gated-off
/// entries are 0 even when the lagged source is missing; rows with any other
/// missing value are dropped. All-zero columns are dropped with a warning.
/// Throws on an empty sample or condition number above 1e10.
[[nodiscard]] Design design_matrix(const HourlyPanel& panel, std::span<const LagSpec> specs,
                                   std::span<const std::uint8_t> mask, const SeasonMask& season);

struct StepResult {
    std::string stage;
    std::vector<Column> columns;
    std::vector<double> coefficients;
    std::vector<double> se;
    std::vector<double> t_values;
    std::vector<double> p_values;
    double sigma2 = 0.0;
    std::size_t n = 0;
    std::vector<double> residuals;  // on the design rows
    double train_mse = 0.0;
    double test_mse = 0.0;
    std::vector<Column> pruned;
    std::vector<std::string> warnings;
};

/// Least squares without intercept; se from sigma^2 (X'X)^-1 with n - k
/// degrees of freedom and two-sided t p-values. Needs rows >= columns + 10.
[[nodiscard]] StepResult ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

struct Stage {
    std::string name;
    std::vector<LagSpec> specs;
};

struct StagedOptions {
    double alpha = 0.05;
    SeasonMask season;
};

struct StagedResult {
    std::vector<StepResult> steps;
    /// Target minus every retained stage's fit, per panel row; NaN where the
    /// target or a retained regressor is unavailable.
    std::vector<double> residuals;
};

/// Sequential regressions of `target` residuals, stage by stage. Each stage
/// is fit on `train` rows with backward elimination until every p-value is
/// at most alpha; residuals are then updated on all rows.
[[nodiscard]] StagedResult staged_regression(const HourlyPanel& panel, Series target, std::span<const Stage> stages,
                                             std::span<const std::uint8_t> train, std::span<const std::uint8_t> test,
                                             const StagedOptions& options = {});

/// Contribution sum_k beta_k x_k(t) of fitted columns at panel row `row`;
/// NaN when a needed value is missing.
[[nodiscard]] double contribution(const HourlyPanel& panel, std::span<const Column> columns,
                                  std::span<const double> coefficients, std::size_t row, const SeasonMask& season);

struct FitMetrics {
    double mse = 0.0;
    double rmse = 0.0;
    double mape = 0.0;  // percent
    std::size_t mape_excluded = 0;
    double r_squared = 0.0;
    double r_squared_iqr75 = 0.0;
    std::size_t n = 0;
};

/// Pairs with a non-finite side are skipped. MAPE ignores |y| < 1e-9.
/// r_squared_iqr75 uses the observations whose error lies between the
/// 12.5% and 87.5% error quantiles.
[[nodiscard]] FitMetrics metrics(std::span<const double> truth, std::span<const double> predicted);

/// Linear-interpolation sample quantile (type 7).
[[nodiscard]] double quantile(std::vector<double> values, double q);

}  // namespace minerdr::regress
