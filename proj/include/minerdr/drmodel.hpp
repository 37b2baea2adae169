#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "minerdr/panel.hpp"
#include "minerdr/regress.hpp"
#include "minerdr/sarima.hpp"
#include "minerdr/stats.hpp"
#include "minerdr/transform.hpp"

namespace minerdr::drmodel {

/// One deterministic regressor of the demand model, in transformed units.
struct Term {
    regress::Column column;
    double coef = 0.0;
    double se = 0.0;
    double p_value = 0.0;
    std::string stage;
};

/// One season's demand-response model:
///   z_t = sum_k coef_k x_k(t) + u_t,   u ~ SARIMA,   miner_mw = N^-1(z_t)
/// with x_k the gated, lagged, transformed exogenous series.
struct DemandModel {
    Season season = Season::non_summer;
    SeasonMask mask;
    std::vector<Term> terms;
    sarima::SarimaFit sarima;
    transform::TransformSet transforms;

    [[nodiscard]] std::optional<Term> temperature_term() const;
    [[nodiscard]] std::vector<Term> price_terms() const;
    [[nodiscard]] std::vector<Term> load_terms() const;
    /// Largest lag (hours) over all terms.
    [[nodiscard]] int max_lag() const;
    /// Invariants: no load terms outside summer, finite se, S = 24.
    void validate() const;
};

/// Published-coefficient preset for `season`, paired with the reference
/// transforms.
[[nodiscard]] DemandModel reference_model(Season season);

/// Analytic transforms of a stylized market: a left-skewed miner load below
/// 490 MW, log-normal-like prices with spikes, a Gaussian temperature field
/// and system demand around 45 GW, each with diurnal and seasonal bin means.
[[nodiscard]] transform::TransformSet reference_transforms();

struct ScenarioOptions {
    double temp_ar = 0.8;  // hourly persistence of the temperature anomaly
    double load_ar = 0.9;  // hourly persistence of the system-load anomaly
    bool with_btc = false;
};

/// Exogenous scenario of `n_hours` from `start`: independent standard-normal
/// processes per series (AR(1) for temperature and load, i.i.d. prices)
/// mapped to raw units through `transforms`. Miner demand is left missing.
[[nodiscard]] HourlyPanel make_scenario(Hour start, std::size_t n_hours, std::uint64_t seed,
                                        const transform::TransformSet& transforms, const ScenarioOptions& options = {});

struct FitConfig {
    double train_fraction = 0.5;
    std::optional<std::uint64_t> split_seed;
    double outlier_z = 3.0;
    double alpha = 0.05;
    std::vector<regress::Stage> stages;              // empty: default_stages(season)
    std::vector<sarima::SarimaOrder> sarima_grid;    // empty: default_sarima_grid()
    std::size_t min_days = 60;
    std::size_t ljung_box_lags = 48;
    SeasonMask mask;                                 // season field is overwritten
};

[[nodiscard]] std::vector<regress::Stage> default_stages(Season season);
[[nodiscard]] std::vector<sarima::SarimaOrder> default_sarima_grid();

struct FitReport {
    DemandModel model;
    regress::StagedResult staged;
    sarima::Selection selection;
    std::vector<Day> removed_days;
    std::size_t days = 0;
    std::size_t train_days = 0;
    std::size_t test_days = 0;
    regress::FitMetrics deterministic_metrics;  // test rows, MW
    regress::FitMetrics combined_metrics;       // test rows, MW, with one-step SARIMA
    double sarima_test_mse = 0.0;               // transformed residual space
    stats::TestReport ljung_box;
    stats::TestReport adf;
    stats::TestReport breusch_pagan;
    stats::TestReport durbin_watson;

    /// Hourly series over the fitted season panel (after outlier removal),
    /// starting at `start`; NaN where unavailable.
    Hour start;
    std::vector<double> observed;       // MW
    std::vector<double> deterministic;  // MW
    std::vector<double> combined;       // MW, one-step SARIMA prediction added
    std::vector<double> innovations;    // SARIMA residuals, transformed units
    std::vector<std::uint8_t> test_rows;
};

/// Season restriction, outlier-day removal, transformation, staged regression
/// and SARIMA selection on the final residuals.
[[nodiscard]] FitReport fit_demand_model(const HourlyPanel& panel, Season season,
                                         const transform::TransformSet& transforms, const FitConfig& config = {});

/// Deterministic part sum_k coef_k x_k(t) on an already transformed panel;
/// NaN where a needed value is missing.
[[nodiscard]] std::vector<double> deterministic_part(const DemandModel& model, const HourlyPanel& transformed);

enum class PredictMode { deterministic, one_step };

/// Miner demand in MW. Rows before `model.max_lag()` are NaN; a missing
/// exogenous value afterwards is an error. `one_step` adds the SARIMA
/// one-step prediction of the residual from observed miner demand.
[[nodiscard]] std::vector<double> predict(const DemandModel& model, const HourlyPanel& panel,
                                          PredictMode mode = PredictMode::deterministic);

enum class ResidualDynamics {
    stationary_core,  // the ARMA part only (differencing orders set to 0)
    integrated,       // the full order, differencing included
};

enum class ResidualScale {
    unit_variance,  // innovation sigma set so the transformed load has unit variance
    model_sigma,    // the model's sigma as stored
};

struct SyntheticOptions {
    ResidualDynamics dynamics = ResidualDynamics::stationary_core;
    ResidualScale scale = ResidualScale::unit_variance;
    unsigned threads = 1;
};

/// Synthetic miner demand for `n_days` after a warm-up of whole days covering
/// the model's longest lag. `scenario` must span warm-up plus `n_days`.
[[nodiscard]] HourlyPanel generate_synthetic(const DemandModel& model, const HourlyPanel& scenario, std::size_t n_days,
                                             std::uint64_t seed, const SyntheticOptions& options = {});

/// Warm-up days needed before the first generated day.
[[nodiscard]] std::size_t warmup_days(const DemandModel& model);

/// Stationary variance of the ARMA core per unit innovation variance.
[[nodiscard]] double core_variance(const sarima::SarimaOrder& order, const sarima::SarimaParams& params);

/// avg_4cp_mw * 1000 * rate * months ($; rate in $/kW-month).
[[nodiscard]] double fourcp_charge(double avg_4cp_mw, double rate, double months);

struct ProfitInterval {
    double pi_btc = 0.0;  // $/BTC
    double k_b = 0.0;     // BTC per MWh of hashing energy
    double e_hash = 0.0;  // MWh
    double pi_da = 0.0;   // $/MWh
    double pi_rt = 0.0;   // $/MWh
    double e_da = 0.0;    // MWh
    double e_rt = 0.0;    // MWh
    double e_ppa = 0.0;   // MWh
    double temp = 0.0;    // deg F

    [[nodiscard]] double e_total() const { return e_ppa + e_da + e_rt; }
};

/// Cooling energy psi(E^H, T).
using CoolingFn = std::function<double(double e_hash, double temp)>;
/// Avoided 4CP cost gamma(E^M_t) for interval index t.
using AvoidedCostFn = std::function<double(double e_total, std::size_t t)>;

/// psi = c0 * E^H * max(0, T - T0) / dT_ref.
[[nodiscard]] CoolingFn linear_cooling(double c0 = 0.15, double t0 = 65.0, double dt_ref = 30.0);

/// (baseline - E^M_t) * 1000 * rate * months / |intervals| during the listed
/// intervals, zero elsewhere.
[[nodiscard]] AvoidedCostFn fourcp_avoided_cost(std::vector<std::size_t> intervals, double baseline_mw, double rate,
                                                double months = 12.0);

struct ProfitInputs {
    std::vector<ProfitInterval> intervals;
    CoolingFn psi = linear_cooling();
    AvoidedCostFn gamma = [](double, std::size_t) { return 0.0; };
};

struct ProfitResult {
    double total = 0.0;
    std::vector<double> per_interval;
};

/// sum_t pi^B k^B E^H - pi^R E^R - pi^D E^D + gamma(E^M). Each interval must
/// satisfy E^P + E^D + E^R = E^H + psi(E^H, T) within 1e-9.
[[nodiscard]] ProfitResult profit(const ProfitInputs& inputs);

}  // namespace minerdr::drmodel
