#include "minerdr/drmodel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <set>
#include <thread>

#include "minerdr/distributions.hpp"
#include "minerdr/error.hpp"

namespace minerdr::drmodel {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

using regress::Column;

Term term(Series s, Gate g, int lag, double coef, double se, const char* stage) {
    return Term{Column{s, g, lag}, coef, se, 0.0, stage};
}

// Strictly increasing reference marginal evaluated on a Hazen grid.
transform::QuantileMap reference_map(double (*f)(double)) {
    constexpr std::size_t k = 4001;
    transform::QuantileMap m;
    m.values.reserve(k);
    m.z.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
        double z = dist::normal_quantile((static_cast<double>(i) + 0.5) / static_cast<double>(k));
        m.z.push_back(z);
        m.values.push_back(f(z));
    }
    return m;
}

// Bin means a_season + amp * sin(2 pi (h - 9) / 24); within-bin std keeps
// the pooled variance near one.
transform::BinStats reference_bins(double summer, double non_summer, double amp) {
    transform::BinStats b;
    for (std::size_t bin = 0; bin < transform::kBinCount; ++bin) {
        double a = bin < 24 ? summer : non_summer;
        double h = static_cast<double>(bin % 24);
        double mu = a + amp * std::sin(2.0 * std::numbers::pi * (h - 9.0) / 24.0);
        b[bin] = transform::BinStat{mu, std::sqrt(1.0 - mu * mu), 0};
    }
    return b;
}

transform::FittedTransform reference_transform(double (*f)(double), double summer, double non_summer, double amp) {
    transform::FittedTransform t;
    t.steps = {transform::Step::gaussianize, transform::Step::standardize};
    t.quantiles = reference_map(f);
    t.bins = reference_bins(summer, non_summer, amp);
    return t;
}

double spike(double z, double scale) { return z > 2.0 ? scale * (z - 2.0) * (z - 2.0) : 0.0; }

std::vector<std::uint8_t> day_rows(const HourlyPanel& panel, const std::vector<Day>& days) {
    std::set<Day> s(days.begin(), days.end());
    std::vector<std::uint8_t> rows(panel.size(), 0);
    for (std::size_t i = 0; i < panel.size(); ++i) rows[i] = s.count(day_of(panel.hour(i))) ? 1 : 0;
    return rows;
}

}  // namespace

std::optional<Term> DemandModel::temperature_term() const {
    for (const auto& t : terms) {
        if (t.column.source == Series::temp_f) return t;
    }
    return std::nullopt;
}

std::vector<Term> DemandModel::price_terms() const {
    std::vector<Term> out;
    for (const auto& t : terms) {
        if (t.column.source == Series::rt_price || t.column.source == Series::da_price) out.push_back(t);
    }
    return out;
}

std::vector<Term> DemandModel::load_terms() const {
    std::vector<Term> out;
    for (const auto& t : terms) {
        if (t.column.source == Series::system_mw) out.push_back(t);
    }
    return out;
}

int DemandModel::max_lag() const {
    int m = 0;
    for (const auto& t : terms) m = std::max(m, t.column.lag);
    return m;
}

void DemandModel::validate() const {
    mask.validate();
    if (mask.season != season) throw PreconditionError("demand model: mask season differs from model season");
    if (season != Season::summer && !load_terms().empty()) {
        throw PreconditionError("demand model: load terms are only allowed in the summer model");
    }
    for (const auto& t : terms) {
        if (!std::isfinite(t.coef) || !std::isfinite(t.se)) {
            throw PreconditionError("demand model: term " + t.column.name() + " has a non-finite value");
        }
    }
    if (sarima.order.S != 24) throw PreconditionError("demand model: SARIMA season length must be 24");
    sarima.order.validate();
}

transform::TransformSet reference_transforms() {
    transform::TransformSet set;
    set.series[Series::temp_f] = reference_transform([](double z) { return 70.0 + 15.0 * z; }, 0.6, -0.3, 0.3);
    set.series[Series::rt_price] = reference_transform(
        [](double z) { return 32.0 * std::exp(0.5 * z) - 6.0 + spike(z, 120.0); }, 0.2, -0.1, 0.3);
    set.series[Series::da_price] = reference_transform(
        [](double z) { return 35.0 * std::exp(0.4 * z) - 4.0 + spike(z, 60.0); }, 0.2, -0.1, 0.3);
    set.series[Series::system_mw] =
        reference_transform([](double z) { return 45000.0 * std::exp(0.17 * z); }, 0.5, -0.25, 0.35);
    set.series[Series::miner_mw] = reference_transform(
        [](double z) { return 490.0 / (1.0 + std::exp(-(0.9 * z + 1.6))); }, -0.1, 0.05, -0.1);
    return set;
}

DemandModel reference_model(Season season) {
    DemandModel m;
    m.season = season;
    m.mask.season = season;
    m.transforms = reference_transforms();
    sarima::SarimaFit& s = m.sarima;
    if (season == Season::non_summer) {
        m.terms = {
            term(Series::temp_f, Gate::none, 0, 0.14, 0.04, "temperature"),
            term(Series::da_price, Gate::day, 48, -0.08, 0.03, "day_prices"),
            term(Series::rt_price, Gate::day, 1, -0.19, 0.03, "day_prices"),
            term(Series::rt_price, Gate::day, 24, -0.11, 0.03, "day_prices"),
            term(Series::da_price, Gate::peak, 1, -0.16, 0.05, "peak_prices"),
            term(Series::rt_price, Gate::peak, 3, -0.29, 0.05, "peak_prices"),
        };
        s.order = sarima::SarimaOrder{1, 0, 0, 1, 1, 0, 24};
        s.params.phi = {0.83};
        s.params.Phi = {-0.43};
        s.params.sigma = 0.58;
        s.se = {0.02, 0.02, 0.02};
    } else {
        m.terms = {
            term(Series::temp_f, Gate::none, 0, 0.12, 0.04, "temperature"),
            term(Series::da_price, Gate::day, 0, -0.40, 0.04, "day_prices"),
            term(Series::rt_price, Gate::day, 72, 0.09, 0.04, "day_prices"),
            term(Series::rt_price, Gate::peak, 1, -0.13, 0.06, "peak_prices"),
            term(Series::system_mw, Gate::fourcp, 24, -0.89, 0.11, "fourcp_load"),
            term(Series::system_mw, Gate::fourcp, 48, 0.39, 0.114, "fourcp_load"),
        };
        s.order = sarima::SarimaOrder{1, 0, 0, 1, 1, 1, 24};
        s.params.phi = {0.84};
        s.params.Phi = {-0.09};
        s.params.Theta = {-0.93};
        s.params.sigma = 0.7;
        s.se = {0.01, 0.03, 0.02, 0.01};
    }
    s.converged = true;
    for (std::size_t i = 0; i < s.se.size(); ++i) {
        auto c = s.params.coefficients();
        double v = i < c.size() ? c[i] : s.params.sigma;
        s.p_values.push_back(2.0 * dist::normal_sf(std::abs(v / s.se[i])));
    }
    for (auto& t : m.terms) t.p_value = 2.0 * dist::normal_sf(std::abs(t.coef / t.se));
    return m;
}

HourlyPanel make_scenario(Hour start, std::size_t n_hours, std::uint64_t seed,
                          const transform::TransformSet& transforms, const ScenarioOptions& options) {
    if (n_hours == 0) throw PreconditionError("make_scenario: empty scenario");
    if (std::abs(options.temp_ar) >= 1.0 || std::abs(options.load_ar) >= 1.0) {
        throw PreconditionError("make_scenario: AR persistence must lie in (-1, 1)");
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    auto ar1 = [&](double a) {
        std::vector<double> x(n_hours);
        x[0] = normal(rng);
        double s = std::sqrt(1.0 - a * a);
        for (std::size_t t = 1; t < n_hours; ++t) x[t] = a * x[t - 1] + s * normal(rng);
        return x;
    };
    HourlyPanel p = HourlyPanel::missing_grid(start, n_hours, options.with_btc);
    p.temp_f = transforms.at(Series::temp_f).invert(start, ar1(options.temp_ar));
    p.rt_price = transforms.at(Series::rt_price).invert(start, ar1(0.0));
    p.da_price = transforms.at(Series::da_price).invert(start, ar1(0.0));
    p.system_mw = transforms.at(Series::system_mw).invert(start, ar1(options.load_ar));
    if (options.with_btc) {
        double price = 30000.0;
        Day current = day_of(start);
        for (std::size_t i = 0; i < n_hours; ++i) {
            Day d = day_of(p.hour(i));
            if (d != current) {
                price *= std::exp(0.03 * normal(rng));
                current = d;
            }
            p.btc_usd[i] = price;
        }
    }
    return p;
}

std::vector<regress::Stage> default_stages(Season season) {
    using regress::LagSpec;
    std::vector<regress::Stage> stages;
    stages.push_back({"temperature", {LagSpec{Series::temp_f, {0}, Gate::none}}});
    if (season == Season::non_summer) {
        stages.push_back({"day_prices",
                          {LagSpec{Series::da_price, {48}, Gate::day}, LagSpec{Series::rt_price, {1, 24}, Gate::day}}});
        stages.push_back({"peak_prices",
                          {LagSpec{Series::da_price, {1}, Gate::peak}, LagSpec{Series::rt_price, {3}, Gate::peak}}});
    } else {
        stages.push_back({"day_prices",
                          {LagSpec{Series::da_price, {0}, Gate::day}, LagSpec{Series::rt_price, {72}, Gate::day}}});
        stages.push_back({"peak_prices", {LagSpec{Series::rt_price, {1}, Gate::peak}}});
        stages.push_back({"fourcp_load", {LagSpec{Series::system_mw, {24, 48}, Gate::fourcp}}});
    }
    return stages;
}

std::vector<sarima::SarimaOrder> default_sarima_grid() {
    return {
        {1, 0, 0, 1, 1, 0, 24}, {1, 0, 0, 1, 1, 1, 24}, {0, 0, 1, 1, 1, 0, 24},
        {1, 0, 0, 1, 0, 0, 24}, {1, 0, 0, 1, 0, 1, 24},
    };
}

std::vector<double> deterministic_part(const DemandModel& model, const HourlyPanel& transformed) {
    std::vector<Column> cols;
    std::vector<double> coefs;
    for (const auto& t : model.terms) {
        cols.push_back(t.column);
        coefs.push_back(t.coef);
    }
    std::vector<double> out(transformed.size());
    for (std::size_t i = 0; i < transformed.size(); ++i) {
        out[i] = regress::contribution(transformed, cols, coefs, i, model.mask);
    }
    return out;
}

FitReport fit_demand_model(const HourlyPanel& panel, Season season, const transform::TransformSet& transforms,
                           const FitConfig& config) {
    FitReport rep;
    SeasonMask mask = config.mask;
    mask.season = season;
    mask.validate();

    std::set<Day> season_days;
    for (std::size_t i = 0; i < panel.size(); ++i) {
        Day d = day_of(panel.hour(i));
        if (in_season(season, month_of(d))) season_days.insert(d);
    }
    HourlyPanel work = keep_days(panel, season_days);
    auto days = complete_days(work);
    if (days.size() < config.min_days) {
        throw PreconditionError("fit_demand_model: panel covers " + std::to_string(days.size()) + " " +
                                std::string(season_name(season)) + " days, need at least " +
                                std::to_string(config.min_days));
    }

    auto outliers = transform::remove_outlier_days(work, config.outlier_z);
    rep.removed_days = outliers.removed;
    work = std::move(outliers.panel);
    rep.days = complete_days(work).size();

    HourlyPanel tp = transforms.apply(work);
    auto split = split_train_test(tp, config.train_fraction, config.split_seed);
    rep.train_days = split.train_days.size();
    rep.test_days = split.test_days.size();
    auto train = day_rows(tp, split.train_days);
    auto test = day_rows(tp, split.test_days);

    regress::StagedOptions sopt;
    sopt.alpha = config.alpha;
    sopt.season = mask;
    auto stages = config.stages.empty() ? default_stages(season) : config.stages;
    rep.staged = regress::staged_regression(tp, Series::miner_mw, stages, train, test, sopt);

    DemandModel& model = rep.model;
    model.season = season;
    model.mask = mask;
    model.transforms = transforms;
    for (const auto& step : rep.staged.steps) {
        for (std::size_t j = 0; j < step.columns.size(); ++j) {
            model.terms.push_back({step.columns[j], step.coefficients[j], step.se[j], step.p_values[j], step.stage});
        }
    }

    auto grid = config.sarima_grid.empty() ? default_sarima_grid() : config.sarima_grid;
    std::size_t start = 0;
    for (const auto& o : grid) start = std::max(start, o.condition_length());
    const auto& resid = rep.staged.residuals;
    auto segments = sarima::finite_segments(resid, start + 24);
    try {
        rep.selection = sarima::select_order(segments, grid);
    } catch (const Error& e) {
        throw Error(e.kind(), std::string("fit_demand_model: SARIMA stage: ") + e.what());
    }
    model.sarima = rep.selection.fit;

    // Residual rows, for diagnostics keyed by hour of day.
    std::vector<std::size_t> rows;
    for (auto seg : segments) {
        auto offset = static_cast<std::size_t>(seg.data() - resid.data());
        for (std::size_t j = model.sarima.condition_start; j < seg.size(); ++j) rows.push_back(offset + j);
    }
    const auto& e = model.sarima.residuals;
    rep.innovations.assign(tp.size(), kNaN);
    for (std::size_t i = 0; i < rows.size(); ++i) rep.innovations[rows[i]] = e[i];
    const auto k = static_cast<std::size_t>(model.sarima.order.num_coefficients());
    rep.ljung_box = stats::ljung_box(e, config.ljung_box_lags, k);
    rep.adf = stats::adf_test(e);
    rep.durbin_watson = stats::durbin_watson(e);
    Eigen::MatrixXd hod = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows.size()), 23);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        unsigned h = hour_of_day(tp.hour(rows[i]));
        if (h > 0) hod(static_cast<Eigen::Index>(i), h - 1) = 1.0;
    }
    rep.breusch_pagan = stats::breusch_pagan(e, hod);

    // Test-day accuracy in MW, with and without the residual model.
    auto det = deterministic_part(model, tp);
    std::vector<double> onestep(tp.size(), kNaN);
    for (auto seg : segments) {
        auto offset = static_cast<std::size_t>(seg.data() - resid.data());
        auto pred = sarima::one_step_predictions(model.sarima.order, model.sarima.params, seg);
        for (std::size_t j = 0; j < seg.size(); ++j) onestep[offset + j] = pred[j];
    }
    const auto& mt = transforms.at(Series::miner_mw);
    rep.start = tp.start;
    rep.observed = work.miner_mw;
    rep.deterministic.assign(tp.size(), kNaN);
    rep.combined.assign(tp.size(), kNaN);
    rep.test_rows = test;
    for (std::size_t i = 0; i < tp.size(); ++i) {
        if (std::isfinite(det[i])) rep.deterministic[i] = mt.invert_one(tp.hour(i), det[i]);
        if (std::isfinite(det[i]) && std::isfinite(onestep[i])) {
            rep.combined[i] = mt.invert_one(tp.hour(i), det[i] + onestep[i]);
        }
    }
    std::vector<double> truth, p_det, p_comb;
    double sse = 0.0;
    std::size_t n_sse = 0;
    for (std::size_t i = 0; i < tp.size(); ++i) {
        if (!test[i] || !std::isfinite(work.miner_mw[i]) || !std::isfinite(det[i]) || !std::isfinite(onestep[i])) {
            continue;
        }
        truth.push_back(work.miner_mw[i]);
        p_det.push_back(rep.deterministic[i]);
        p_comb.push_back(rep.combined[i]);
        double r = resid[i] - onestep[i];
        sse += r * r;
        ++n_sse;
    }
    if (truth.size() >= 2) {
        rep.deterministic_metrics = regress::metrics(truth, p_det);
        rep.combined_metrics = regress::metrics(truth, p_comb);
    }
    rep.sarima_test_mse = n_sse ? sse / static_cast<double>(n_sse) : kNaN;
    return rep;
}

std::vector<double> predict(const DemandModel& model, const HourlyPanel& panel, PredictMode mode) {
    HourlyPanel tp = panel;
    for (Series s : {Series::temp_f, Series::rt_price, Series::da_price, Series::system_mw}) {
        tp.column(s) = model.transforms.at(s).apply(panel.start, panel.column(s));
    }
    auto det = deterministic_part(model, tp);
    const auto warm = static_cast<std::size_t>(model.max_lag());
    for (std::size_t i = 0; i < det.size(); ++i) {
        if (i < warm) {
            det[i] = kNaN;
        } else if (!std::isfinite(det[i])) {
            throw PreconditionError("predict: missing exogenous history for " + format_hour(panel.hour(i)));
        }
    }
    const auto& mt = model.transforms.at(Series::miner_mw);
    std::vector<double> z = det;
    if (mode == PredictMode::one_step) {
        std::vector<double> r(panel.size(), kNaN);
        for (std::size_t i = warm; i < panel.size(); ++i) {
            r[i] = mt.apply_one(panel.hour(i), panel.miner_mw[i]) - det[i];
        }
        for (auto seg : sarima::finite_segments(r, model.sarima.order.condition_length() + 1)) {
            auto offset = static_cast<std::size_t>(seg.data() - r.data());
            auto pred = sarima::one_step_predictions(model.sarima.order, model.sarima.params, seg);
            for (std::size_t j = 0; j < seg.size(); ++j) {
                if (std::isfinite(pred[j])) z[offset + j] += pred[j];
            }
        }
    }
    std::vector<double> out(panel.size(), kNaN);
    for (std::size_t i = warm; i < panel.size(); ++i) out[i] = mt.invert_one(panel.hour(i), z[i]);
    return out;
}

std::size_t warmup_days(const DemandModel& model) {
    return static_cast<std::size_t>((model.max_lag() + 23) / 24);
}

double core_variance(const sarima::SarimaOrder& order, const sarima::SarimaParams& params) {
    sarima::SarimaParams unit = params;
    unit.sigma = 1.0;
    auto psi = sarima::psi_weights(order, unit, 20000);
    double v = 0.0;
    for (double w : psi) v += w * w;
    return v;
}

HourlyPanel generate_synthetic(const DemandModel& model, const HourlyPanel& scenario, std::size_t n_days,
                               std::uint64_t seed, const SyntheticOptions& options) {
    model.validate();
    if (n_days == 0) throw PreconditionError("generate_synthetic: n_days must be positive");
    const std::size_t warm = warmup_days(model) * 24;
    const std::size_t n = n_days * 24;
    if (scenario.size() < warm + n) {
        throw PreconditionError("generate_synthetic: scenario has " + std::to_string(scenario.size()) +
                                " hours, need " + std::to_string(warm + n) + " (" + std::to_string(warm / 24) +
                                " warm-up days plus " + std::to_string(n_days) + ")");
    }

    const std::array<Series, 4> exog = {Series::temp_f, Series::rt_price, Series::da_price, Series::system_mw};
    HourlyPanel tp = scenario;
    auto work = [&](std::size_t k) {
        tp.column(exog[k]) = model.transforms.at(exog[k]).apply(scenario.start, scenario.column(exog[k]));
    };
    unsigned threads = std::max(1u, std::min<unsigned>(options.threads, exog.size()));
    if (threads == 1) {
        for (std::size_t k = 0; k < exog.size(); ++k) work(k);
    } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(threads);
        for (unsigned w = 0; w < threads; ++w) {
            pool.emplace_back([&, w] {
                try {
                    for (std::size_t k = w; k < exog.size(); k += threads) work(k);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
        for (auto& t : pool) t.join();
        for (auto& err : errors) {
            if (err) std::rethrow_exception(err);
        }
    }

    auto det_all = deterministic_part(model, tp);
    std::vector<double> det(det_all.begin() + static_cast<std::ptrdiff_t>(warm),
                            det_all.begin() + static_cast<std::ptrdiff_t>(warm + n));
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(det[i])) {
            throw PreconditionError("generate_synthetic: scenario value missing near " +
                                    format_hour(scenario.hour(warm + i)));
        }
    }

    sarima::SarimaOrder order = model.sarima.order;
    if (options.dynamics == ResidualDynamics::stationary_core) {
        order.d = 0;
        order.D = 0;
    }
    sarima::SarimaParams params = model.sarima.params;
    if (options.scale == ResidualScale::unit_variance && options.dynamics == ResidualDynamics::stationary_core) {
        double mean = 0.0;
        for (double v : det) mean += v;
        mean /= static_cast<double>(n);
        double var_det = 0.0;
        for (double v : det) var_det += (v - mean) * (v - mean);
        var_det /= static_cast<double>(n);
        double target = std::max(1.0 - var_det, 0.05);
        params.sigma = std::sqrt(target / core_variance(order, params));
    }
    auto resid = sarima::simulate(order, params, n, seed);

    HourlyPanel out = slice(scenario, scenario.hour(warm), scenario.hour(warm + n));
    const auto& mt = model.transforms.at(Series::miner_mw);
    for (std::size_t i = 0; i < n; ++i) out.miner_mw[i] = mt.invert_one(out.hour(i), det[i] + resid[i]);
    validate_panel(out);
    return out;
}

double fourcp_charge(double avg_4cp_mw, double rate, double months) {
    if (avg_4cp_mw < 0.0 || rate < 0.0 || months < 0.0) {
        throw PreconditionError("fourcp_charge: inputs must be nonnegative");
    }
    return avg_4cp_mw * 1000.0 * rate * months;
}

CoolingFn linear_cooling(double c0, double t0, double dt_ref) {
    if (!(dt_ref > 0.0)) throw PreconditionError("linear_cooling: reference span must be positive");
    return [=](double e_hash, double temp) { return c0 * e_hash * std::max(0.0, temp - t0) / dt_ref; };
}

AvoidedCostFn fourcp_avoided_cost(std::vector<std::size_t> intervals, double baseline_mw, double rate,
                                  double months) {
    std::set<std::size_t> set(intervals.begin(), intervals.end());
    double share = set.empty() ? 0.0 : 1000.0 * rate * months / static_cast<double>(set.size());
    return [set = std::move(set), baseline_mw, share](double e_total, std::size_t t) {
        return set.count(t) ? (baseline_mw - e_total) * share : 0.0;
    };
}

ProfitResult profit(const ProfitInputs& inputs) {
    ProfitResult r;
    r.per_interval.reserve(inputs.intervals.size());
    for (std::size_t t = 0; t < inputs.intervals.size(); ++t) {
        const auto& x = inputs.intervals[t];
        double supplied = x.e_total();
        double used = x.e_hash + inputs.psi(x.e_hash, x.temp);
        if (std::abs(supplied - used) > 1e-9 * std::max(1.0, std::abs(used))) {
            throw PreconditionError("profit: energy balance violated at interval " + std::to_string(t) +
                                    " (procured " + std::to_string(supplied) + " MWh, consumed " +
                                    std::to_string(used) + " MWh)");
        }
        double v = x.pi_btc * x.k_b * x.e_hash - x.pi_rt * x.e_rt - x.pi_da * x.e_da + inputs.gamma(supplied, t);
        r.per_interval.push_back(v);
        r.total += v;
    }
    return r;
}

}  // namespace minerdr::drmodel
