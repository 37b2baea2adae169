#include <doctest.h>

#include <cmath>
#include <numeric>

#include "minerdr/drmodel.hpp"
#include "minerdr/error.hpp"

using namespace minerdr;
using namespace minerdr::drmodel;
using doctest::Approx;

namespace {

const std::array<Series, 4> kExog = {Series::temp_f, Series::rt_price, Series::da_price, Series::system_mw};

/// Raw panel whose transformed exogenous values are all zero.
HourlyPanel flat_scenario(const DemandModel& m, Hour start, std::size_t n) {
    auto p = HourlyPanel::missing_grid(start, n, false);
    std::vector<double> zeros(n, 0.0);
    for (Series s : kExog) p.column(s) = m.transforms.at(s).invert(start, zeros);
    return p;
}

HourlyPanel transformed_zeros(Hour start, std::size_t n) {
    auto p = HourlyPanel::missing_grid(start, n, false);
    for (Series s : kExog) std::fill(p.column(s).begin(), p.column(s).end(), 0.0);
    return p;
}

double mean_of(std::span<const double> x) { return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size()); }

}  // namespace

TEST_CASE("reference model presets") {
    auto ns = reference_model(Season::non_summer);
    ns.validate();
    REQUIRE(ns.temperature_term());
    CHECK(ns.temperature_term()->coef == 0.14);
    CHECK(ns.temperature_term()->se == 0.04);
    CHECK(ns.price_terms().size() == 5);
    CHECK(ns.load_terms().empty());
    CHECK(ns.sarima.order == sarima::SarimaOrder{1, 0, 0, 1, 1, 0, 24});
    CHECK(ns.sarima.params.phi[0] == 0.83);
    CHECK(ns.sarima.params.Phi[0] == -0.43);
    CHECK(ns.sarima.params.sigma == 0.58);
    CHECK(ns.max_lag() == 48);

    auto s = reference_model(Season::summer);
    s.validate();
    CHECK(s.temperature_term()->coef == 0.12);
    CHECK(s.price_terms().size() == 3);
    auto load = s.load_terms();
    REQUIRE(load.size() == 2);
    CHECK(load[0].column.lag == 24);
    CHECK(load[0].coef == -0.89);
    CHECK(load[1].column.lag == 48);
    CHECK(load[1].coef == 0.39);
    CHECK(load[0].column.gate == Gate::fourcp);
    CHECK(s.sarima.order == sarima::SarimaOrder{1, 0, 0, 1, 1, 1, 24});
    CHECK(s.sarima.params.Theta[0] == -0.93);
    CHECK(s.max_lag() == 72);
    CHECK(warmup_days(s) == 3);

    auto bad = ns;
    bad.terms.push_back(load[0]);
    CHECK_THROWS_AS(bad.validate(), PreconditionError);
}

TEST_CASE("prediction with zero transformed inputs is the inverse at zero") {
    for (Season season : {Season::non_summer, Season::summer}) {
        auto m = reference_model(season);
        Hour start = season == Season::summer ? make_hour(2022, 7, 1, 0) : make_hour(2022, 3, 1, 0);
        auto p = flat_scenario(m, start, 24 * 6);
        auto y = predict(m, p);
        const auto& mt = m.transforms.at(Series::miner_mw);
        for (std::size_t i = 0; i < y.size(); ++i) {
            if (i < static_cast<std::size_t>(m.max_lag())) {
                CHECK(std::isnan(y[i]));
            } else {
                CHECK(y[i] == Approx(mt.invert_one(p.hour(i), 0.0)).epsilon(1e-6));
                CHECK(y[i] >= 0.0);
            }
        }
    }
}

TEST_CASE("deterministic part is linear in each term") {
    auto s = reference_model(Season::summer);
    Hour start = make_hour(2022, 7, 1, 0);
    auto tp = transformed_zeros(start, 24 * 6);
    std::size_t t = 24 * 4 + 12;  // day window, outside the peak window
    tp.da_price[t] = 1.0;
    auto det = deterministic_part(s, tp);
    CHECK(det[t] == Approx(-0.40).epsilon(1e-12));
    CHECK(det[t + 24] == 0.0);
    CHECK(det[t - 1] == 0.0);

    for (const auto& term : s.terms) {
        auto shifted = transformed_zeros(start, 24 * 6);
        std::size_t row = 24 * 4 + 17;  // inside every window
        shifted.column(term.column.source)[row - static_cast<std::size_t>(term.column.lag)] += 1.0;
        auto d = deterministic_part(s, shifted);
        double expected = 0.0;
        for (const auto& other : s.terms) {
            if (other.column.source == term.column.source && other.column.lag == term.column.lag) expected += other.coef;
        }
        CHECK(d[row] == Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("non-summer hours outside the price windows ignore prices") {
    auto ns = reference_model(Season::non_summer);
    Hour start = make_hour(2022, 3, 1, 0);
    auto a = transformed_zeros(start, 24 * 5);
    auto b = a;
    for (std::size_t i = 0; i < b.size(); ++i) {
        b.rt_price[i] = std::sin(0.37 * static_cast<double>(i)) * 2.0;
        b.da_price[i] = std::cos(0.11 * static_cast<double>(i)) * 2.0;
        a.temp_f[i] = b.temp_f[i] = 0.5;
    }
    auto da = deterministic_part(ns, a);
    auto db = deterministic_part(ns, b);
    for (std::size_t i = 48; i < a.size(); ++i) {
        unsigned hod = hour_of_day(a.hour(i));
        if (hod < 10 || hod >= 20) {
            CHECK(db[i] == da[i]);
            CHECK(db[i] == Approx(0.14 * 0.5));
        }
    }
}

TEST_CASE("predict guards and one-step mode") {
    auto ns = reference_model(Season::non_summer);
    Hour start = make_hour(2022, 3, 1, 0);
    auto p = flat_scenario(ns, start, 24 * 6);
    auto gap = p;
    gap.temp_f[100] = std::nan("");
    CHECK_THROWS_AS((void)predict(ns, gap), PreconditionError);

    const auto& mt = ns.transforms.at(Series::miner_mw);
    for (std::size_t i = 0; i < p.size(); ++i) p.miner_mw[i] = mt.invert_one(p.hour(i), 0.0);
    auto y = predict(ns, p, PredictMode::one_step);
    for (std::size_t i = 48; i < y.size(); ++i) CHECK(y[i] == Approx(p.miner_mw[i]).epsilon(1e-6));
}

TEST_CASE("synthetic generation") {
    auto s = reference_model(Season::summer);
    ScenarioOptions so;
    auto scen = make_scenario(make_hour(2022, 6, 1, 0), 24 * 40, 5, s.transforms, so);
    CHECK(std::all_of(scen.miner_mw.begin(), scen.miner_mw.end(), [](double v) { return std::isnan(v); }));
    CHECK_FALSE(scen.has(Series::btc_usd));

    auto a = generate_synthetic(s, scen, 30, 11);
    auto b = generate_synthetic(s, scen, 30, 11);
    CHECK(a.miner_mw == b.miner_mw);
    CHECK(a.size() == 30 * 24);
    CHECK(a.start == scen.start + 72);
    validate_panel(a);
    SyntheticOptions threaded;
    threaded.threads = 4;
    CHECK(generate_synthetic(s, scen, 30, 11, threaded).miner_mw == a.miner_mw);
    CHECK(generate_synthetic(s, scen, 30, 12).miner_mw != a.miner_mw);

    CHECK_THROWS_AS((void)generate_synthetic(s, scen, 38, 1), PreconditionError);
    CHECK_NOTHROW((void)generate_synthetic(s, scen, 37, 1));
}

TEST_CASE("zero coefficients leave the transformed residual path") {
    auto m = reference_model(Season::non_summer);
    for (auto& t : m.terms) t.coef = 0.0;
    auto s1 = make_scenario(make_hour(2022, 3, 1, 0), 24 * 12, 1, m.transforms);
    auto s2 = make_scenario(make_hour(2022, 3, 1, 0), 24 * 12, 2, m.transforms);
    SyntheticOptions opt;
    opt.scale = ResidualScale::model_sigma;
    auto a = generate_synthetic(m, s1, 10, 3, opt);
    auto b = generate_synthetic(m, s2, 10, 3, opt);
    CHECK(a.miner_mw == b.miner_mw);

    auto core = m.sarima.order;
    core.D = 0;
    auto path = sarima::simulate(core, m.sarima.params, 240, 3);
    const auto& mt = m.transforms.at(Series::miner_mw);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a.miner_mw[i] == mt.invert_one(a.hour(i), path[i]));
}

TEST_CASE("a system-load peak in the 4CP window lowers summer load") {
    auto s = reference_model(Season::summer);
    Hour start = make_hour(2022, 8, 1, 0);
    auto flat = flat_scenario(s, start, 24 * 13);
    auto peak = flat;
    std::vector<double> z(peak.size(), 0.0);
    for (std::size_t d = 5; d < 8; ++d) {
        for (std::size_t h = 16; h < 18; ++h) z[d * 24 + h] = 2.0;
    }
    peak.system_mw = s.transforms.at(Series::system_mw).invert(start, z);

    SyntheticOptions opt;
    opt.scale = ResidualScale::model_sigma;
    auto a = generate_synthetic(s, flat, 10, 4, opt);
    auto b = generate_synthetic(s, peak, 10, 4, opt);
    std::vector<double> wa, wb;
    for (std::size_t i = 0; i < a.size(); ++i) {
        unsigned hod = hour_of_day(a.hour(i));
        auto day = static_cast<std::size_t>((a.hour(i) - start) / 24);
        if (hod >= 16 && hod < 18 && day >= 5 && day <= 9) {
            wa.push_back(a.miner_mw[i]);
            wb.push_back(b.miner_mw[i]);
        }
    }
    CHECK(mean_of(wb) < mean_of(wa));
}

TEST_CASE("fit requires enough season days") {
    auto ns = reference_model(Season::non_summer);
    auto scen = make_scenario(make_hour(2022, 3, 1, 0), 24 * 13, 1, ns.transforms);
    auto p = generate_synthetic(ns, scen, 10, 1);
    CHECK_THROWS_AS((void)fit_demand_model(p, Season::non_summer, ns.transforms), PreconditionError);
    try {
        (void)fit_demand_model(p, Season::non_summer, ns.transforms);
    } catch (const PreconditionError& e) {
        CHECK(std::string(e.what()).find("10") != std::string::npos);
    }
}

TEST_CASE("fit recovers a non-summer model") {
    auto ns = reference_model(Season::non_summer);
    auto scen = make_scenario(make_hour(2022, 1, 1, 0), 24 * 150, 21, ns.transforms);
    auto p = generate_synthetic(ns, scen, 148, 22);
    FitConfig cfg;
    cfg.train_fraction = 0.8;
    auto rep = fit_demand_model(p, Season::non_summer, ns.transforms, cfg);
    REQUIRE(rep.model.temperature_term());
    CHECK(std::abs(rep.model.temperature_term()->coef - 0.14) < 3.0 * 0.04);
    CHECK(rep.model.load_terms().empty());
    CHECK(rep.staged.steps.size() == 3);
    CHECK(rep.train_days + rep.test_days == rep.days);
    CHECK(rep.combined_metrics.mse <= rep.deterministic_metrics.mse);
    CHECK(rep.adf.p_value.value() < 0.05);
    CHECK(rep.selection.table.size() == default_sarima_grid().size());
}

TEST_CASE("core variance") {
    sarima::SarimaOrder ar{1, 0, 0, 0, 0, 0, 24};
    sarima::SarimaParams p;
    p.phi = {0.8};
    CHECK(core_variance(ar, p) == Approx(1.0 / (1.0 - 0.64)).epsilon(1e-9));
    sarima::SarimaOrder ma{0, 0, 1, 0, 0, 0, 24};
    sarima::SarimaParams q;
    q.theta = {0.5};
    CHECK(core_variance(ma, q) == Approx(1.25));
}

TEST_CASE("4CP charge") {
    CHECK(fourcp_charge(500.0, 4.96, 12.0) == Approx(29760000.0).epsilon(1e-15));
    CHECK(fourcp_charge(0.0, 4.96, 12.0) == 0.0);
    CHECK(fourcp_charge(100.0, 4.96, 12.0) == Approx(5952000.0).epsilon(1e-15));
    CHECK_THROWS_AS((void)fourcp_charge(-1.0, 4.96, 12.0), PreconditionError);

    auto gamma = fourcp_avoided_cost({3, 7}, 500.0, 4.96, 12.0);
    CHECK(gamma(400.0, 0) == 0.0);
    CHECK(gamma(400.0, 3) == Approx(100.0 * 1000.0 * 4.96 * 12.0 / 2.0));
}

TEST_CASE("miner profit") {
    ProfitInputs zero;
    zero.intervals.resize(3);
    CHECK(profit(zero).total == 0.0);

    ProfitInputs one;
    ProfitInterval iv;
    iv.pi_btc = 20000.0;
    iv.k_b = 1e-4;
    iv.e_hash = 100.0;
    iv.pi_da = 50.0;
    iv.e_da = 100.0;
    iv.temp = 60.0;
    one.intervals = {iv};
    CHECK(profit(one).total == Approx(-4800.0).epsilon(1e-12));

    ProfitInputs flat;
    flat.intervals.resize(5);
    flat.gamma = [](double, std::size_t) { return 7.5; };
    auto r = profit(flat);
    CHECK(r.total == Approx(37.5));
    CHECK(std::accumulate(r.per_interval.begin(), r.per_interval.end(), 0.0) == r.total);

    ProfitInputs hot = one;
    hot.intervals[0].temp = 95.0;
    CHECK_THROWS_AS((void)profit(hot), PreconditionError);
    hot.intervals[0].e_rt = linear_cooling()(100.0, 95.0);
    hot.intervals[0].pi_rt = 40.0;
    CHECK(profit(hot).total == Approx(-4800.0 - 40.0 * 15.0));

    ProfitInputs two = one;
    two.intervals.push_back(hot.intervals[0]);
    ProfitInputs second;
    second.intervals = {hot.intervals[0]};
    CHECK(profit(two).total == Approx(profit(one).total + profit(second).total));
}
