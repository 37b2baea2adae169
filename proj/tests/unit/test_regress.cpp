#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "minerdr/error.hpp"
#include "minerdr/regress.hpp"
#include "support.hpp"

using namespace minerdr;
using namespace minerdr::regress;
using doctest::Approx;

namespace {

HourlyPanel noise_panel(std::size_t n, std::uint64_t seed) {
    auto p = HourlyPanel::missing_grid(make_hour(2022, 1, 3, 0), n, false);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z;
    for (auto s : {Series::rt_price, Series::da_price, Series::system_mw, Series::temp_f, Series::miner_mw}) {
        for (auto& v : p.column(s)) v = z(rng);
    }
    return p;
}

std::vector<std::uint8_t> all_rows(const HourlyPanel& p) { return std::vector<std::uint8_t>(p.size(), 1); }

}  // namespace

TEST_CASE("ols agrees with a reference least-squares fit") {
    const auto& o = support::oracles()["ols"];
    const auto& rows = o["X"];
    Eigen::MatrixXd X(rows.size(), rows[0].size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < rows[i].size(); ++j) X(i, j) = rows[i][j].get<double>();
    }
    auto yv = support::vec(o["y"]);
    Eigen::VectorXd y = Eigen::Map<Eigen::VectorXd>(yv.data(), yv.size());
    auto r = ols(X, y);
    auto coef = support::vec(o["coef"]);
    auto se = support::vec(o["se"]);
    auto p = support::vec(o["p"]);
    for (std::size_t j = 0; j < coef.size(); ++j) {
        CHECK(r.coefficients[j] == Approx(coef[j]).epsilon(1e-9));
        CHECK(r.se[j] == Approx(se[j]).epsilon(1e-9));
        CHECK(r.p_values[j] == Approx(p[j]).epsilon(1e-6).scale(1e-12));
    }
    CHECK(r.sigma2 == Approx(o["sigma2"].get<double>()).epsilon(1e-9));

    Eigen::VectorXd e = Eigen::Map<const Eigen::VectorXd>(r.residuals.data(), r.residuals.size());
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        CHECK(std::abs(X.col(j).dot(e)) / (X.col(j).norm() * e.norm()) < 1e-8);
    }
}

TEST_CASE("ols edge cases") {
    Eigen::MatrixXd X(50, 1);
    for (int i = 0; i < 50; ++i) X(i, 0) = i + 1;
    Eigen::VectorXd y = 2.0 * X.col(0);
    auto r = ols(X, y);
    CHECK(r.coefficients[0] == Approx(2.0).epsilon(1e-12));
    CHECK(r.se[0] < 1e-9);

    CHECK_THROWS_AS((void)ols(X.topRows(10), y.head(10)), PreconditionError);
    Eigen::MatrixXd dup(50, 2);
    dup << X, X;
    CHECK_THROWS_AS((void)ols(dup, y), DegenerateError);
}

TEST_CASE("temperature effect recovery at the reported scale") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> z;
    const int n = 4000;
    Eigen::MatrixXd X(n, 1);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        X(i, 0) = 0.25 * z(rng);
        y(i) = 0.14 * X(i, 0) + z(rng);
    }
    auto r = ols(X, y);
    CHECK(std::abs(r.coefficients[0] - 0.14) < 2.0 * r.se[0]);
    CHECK(r.se[0] == Approx(1.0 / (0.25 * std::sqrt(n))).epsilon(0.1));
}

TEST_CASE("orthogonal target gives small coefficients") {
    int inside = 0, total = 0;
    for (std::uint64_t s = 0; s < 50; ++s) {
        std::mt19937_64 rng(100 + s);
        std::normal_distribution<double> z;
        Eigen::MatrixXd X(300, 3);
        Eigen::VectorXd y(300);
        for (int i = 0; i < 300; ++i) {
            for (int j = 0; j < 3; ++j) X(i, j) = z(rng);
            y(i) = z(rng);
        }
        auto r = ols(X, y);
        for (int j = 0; j < 3; ++j, ++total) inside += std::abs(r.coefficients[j]) < 2.0 * r.se[j];
    }
    CHECK(static_cast<double>(inside) / total > 0.9);
}

TEST_CASE("design matrix layout and gating") {
    auto p = noise_panel(24 * 5, 1);
    SeasonMask mask;
    std::vector<LagSpec> specs{{Series::temp_f, {0}, Gate::none}};
    auto d = design_matrix(p, specs, all_rows(p), mask);
    REQUIRE(d.X.rows() == static_cast<Eigen::Index>(p.size()));
    for (std::size_t i = 0; i < p.size(); ++i) CHECK(d.X(i, 0) == p.temp_f[i]);

    std::vector<LagSpec> gated{{Series::rt_price, {0, 24}, Gate::day}, {Series::temp_f, {0}, Gate::none}};
    auto g = design_matrix(p, gated, all_rows(p), mask);
    CHECK(g.columns.size() == 3);
    CHECK(g.columns[0].name() == "rt_price@day[t-0]");
    CHECK(g.columns[1].name() == "rt_price@day[t-24]");
    // Lag 24 is missing on day one, but only the day-window hours need it.
    CHECK(g.rows.front() == 0);
    CHECK(g.dropped_rows.size() == 10);
    for (Eigen::Index i = 0; i < g.X.rows(); ++i) {
        auto h = p.hour(g.rows[i]);
        bool on = mask.active(Gate::day, h);
        if (!on) CHECK(g.X(i, 0) == 0.0);
        if (on) CHECK(g.X(i, 1) == p.rt_price[g.rows[i] - 24]);
    }

    std::vector<LagSpec> twice{{Series::temp_f, {0}, Gate::none}, {Series::temp_f, {0}, Gate::none}};
    CHECK_THROWS_AS((void)design_matrix(p, twice, all_rows(p), mask), DegenerateError);
    std::vector<std::uint8_t> none(p.size(), 0);
    CHECK_THROWS_AS((void)design_matrix(p, specs, none, mask), PreconditionError);
}

TEST_CASE("missing values drop rows except where gated off") {
    auto p = noise_panel(24 * 4, 2);
    SeasonMask mask;
    p.rt_price[30] = std::nan("");  // hour 6, outside the day window
    p.rt_price[40] = std::nan("");  // hour 16, inside
    std::vector<LagSpec> specs{{Series::rt_price, {0}, Gate::day}};
    auto d = design_matrix(p, specs, all_rows(p), mask);
    CHECK(d.dropped_rows == std::vector<std::size_t>{40});
}

TEST_CASE("staged regression") {
    SeasonMask mask;
    auto p = noise_panel(24 * 200, 3);
    std::vector<double> truth(p.size());
    std::mt19937_64 rng(4);
    std::normal_distribution<double> z;
    for (std::size_t i = 24; i < p.size(); ++i) {
        double day = mask.active(Gate::day, p.hour(i)) ? 1.0 : 0.0;
        p.miner_mw[i] = 0.5 * p.temp_f[i] - 0.3 * day * p.da_price[i - 24] + z(rng);
    }
    std::vector<Stage> stages{{"temperature", {{Series::temp_f, {0}, Gate::none}}},
                              {"prices", {{Series::da_price, {24}, Gate::day}}}};
    auto rows = all_rows(p);
    std::vector<std::uint8_t> test(p.size(), 0);
    auto r = staged_regression(p, Series::miner_mw, stages, rows, test);
    REQUIRE(r.steps.size() == 2);
    CHECK(std::abs(r.steps[0].coefficients[0] - 0.5) < 2.0 * r.steps[0].se[0]);
    CHECK(std::abs(r.steps[1].coefficients[0] + 0.3) < 2.5 * r.steps[1].se[0]);
    CHECK(std::isnan(r.residuals[12]));
    CHECK(std::isfinite(r.residuals[0]));
    double rest = p.miner_mw[100] - r.steps[0].coefficients[0] * p.temp_f[100] -
                  (mask.active(Gate::day, p.hour(100)) ? r.steps[1].coefficients[0] * p.da_price[76] : 0.0);
    CHECK(r.residuals[100] == Approx(rest).epsilon(1e-12));

    std::vector<Stage> single{stages[0]};
    auto one = staged_regression(p, Series::miner_mw, single, rows, test);
    auto d = design_matrix(p, single[0].specs, rows, mask);
    Eigen::VectorXd y(d.rows.size());
    for (std::size_t i = 0; i < d.rows.size(); ++i) y(i) = p.miner_mw[d.rows[i]];
    CHECK(one.steps[0].coefficients[0] == Approx(ols(d.X, y).coefficients[0]).epsilon(1e-12));

    CHECK_THROWS_AS((void)staged_regression(p, Series::miner_mw, {}, rows, test), PreconditionError);
    StagedOptions bad;
    bad.alpha = 0.0;
    CHECK_THROWS_AS((void)staged_regression(p, Series::miner_mw, stages, rows, test, bad), PreconditionError);
}

TEST_CASE("pure-noise stages are pruned empty") {
    int empty = 0;
    for (std::uint64_t s = 0; s < 50; ++s) {
        auto p = noise_panel(24 * 40, 200 + s);
        std::vector<Stage> stages{{"noise", {{Series::temp_f, {0}, Gate::none}}}};
        auto rows = all_rows(p);
        std::vector<std::uint8_t> test(p.size(), 0);
        auto r = staged_regression(p, Series::miner_mw, stages, rows, test);
        if (r.steps[0].columns.empty()) {
            ++empty;
            CHECK(r.residuals[5] == p.miner_mw[5]);
        }
    }
    CHECK(empty >= 45);
}

TEST_CASE("fit metrics") {
    std::vector<double> truth{10, 20, 30, 40};
    auto perfect = metrics(truth, truth);
    CHECK(perfect.mse == 0.0);
    CHECK(perfect.mape == 0.0);
    CHECK(perfect.r_squared == 1.0);

    std::vector<double> mean(4, 25.0);
    CHECK(std::abs(metrics(truth, mean).r_squared) < 1e-9);

    std::vector<double> hundred(10, 100.0), offset(10, 110.0);
    auto m = metrics(hundred, offset);
    CHECK(m.mape == Approx(10.0));
    CHECK(m.rmse == Approx(std::sqrt(m.mse)));

    std::vector<double> with_zero{0, 10, 20}, pred{1, 11, 22};
    auto z = metrics(with_zero, pred);
    CHECK(z.mape_excluded == 1);
    CHECK(z.mape == Approx(10.0));
    CHECK_THROWS_AS((void)metrics(std::vector<double>{0, 0}, std::vector<double>{1, 1}), PreconditionError);
    CHECK_THROWS_AS((void)metrics(std::vector<double>{1}, std::vector<double>{1}), PreconditionError);

    CHECK(quantile({1, 2, 3, 4}, 0.5) == 2.5);
    CHECK(quantile({1, 2, 3, 4}, 0.125) == Approx(1.375));
}
