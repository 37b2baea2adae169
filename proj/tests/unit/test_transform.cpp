#include <doctest.h>

#include <cmath>
#include <random>

#include "minerdr/error.hpp"
#include "minerdr/distributions.hpp"
#include "minerdr/stats.hpp"
#include "minerdr/transform.hpp"
#include "support.hpp"

using namespace minerdr;
using doctest::Approx;

namespace {

std::vector<double> lognormal(std::uint64_t seed, std::size_t n) {
    std::mt19937_64 rng(seed);
    std::lognormal_distribution<double> d(3.0, 0.6);
    std::vector<double> x(n);
    for (auto& v : x) v = d(rng);
    return x;
}

HourlyPanel price_panel(const std::vector<double>& daily_rt) {
    auto p = HourlyPanel::missing_grid(make_hour(2022, 1, 1, 0), daily_rt.size() * 24, false);
    for (std::size_t i = 0; i < p.size(); ++i) {
        p.rt_price[i] = daily_rt[i / 24] + static_cast<double>(i % 24) * 0.01;
        p.da_price[i] = 30.0;
        p.system_mw[i] = 40000.0;
        p.temp_f[i] = 60.0;
        p.miner_mw[i] = 200.0;
    }
    return p;
}

}  // namespace

TEST_CASE("trend extraction") {
    Hour start = make_hour(2022, 1, 1, 0);
    std::vector<double> flat(24 * 10, 5.0);
    auto t = transform::extract_trend(start, flat, 3);
    for (double v : t.detrended) CHECK(v == Approx(1.0));
    CHECK(t.trend.at(make_day(2021, 6, 1)) == 5.0);

    std::vector<double> growth(24 * 3);
    double peaks[] = {100.0, 110.0, 121.0};
    for (std::size_t i = 0; i < growth.size(); ++i) growth[i] = peaks[i / 24] * (i % 24 == 12 ? 1.0 : 0.5);
    auto g = transform::extract_trend(start, growth, 1);
    for (std::size_t d = 0; d < 3; ++d) CHECK(g.detrended[d * 24 + 12] == Approx(1.0));

    auto zero = flat;
    zero[30] = 0.0;
    auto z = transform::extract_trend(start, zero, 7);
    CHECK(z.detrended[30] == 0.0);

    auto gap = flat;
    for (std::size_t i = 48; i < 72; ++i) gap[i] = std::nan("");
    auto gt = transform::extract_trend(start, gap, 1);
    CHECK(std::isnan(gt.detrended[50]));
    CHECK(gt.trend.values[2] == 5.0);
    CHECK_THROWS_AS((void)transform::extract_trend(start, std::vector<double>(48, 0.0), 7), DegenerateError);
}

TEST_CASE("gaussianize uses Hazen normal scores") {
    const auto& o = support::oracles()["gaussianize"];
    auto g = transform::gaussianize(support::vec(o["x"]));
    auto ref = support::vec(o["z"]);
    for (std::size_t i = 0; i < ref.size(); ++i) CHECK(g.z[i] == Approx(ref[i]).epsilon(1e-10));

    std::vector<double> odd{5, 1, 9, 3, 7};
    for (int i = 0; i < 30; ++i) odd.push_back(100.0 + i);
    auto m = transform::gaussianize(odd);
    CHECK(m.map.inverse(0.0) == Approx(m.map.values[17]));

    std::mt19937_64 rng(3);
    std::exponential_distribution<double> ex(1.0);
    std::vector<double> e(5000);
    for (auto& v : e) v = ex(rng);
    CHECK(*stats::jarque_bera(transform::gaussianize(e).z).p_value > 0.05);

    std::vector<double> order(10000);
    for (std::size_t i = 0; i < order.size(); ++i) {
        order[i] = dist::normal_quantile((static_cast<double>(i) + 0.5) / 10000.0);
    }
    auto og = transform::gaussianize(order);
    double worst = 0.0;
    for (std::size_t i = 0; i < order.size(); ++i) worst = std::max(worst, std::abs(og.z[i] - order[i]));
    CHECK(worst < 1e-9);

    CHECK_THROWS_AS((void)transform::gaussianize(std::vector<double>(40, 1.0)), DegenerateError);
    CHECK_THROWS_AS((void)transform::gaussianize(std::vector<double>(10, 1.0)), PreconditionError);
}

TEST_CASE("quantile map clamps and handles ties") {
    std::vector<double> x(40);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<double>(i / 2);
    auto g = transform::gaussianize(x);
    CHECK(g.z[0] < g.z[1]);
    CHECK(g.map.forward(0.0) == Approx(0.5 * (g.z[0] + g.z[1])));
    CHECK(g.map.inverse(10.0) == 19.0);
    CHECK(g.map.inverse(-10.0) == 0.0);
    CHECK(g.map.forward(100.0) == g.map.z.back());
    double mid = g.map.forward(3.5);
    CHECK(mid > g.map.forward(3.0));
    CHECK(mid < g.map.forward(4.0));
}

TEST_CASE("standardize per hour-of-day and season bin") {
    Hour start = make_hour(2022, 1, 1, 0);
    std::mt19937_64 rng(4);
    std::normal_distribution<double> d;
    std::vector<double> z(24 * 60);
    std::vector<std::size_t> bins(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) {
        bins[i] = transform::bin_of(start + static_cast<std::int64_t>(i));
        z[i] = 3.0 * std::sin(static_cast<double>(i % 24)) + 2.0 * d(rng);
    }
    auto s = transform::standardize(z, bins);
    for (std::size_t b = 24; b < 48; ++b) {
        double sum = 0.0, sq = 0.0;
        int n = 0;
        for (std::size_t i = 0; i < z.size(); ++i) {
            if (bins[i] != b) continue;
            sum += s.tilde[i];
            sq += s.tilde[i] * s.tilde[i];
            ++n;
        }
        CHECK(std::abs(sum / n) < 1e-12);
        CHECK(std::sqrt(sq / (n - 1)) == Approx(1.0));
    }
    CHECK_FALSE(s.stats[0].has_value());
    CHECK(transform::bin_label(30) == "non_summer/hour 6");

    std::vector<double> sinusoid(24 * 10);
    for (std::size_t i = 0; i < sinusoid.size(); ++i) sinusoid[i] = std::sin(static_cast<double>(i % 24));
    CHECK_THROWS_AS((void)transform::standardize(sinusoid, std::span(bins).first(sinusoid.size())), DegenerateError);
}

TEST_CASE("fitted transform round trip") {
    Hour start = make_hour(2022, 4, 1, 0);
    auto x = lognormal(5, 5136);
    auto t = transform::fit(start, x);
    auto z = t.apply(start, x);
    auto back = t.invert(start, z);
    double worst = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) worst = std::max(worst, std::abs(back[i] - x[i]) / x[i]);
    CHECK(worst < 1e-9);

    double lo = *std::min_element(x.begin(), x.end());
    double hi = *std::max_element(x.begin(), x.end());
    CHECK(t.invert_one(start, 50.0) == hi);
    CHECK(t.invert_one(start, -50.0) == lo);

    transform::FitOptions opt;
    opt.detrend = true;
    opt.trend_window_days = 7;
    auto td = transform::fit(start, x, opt);
    REQUIRE(td.trend.has_value());
    auto zd = td.apply(start, x);
    auto bd = td.invert(start, zd);
    for (std::size_t i = 0; i < x.size(); i += 97) CHECK(bd[i] == Approx(x[i]).epsilon(1e-9));
    CHECK(td.steps.front() == transform::Step::trend);
}

TEST_CASE("outlier day removal") {
    std::vector<double> same(30, 40.0);
    auto none = transform::remove_outlier_days(price_panel(same));
    CHECK(none.removed.empty());

    std::vector<double> daily(40);
    for (std::size_t d = 0; d < daily.size(); ++d) daily[d] = 40.0 + (d % 2 ? 1.0 : -1.0);
    daily[17] = 400.0;
    auto r = transform::remove_outlier_days(price_panel(daily), 3.0);
    REQUIRE(r.removed.size() == 1);
    CHECK(r.removed[0] == make_day(2022, 1, 18));
    CHECK(std::isnan(r.panel.rt_price[17 * 24 + 3]));
    CHECK_THROWS_AS((void)transform::remove_outlier_days(price_panel(daily), 0.0001), PreconditionError);
}

TEST_CASE("panel transforms") {
    auto p = price_panel(std::vector<double>(60, 40.0));
    std::mt19937_64 rng(6);
    std::normal_distribution<double> d;
    for (std::size_t i = 0; i < p.size(); ++i) {
        p.rt_price[i] += d(rng);
        p.da_price[i] += d(rng);
        p.system_mw[i] += 100.0 * d(rng);
        p.temp_f[i] += d(rng);
        p.miner_mw[i] += 10.0 * d(rng) + static_cast<double>(i) * 0.01;
    }
    auto set = transform::fit_panel(p);
    CHECK(set.at(Series::miner_mw).trend.has_value());
    CHECK_FALSE(set.at(Series::rt_price).trend.has_value());
    auto tp = set.apply(p);
    CHECK(std::abs(tp.temp_f[5]) < 6.0);
    CHECK_THROWS_AS((void)set.at(Series::btc_usd), PreconditionError);
}
