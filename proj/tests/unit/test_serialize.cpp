#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "minerdr/error.hpp"
#include "minerdr/serialize.hpp"

using namespace minerdr;
using namespace minerdr::serialize;

TEST_CASE("transform sets survive a JSON round trip") {
    auto set = drmodel::reference_transforms();
    auto j = to_json(set);
    CHECK(j["format"] == kTransformFormat);
    auto back = transform_set_from_json(Json::parse(dump(j)));
    Hour start = make_hour(2022, 5, 1, 0);
    std::vector<double> z{-3.0, -1.2, 0.0, 0.4, 2.5};
    for (const auto& [s, t] : set.series) {
        auto a = t.invert(start, z);
        auto b = back.at(s).invert(start, z);
        CHECK(a == b);
        CHECK(t.apply(start, a) == back.at(s).apply(start, a));
    }
}

TEST_CASE("trend and missing bins serialize") {
    std::vector<double> x(24 * 40);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = 100.0 + static_cast<double>(i) * 0.01 + std::sin(0.3 * i) + (i % 7);
    transform::FitOptions opt;
    opt.detrend = true;
    opt.trend_window_days = 7;
    Hour start = make_hour(2022, 2, 1, 0);
    auto t = transform::fit(start, x, opt);
    auto j = to_json(t);
    CHECK(j["bins"].size() == 48);
    CHECK(j["trend"].is_object());
    auto back = fitted_transform_from_json(Json::parse(dump(j)));
    CHECK(back.apply(start, x) == t.apply(start, x));
}

TEST_CASE("models survive a JSON round trip") {
    for (Season season : {Season::non_summer, Season::summer}) {
        auto m = drmodel::reference_model(season);
        auto j = to_json(m);
        CHECK(j["format"] == kModelFormat);
        auto back = model_from_json(Json::parse(dump(j)));
        CHECK(back.season == m.season);
        REQUIRE(back.terms.size() == m.terms.size());
        for (std::size_t k = 0; k < m.terms.size(); ++k) {
            CHECK(back.terms[k].column == m.terms[k].column);
            CHECK(back.terms[k].coef == m.terms[k].coef);
            CHECK(back.terms[k].se == m.terms[k].se);
        }
        CHECK(back.sarima.order == m.sarima.order);
        CHECK(back.sarima.params.coefficients() == m.sarima.params.coefficients());
        CHECK(back.sarima.params.sigma == m.sarima.params.sigma);
        auto scen = drmodel::make_scenario(make_hour(2022, 7, 1, 0), 24 * 8, 3, m.transforms);
        CHECK(drmodel::generate_synthetic(back, scen, 5, 9).miner_mw ==
              drmodel::generate_synthetic(m, scen, 5, 9).miner_mw);
    }
}

TEST_CASE("malformed artifacts are rejected") {
    auto j = to_json(drmodel::reference_model(Season::summer));
    auto wrong = j;
    wrong["format"] = "something.else";
    CHECK_THROWS_AS((void)model_from_json(wrong), DataError);
    CHECK_THROWS_AS(expect_format(j, kTransformFormat), DataError);

    auto bad_term = j;
    bad_term["terms"][0]["gate"] = "midnight";
    CHECK_THROWS_AS((void)model_from_json(bad_term), DataError);

    auto winter_load = to_json(drmodel::reference_model(Season::non_summer));
    winter_load["terms"].push_back(j["terms"].back());
    CHECK_THROWS((void)model_from_json(winter_load));

    auto path = std::filesystem::temp_directory_path() / "minerdr_bad.json";
    std::ofstream(path) << "{ \"format\": ";
    CHECK_THROWS_AS((void)read_file(path), DataError);
    std::filesystem::remove(path);
    CHECK_THROWS_AS((void)read_file(path), DataError);
}

TEST_CASE("NaN is written as null") {
    sarima::SarimaFit f;
    f.order = {1, 0, 0, 0, 0, 0, 24};
    f.params.phi = {0.5};
    f.se = {std::nan(""), 0.1};
    f.p_values = {std::nan(""), 0.2};
    auto j = to_json(f);
    CHECK(j["se"][0].is_null());
    auto back = sarima_fit_from_json(j);
    CHECK(std::isnan(back.se[0]));
    CHECK(back.se[1] == 0.1);
}

TEST_CASE("report rounding and layout") {
    Json j = {{"b", 1.0 / 3.0}, {"a", {0.1 + 0.2, 2}}, {"c", "text"}};
    auto r = rounded(j);
    CHECK(r["b"].get<double>() == 0.333333333333);
    CHECK(r["a"][0].get<double>() == 0.3);
    CHECK(r["a"][1] == 2);
    CHECK(r["c"] == "text");
    auto text = dump(r);
    CHECK(text.back() == '\n');
    CHECK(text.find("\"a\"") < text.find("\"b\""));
    CHECK(text.find("\n  \"a\"") != std::string::npos);

    stats::TestReport t;
    t.name = "ljung_box";
    t.statistic = 12.5;
    t.p_value = 0.4;
    auto tj = to_json(t);
    CHECK(tj["name"] == "ljung_box");
    CHECK(tj["p_value"] == 0.4);
}
