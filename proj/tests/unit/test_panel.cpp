#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "minerdr/calendar.hpp"
#include "minerdr/error.hpp"
#include "minerdr/panel.hpp"

using namespace minerdr;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("minerdr_panel_" + std::to_string(reinterpret_cast<std::uintptr_t>(this)));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    fs::path write(const std::string& name, const std::string& body) const {
        std::ofstream(path / name) << body;
        return path / name;
    }
};

std::string hourly_csv(Hour from, Hour to, const std::string& header, auto row) {
    std::ostringstream s;
    s << header << '\n';
    for (Hour h = from; h < to; h = h + 1) s << format_hour(h) << ',' << row(h) << '\n';
    return s.str();
}

HourlyPanel filled(Hour start, std::size_t n) {
    auto p = HourlyPanel::missing_grid(start, n, false);
    for (std::size_t i = 0; i < n; ++i) {
        p.rt_price[i] = 30.0 + static_cast<double>(i % 7);
        p.da_price[i] = 31.0;
        p.system_mw[i] = 40000.0;
        p.temp_f[i] = 70.0;
        p.miner_mw[i] = 300.0;
    }
    return p;
}

}  // namespace

TEST_CASE("calendar arithmetic") {
    CHECK(format_hour(make_hour(2022, 7, 15, 16)) == "2022-07-15T16:00");
    CHECK(parse_hour("2022-07-15 16:00:00") == make_hour(2022, 7, 15, 16));
    CHECK_FALSE(parse_hour("2022-07-15T16:30").has_value());
    CHECK(parse_minute("2023-08-10T16:45") == Minute{make_hour(2023, 8, 10, 16).value * 60 + 45});
    CHECK(format_day(make_day(2024, 2, 29)) == "2024-02-29");
    CHECK(month_of(make_day(2022, 9, 30)) == 9u);
    CHECK(hour_of_day(make_hour(1969, 12, 31, 23)) == 23u);
    CHECK(is_dst_fallback_hour(make_hour(2022, 11, 6, 1)));
    CHECK_FALSE(is_dst_fallback_hour(make_hour(2022, 11, 6, 2)));
    CHECK(is_dst_springforward_hour(make_hour(2022, 3, 13, 2)));
}

TEST_CASE("season masks") {
    SeasonMask summer{Season::summer};
    SeasonMask non_summer{Season::non_summer};
    CHECK(summer.active(Gate::peak, make_hour(2022, 7, 15, 16)));
    CHECK_FALSE(summer.active(Gate::day, make_hour(2022, 7, 15, 2)));
    CHECK_FALSE(summer.active(Gate::fourcp, make_hour(2022, 3, 15, 16)));
    CHECK(non_summer.active(Gate::day, make_hour(2022, 3, 15, 10)));
    CHECK_FALSE(non_summer.active(Gate::day, make_hour(2022, 3, 15, 20)));
    CHECK(summer.active(Gate::none, make_hour(2022, 1, 1, 0)));
    SeasonMask bad{Season::summer, {10, 20}, {8, 12}};
    CHECK_THROWS_AS(bad.validate(), PreconditionError);
    CHECK(season_of(6) == Season::summer);
    CHECK(season_of(10) == Season::non_summer);
}

TEST_CASE("load_panel aligns files on their common hours") {
    TempDir dir;
    Hour a = make_hour(2022, 4, 1, 0), b = make_hour(2022, 11, 1, 0);
    auto prices = dir.write("prices.csv", hourly_csv(a, b, "timestamp,RT,DA", [](Hour) { return "25.5,30"; }));
    auto grid = dir.write("grid.csv", hourly_csv(a - 48, b + 5, "timestamp,system_mw,temp_f,miner_mw",
                                                 [](Hour) { return "41000,72.5,310"; }));
    std::vector<fs::path> paths{prices, grid};
    std::istringstream schema_text("# market file\nrt_price = RT\nda_price = DA\n");
    auto loaded = load_panel(paths, parse_schema(schema_text));
    CHECK(loaded.panel.size() == 5136);
    CHECK(loaded.gaps.missing.empty());
    CHECK(loaded.panel.start == a);
    CHECK(loaded.panel.rt_price[100] == 25.5);
    CHECK(loaded.panel.miner_mw[5135] == 310.0);
    CHECK_FALSE(loaded.panel.has(Series::btc_usd));

    std::istringstream bad("price = RT\n");
    CHECK_THROWS_AS((void)parse_schema(bad), DataError);
}

TEST_CASE("load_panel errors") {
    TempDir dir;
    Hour a = make_hour(2022, 4, 1, 0);
    auto dup = dir.write("dup.csv",
                         "timestamp,rt_price,da_price,system_mw,temp_f,miner_mw\n"
                         "2022-04-01T00:00,1,1,1,1,1\n2022-04-01T01:00,1,1,1,1,1\n2022-04-01T01:00,1,1,1,1,1\n");
    std::vector<fs::path> one{dup};
    try {
        (void)load_panel(one);
        FAIL("expected an error");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("2022-04-01T01:00") != std::string::npos);
    }

    auto early = dir.write("early.csv", hourly_csv(a, a + 24, "timestamp,rt_price,da_price", [](Hour) { return "1,2"; }));
    auto late = dir.write("late.csv", hourly_csv(a + 100, a + 124, "timestamp,system_mw,temp_f,miner_mw",
                                                 [](Hour) { return "1,2,3"; }));
    std::vector<fs::path> disjoint{early, late};
    try {
        (void)load_panel(disjoint);
        FAIL("expected an error");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("intersection") != std::string::npos);
    }

    std::vector<fs::path> partial{early};
    CHECK_THROWS_AS((void)load_panel(partial), DataError);
}

TEST_CASE("DST fall-back duplicates are dropped and daily files spread") {
    TempDir dir;
    Hour a = make_hour(2022, 11, 5, 0);
    std::ostringstream s;
    s << "timestamp,rt_price,da_price,system_mw,temp_f,miner_mw\n";
    for (Hour h = a; h < a + 48; h = h + 1) {
        s << format_hour(h) << ",1,2,3,4,5\n";
        if (h == make_hour(2022, 11, 6, 1)) s << format_hour(h) << ",9,9,9,9,9\n";
    }
    auto hourly = dir.write("dst.csv", s.str());
    auto daily = dir.write("btc.csv", "timestamp,btc_usd\n2022-11-05,20000\n2022-11-06,21000\n");
    std::vector<fs::path> paths{hourly, daily};
    auto loaded = load_panel(paths);
    REQUIRE(loaded.gaps.dropped_duplicates.size() == 1);
    CHECK(loaded.gaps.dropped_duplicates[0] == make_hour(2022, 11, 6, 1));
    CHECK(loaded.panel.rt_price[25] == 1.0);
    CHECK(loaded.panel.btc_usd[23] == 20000.0);
    CHECK(loaded.panel.btc_usd[24] == 21000.0);
}

TEST_CASE("canonical CSV round trip and gaps") {
    TempDir dir;
    auto p = filled(make_hour(2022, 1, 1, 0), 72);
    p.temp_f[5] = std::nan("");
    p.rt_price[6] = 0.1 + 0.2;
    write_panel_csv(p, dir.path / "panel.csv");
    auto back = read_panel_csv(dir.path / "panel.csv");
    CHECK(back.panel.size() == 72);
    CHECK(std::isnan(back.panel.temp_f[5]));
    CHECK(back.panel.rt_price[6] == 0.1 + 0.2);
    REQUIRE(back.gaps.missing.size() == 1);
    CHECK(back.gaps.missing[0] == make_hour(2022, 1, 1, 5));
    std::ostringstream a, b;
    write_panel_csv(p, a);
    write_panel_csv(back.panel, b);
    CHECK(a.str() == b.str());
}

TEST_CASE("validate_panel") {
    auto p = filled(make_hour(2022, 1, 1, 0), 24);
    CHECK_NOTHROW(validate_panel(p));
    p.miner_mw[3] = -1.0;
    CHECK_THROWS_AS(validate_panel(p), DataError);
}

TEST_CASE("train/test split at day granularity") {
    auto p = filled(make_hour(2022, 1, 1, 0), 24 * 100);
    auto half = split_train_test(p, 0.5);
    CHECK(half.train_days.size() == 50);
    CHECK(half.test_days.size() == 50);
    CHECK(half.train_days.back() < half.test_days.front());
    auto part = split_train_test(p, 0.35, 7);
    CHECK(part.train_days.size() == 35);
    CHECK(part.test_days.size() == 65);
    auto again = split_train_test(p, 0.35, 7);
    CHECK(part.train_days == again.train_days);
    std::set<Day> all(part.train_days.begin(), part.train_days.end());
    all.insert(part.test_days.begin(), part.test_days.end());
    CHECK(all.size() == 100);
    CHECK(std::isnan(part.train.rt_price[static_cast<std::size_t>(first_hour(part.test_days[0]) - p.start)]));
    CHECK_THROWS_AS((void)split_train_test(p, 1.0), PreconditionError);
}

TEST_CASE("slice and keep_days") {
    auto p = filled(make_hour(2022, 1, 1, 0), 72);
    auto s = slice(p, p.start + 24, p.start + 48);
    CHECK(s.size() == 24);
    CHECK(s.start == p.start + 24);
    auto k = keep_days(p, {make_day(2022, 1, 2)});
    CHECK(complete_days(k) == std::vector<Day>{make_day(2022, 1, 2)});
    CHECK_THROWS_AS((void)slice(p, p.start, p.start + 100), PreconditionError);
}
