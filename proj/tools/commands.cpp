#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "minerdr/distributions.hpp"
#include "minerdr/drmodel.hpp"
#include "minerdr/error.hpp"
#include "minerdr/indicators.hpp"
#include "minerdr/serialize.hpp"
#include "minerdr/stats.hpp"
#include "minerdr/text.hpp"
#include "staging.hpp"

namespace fs = std::filesystem;

namespace minerdr::cli {

using serialize::Json;

namespace {

constexpr std::string_view kVersion = "0.1.0";
constexpr std::array<Series, 5> kCore = {Series::rt_price, Series::da_price, Series::system_mw, Series::temp_f,
                                         Series::miner_mw};
constexpr std::array<Series, 4> kExog = {Series::rt_price, Series::da_price, Series::system_mw, Series::temp_f};

const fs::path& require(const std::optional<fs::path>& p, const char* key, const char* command) {
    if (!p) throw PreconditionError(std::string(command) + " needs config key '" + key + "'");
    return *p;
}

HourlyPanel load(const fs::path& path) { return read_panel_csv(path).panel; }

transform::TransformSet load_transforms(const fs::path& path) {
    return serialize::transform_set_from_json(serialize::read_file(path));
}

std::string num(double v) { return std::isfinite(v) ? text::format_double(v) : std::string(); }

std::string panel_text(const HourlyPanel& p) {
    std::ostringstream os;
    write_panel_csv(p, os);
    return os.str();
}

/// Finite values of `x` and their row numbers.
std::pair<std::vector<double>, std::vector<std::size_t>> finite_rows(std::span<const double> x) {
    std::pair<std::vector<double>, std::vector<std::size_t>> out;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (std::isfinite(x[i])) {
            out.first.push_back(x[i]);
            out.second.push_back(i);
        }
    }
    return out;
}

Json series_battery(const HourlyPanel& raw, const HourlyPanel& transformed, Series s) {
    auto [x, rows] = finite_rows(raw.column(s));
    auto [z, zrows] = finite_rows(transformed.column(s));
    if (x.size() < 30 || z.size() < 30) {
        throw PreconditionError("test: series " + std::string(series_name(s)) + " has fewer than 30 values");
    }
    auto m = stats::moments(x);
    Json summary = {{"n", x.size()},
                    {"mean", m.mean},
                    {"std", m.std},
                    {"skewness", m.skewness},
                    {"min", *std::min_element(x.begin(), x.end())},
                    {"max", *std::max_element(x.begin(), x.end())}};

    Eigen::MatrixXd hod = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(zrows.size()), 23);
    for (std::size_t i = 0; i < zrows.size(); ++i) {
        unsigned h = hour_of_day(transformed.hour(zrows[i]));
        if (h > 0) hod(static_cast<Eigen::Index>(i), h - 1) = 1.0;
    }
    return {{"series", series_name(s)},
            {"raw", summary},
            {"jarque_bera", serialize::to_json(stats::jarque_bera(z))},
            {"adf", serialize::to_json(stats::adf_test(z))},
            {"breusch_pagan", serialize::to_json(stats::breusch_pagan(z, hod))},
            {"durbin_watson", serialize::to_json(stats::durbin_watson(z))}};
}

Json correlations(const HourlyPanel& transformed, const RunConfig& config) {
    Json out = Json::array();
    auto hours = [](HourWindow w) {
        std::set<unsigned> h;
        for (unsigned k = w.begin; k < w.end; ++k) h.insert(k);
        return h;
    };
    const std::vector<std::pair<std::string, std::set<unsigned>>> windows = {
        {"all", {}}, {"day", hours(config.mask.day)}, {"peak", hours(config.mask.peak)}};
    for (Series s : kExog) {
        for (long lag : config.correlation_lags) {
            for (const auto& [label, set] : windows) {
                stats::CorrelationWindow w;
                w.hours = set;
                w.lag = lag;
                auto r = stats::windowed_correlation(transformed, Series::miner_mw, s, w);
                Json j = serialize::to_json(r);
                j["x"] = series_name(Series::miner_mw);
                j["y"] = series_name(s);
                j["lag"] = lag;
                j["window"] = label;
                out.push_back(std::move(j));
            }
        }
    }
    return out;
}

/// 4CP intervals for every year whose June-September hours are all present.
Json fourcp(const HourlyPanel& panel) {
    Json out = Json::array();
    if (panel.empty()) return out;
    int first = year_of(day_of(panel.start));
    int last = year_of(day_of(panel.end() - 1));
    for (int y = first; y <= last; ++y) {
        auto a = panel.index_of(make_hour(y, 6, 1, 0));
        auto b = panel.index_of(make_hour(y, 9, 30, 23));
        if (!a || !b) continue;
        HourlyPanel summer = slice(panel, panel.hour(*a), panel.hour(*b + 1));
        for (const auto& c : indicators::find_4cp_intervals(indicators::system_load(summer), y)) {
            out.push_back(serialize::to_json(c));
        }
    }
    return out;
}

drmodel::DemandModel load_model(const RunConfig& config) {
    if (!config.model || config.model->string() == "reference_model") return drmodel::reference_model(config.season);
    return serialize::model_from_json(serialize::read_file(*config.model));
}

Day default_start(Season s) { return s == Season::summer ? make_day(2022, 6, 1) : make_day(2022, 1, 1); }

std::optional<Json> read_optional(const fs::path& p) {
    if (!fs::exists(p)) return std::nullopt;
    return serialize::read_file(p);
}

// Plot-ready series.

std::string histogram_csv(std::span<const double> values, std::size_t bins) {
    auto [x, rows] = finite_rows(values);
    std::ostringstream os;
    os << "bin_low,bin_high,count\n";
    if (x.empty()) return os.str();
    double lo = *std::min_element(x.begin(), x.end());
    double hi = *std::max_element(x.begin(), x.end());
    double width = hi > lo ? (hi - lo) / static_cast<double>(bins) : 1.0;
    std::vector<std::size_t> count(bins, 0);
    for (double v : x) {
        auto k = static_cast<std::size_t>((v - lo) / width);
        ++count[std::min(k, bins - 1)];
    }
    for (std::size_t k = 0; k < bins; ++k) {
        os << num(lo + width * static_cast<double>(k)) << ',' << num(lo + width * static_cast<double>(k + 1)) << ','
           << count[k] << '\n';
    }
    return os.str();
}

std::string qq_csv(std::span<const double> values, std::size_t points) {
    auto [x, rows] = finite_rows(values);
    std::sort(x.begin(), x.end());
    std::ostringstream os;
    os << "theoretical,sample\n";
    const std::size_t n = x.size();
    const std::size_t m = std::min(points, n);
    for (std::size_t k = 0; k < m; ++k) {
        std::size_t i = m == n ? k : (k * (n - 1)) / (m - 1);
        double p = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
        os << num(dist::normal_quantile(p)) << ',' << num(x[i]) << '\n';
    }
    return os.str();
}

std::string scatter_csv(std::span<const double> x, std::span<const double> y) {
    std::ostringstream os;
    os << "x,y\n";
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (std::isfinite(x[i]) && std::isfinite(y[i])) os << num(x[i]) << ',' << num(y[i]) << '\n';
    }
    return os.str();
}

std::string correlogram_csv(std::span<const double> values, std::size_t max_lag) {
    auto [x, rows] = finite_rows(values);
    max_lag = std::min(max_lag, x.size() / 4);
    auto r = stats::acf(x, max_lag);
    auto p = stats::pacf(x, max_lag);
    auto rs = x.size() > 24 + max_lag ? stats::acf(x, max_lag, 24) : std::vector<double>{};
    std::ostringstream os;
    os << "lag,acf,pacf,acf_seasonal_diff\n";
    for (std::size_t k = 0; k <= max_lag; ++k) {
        os << k << ',' << num(r[k]) << ',' << num(p[k]) << ',' << (k < rs.size() ? num(rs[k]) : std::string()) << '\n';
    }
    return os.str();
}

struct Predictions {
    std::vector<std::string> stamp, split;
    std::vector<double> observed, deterministic, combined, residual, innovation;
};

Predictions read_predictions(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    Predictions p;
    std::string line;
    std::getline(in, line);
    auto cell = [](const std::string& s) { return text::parse_double(s).value_or(std::nan("")); };
    while (std::getline(in, line)) {
        auto f = text::split_csv(line);
        if (f.size() != 7) throw DataError(path.string() + ": expected 7 columns");
        p.stamp.push_back(f[0]);
        p.split.push_back(f[1]);
        p.observed.push_back(cell(f[2]));
        p.deterministic.push_back(cell(f[3]));
        p.combined.push_back(cell(f[4]));
        p.residual.push_back(cell(f[5]));
        p.innovation.push_back(cell(f[6]));
    }
    return p;
}

}  // namespace

void run_ingest(const RunConfig& config) {
    if (config.inputs.empty()) throw PreconditionError("ingest needs config key 'inputs'");
    SchemaMap schema;
    if (config.schema) schema = read_schema(*config.schema);
    auto loaded = load_panel(config.inputs, schema);
    const auto& p = loaded.panel;

    Json missing = Json::array(), dups = Json::array(), series = Json::array();
    for (Hour h : loaded.gaps.missing) missing.push_back(format_hour(h));
    for (Hour h : loaded.gaps.dropped_duplicates) dups.push_back(format_hour(h));
    for (Series s : kCore) series.push_back(series_name(s));
    if (p.has(Series::btc_usd)) series.push_back(series_name(Series::btc_usd));
    Json gaps = {{"format", "minerdr.gaps.v1"},
                 {"start", format_hour(p.start)},
                 {"end", format_hour(p.end())},
                 {"hours", p.size()},
                 {"complete_days", complete_days(p).size()},
                 {"series", series},
                 {"missing", missing},
                 {"dropped_duplicates", dups}};

    Staging out(config.out, "ingest");
    out.write("panel.csv", panel_text(p));
    out.write("gaps.json", serialize::dump(gaps));
    out.commit();
}

void run_transform(const RunConfig& config) {
    auto panel = load(require(config.panel, "panel", "transform"));
    auto set = transform::fit_panel(panel, config.trend_window_days);
    Staging out(config.out, "transform");
    out.write("transform.json", serialize::dump(serialize::to_json(set)));
    out.write("transformed.csv", panel_text(set.apply(panel)));
    out.commit();
}

void run_test(const RunConfig& config) {
    auto panel = load(require(config.panel, "panel", "test"));
    auto set = config.transform ? load_transforms(*config.transform)
                                : transform::fit_panel(panel, config.trend_window_days);
    auto tp = set.apply(panel);

    Json battery = Json::array();
    for (Series s : kCore) battery.push_back(series_battery(panel, tp, s));
    Json doc = {{"format", "minerdr.test.v1"},
                {"transform_source", config.transform ? "file" : "fitted"},
                {"series", battery},
                {"correlations", correlations(tp, config)},
                {"fourcp", fourcp(panel)}};
    if (panel.has(Series::btc_usd)) {
        Json rsi = Json::array();
        for (const auto& r : indicators::rsi_correlation_study(panel, config.rsi_windows, config.trend_window_days)) {
            Json j = serialize::to_json(r.result);
            j["window_days"] = r.window;
            rsi.push_back(std::move(j));
        }
        doc["rsi"] = rsi;
    }
    Staging out(config.out, "test");
    out.write("test.json", serialize::dump(doc));
    out.commit();
}

void run_fit(const RunConfig& config) {
    auto panel = load(require(config.panel, "panel", "fit"));
    auto set = config.transform ? load_transforms(*config.transform)
                                : transform::fit_panel(panel, config.trend_window_days);
    auto rep = drmodel::fit_demand_model(panel, config.season, set, config.fit_config());

    std::ostringstream pred;
    pred << "timestamp,split,observed_mw,deterministic_mw,combined_mw,regression_residual,innovation\n";
    for (std::size_t i = 0; i < rep.observed.size(); ++i) {
        Hour h = rep.start + static_cast<std::int64_t>(i);
        if (!std::isfinite(rep.observed[i])) continue;
        pred << format_hour(h) << ',' << (rep.test_rows[i] ? "test" : "train") << ',' << num(rep.observed[i]) << ','
             << num(rep.deterministic[i]) << ',' << num(rep.combined[i]) << ',' << num(rep.staged.residuals[i]) << ','
             << num(rep.innovations[i]) << '\n';
    }
    Json fit = serialize::to_json(rep);
    fit["format"] = "minerdr.fit.v1";

    Staging out(config.out, "fit");
    out.write("model.json", serialize::dump(serialize::to_json(rep.model)));
    out.write("fit.json", serialize::dump(fit));
    out.write("predictions.csv", pred.str());
    out.commit();
}

void run_simulate(const RunConfig& config) {
    if (!config.seed) throw PreconditionError("simulate needs a seed (--seed or config key 'seed')");
    auto model = load_model(config);
    const std::size_t warm = drmodel::warmup_days(model);
    const std::uint64_t scenario_seed = *config.seed;
    const std::uint64_t generator_seed = *config.seed + 1;

    HourlyPanel scenario;
    std::string source;
    if (config.panel) {
        scenario = load(*config.panel);
        source = "panel";
    } else {
        Day first = config.start.value_or(default_start(model.season));
        Hour begin = first_hour(first) - static_cast<std::int64_t>(warm * 24);
        scenario = drmodel::make_scenario(begin, (warm + config.days) * 24, scenario_seed, model.transforms,
                                          config.scenario);
        source = "generated";
    }
    auto synth = drmodel::generate_synthetic(model, scenario, config.days, generator_seed, config.synthetic);

    auto m = stats::moments(synth.miner_mw);
    Json doc = {{"format", "minerdr.simulation.v1"},
                {"season", season_name(model.season)},
                {"model", config.model ? config.model->string() : "reference_model"},
                {"scenario", source},
                {"seed", *config.seed},
                {"generator_seed", generator_seed},
                {"days", config.days},
                {"warmup_days", warm},
                {"start", format_hour(synth.start)},
                {"dynamics", config.synthetic.dynamics == drmodel::ResidualDynamics::stationary_core ? "stationary_core"
                                                                                                   : "integrated"},
                {"scale", config.synthetic.scale == drmodel::ResidualScale::unit_variance ? "unit_variance"
                                                                                            : "model_sigma"},
                {"miner_mw",
                 {{"mean", m.mean},
                  {"std", m.std},
                  {"min", *std::min_element(synth.miner_mw.begin(), synth.miner_mw.end())},
                  {"max", *std::max_element(synth.miner_mw.begin(), synth.miner_mw.end())}}}};

    Staging out(config.out, "simulate");
    out.write("synthetic.csv", panel_text(synth));
    out.write("simulation.json", serialize::dump(doc));
    out.commit();
}

void run_report(const RunConfig& config) {
    const fs::path& dir = config.out;
    auto fit = read_optional(dir / "fit.json");
    auto test = read_optional(dir / "test.json");
    auto gaps = read_optional(dir / "gaps.json");
    auto sim = read_optional(dir / "simulation.json");
    fs::path panel_path = config.panel.value_or(dir / "panel.csv");
    fs::path transform_path = config.transform.value_or(dir / "transform.json");
    bool have_panel = fs::exists(panel_path) && fs::exists(transform_path);
    bool have_predictions = fs::exists(dir / "predictions.csv");
    if (!fit && !test && !gaps && !sim && !have_panel) {
        throw PreconditionError("report: no artifacts found in " + dir.string() +
                                " (run ingest, transform, test, fit or simulate first)");
    }

    Json doc = {{"format", serialize::kReportFormat}, {"version", kVersion}};
    Json artifacts = Json::array();
    if (fit) {
        serialize::expect_format(*fit, "minerdr.fit.v1");
        artifacts.push_back("fit");
        for (const auto& [k, v] : fit->items()) {
            if (k != "format") doc[k] = v;
        }
    }
    if (test) {
        serialize::expect_format(*test, "minerdr.test.v1");
        artifacts.push_back("test");
        Json t = *test;
        t.erase("format");
        doc["tests"] = t;
    }
    if (gaps) {
        serialize::expect_format(*gaps, "minerdr.gaps.v1");
        artifacts.push_back("ingest");
        doc["ingest"] = {{"start", (*gaps)["start"]},
                         {"end", (*gaps)["end"]},
                         {"hours", (*gaps)["hours"]},
                         {"complete_days", (*gaps)["complete_days"]},
                         {"missing_hours", (*gaps)["missing"].size()},
                         {"dropped_duplicates", (*gaps)["dropped_duplicates"].size()}};
    }
    if (sim) {
        serialize::expect_format(*sim, "minerdr.simulation.v1");
        artifacts.push_back("simulation");
        Json s = *sim;
        s.erase("format");
        doc["simulation"] = s;
    }

    Staging out(dir, "report");
    Json plots = Json::array();
    auto plot = [&](const std::string& name, const std::string& kind, const std::string& content) {
        out.write("plots/" + name + ".csv", content);
        plots.push_back({{"name", name}, {"kind", kind}, {"file", "plots/" + name + ".csv"}});
    };
    if (have_panel) {
        artifacts.push_back("panel");
        auto panel = load(panel_path);
        auto tp = load_transforms(transform_path).apply(panel);
        for (Series s : kCore) {
            std::string n(series_name(s));
            plot("hist_raw_" + n, "histogram", histogram_csv(panel.column(s), 40));
            plot("hist_transformed_" + n, "histogram", histogram_csv(tp.column(s), 40));
            plot("qq_" + n, "qq", qq_csv(tp.column(s), 500));
            if (s != Series::miner_mw) plot("scatter_" + n + "_miner_mw", "scatter", scatter_csv(tp.column(s), tp.miner_mw));
        }
    }
    if (have_predictions) {
        auto p = read_predictions(dir / "predictions.csv");
        std::ostringstream ts;
        ts << "timestamp,observed_mw,deterministic_mw,combined_mw\n";
        for (std::size_t i = 0; i < p.stamp.size(); ++i) {
            if (p.split[i] != "test") continue;
            ts << p.stamp[i] << ',' << num(p.observed[i]) << ',' << num(p.deterministic[i]) << ','
               << num(p.combined[i]) << '\n';
        }
        plot("fit_test_series", "timeseries", ts.str());
        plot("correlogram_regression_residual", "correlogram", correlogram_csv(p.residual, 72));
        plot("correlogram_innovation", "correlogram", correlogram_csv(p.innovation, 72));
    }
    doc["artifacts"] = artifacts;
    doc["plots"] = plots;
    out.write("report.json", serialize::dump(serialize::rounded(doc)));
    out.commit();
}

}  // namespace minerdr::cli
