#include "minerdr/serialize.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "minerdr/error.hpp"

namespace minerdr::serialize {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Json num(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

Json nums(std::span<const double> xs) {
    Json a = Json::array();
    for (double x : xs) a.push_back(num(x));
    return a;
}

double get_num(const Json& j) {
    if (j.is_null()) return kNaN;
    if (!j.is_number()) throw DataError("expected a number, found " + std::string(j.type_name()));
    return j.get<double>();
}

std::vector<double> get_nums(const Json& j) {
    if (!j.is_array()) throw DataError("expected an array of numbers");
    std::vector<double> out;
    out.reserve(j.size());
    for (const auto& x : j) out.push_back(get_num(x));
    return out;
}

const Json& field(const Json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end()) throw DataError(std::string("missing field '") + key + "'");
    return *it;
}

Series series_from(const Json& j) {
    auto s = parse_series(j.get<std::string>());
    if (!s) throw DataError("unknown series '" + j.get<std::string>() + "'");
    return *s;
}

Gate gate_from(const Json& j) {
    auto g = parse_gate(j.get<std::string>());
    if (!g) throw DataError("unknown gate '" + j.get<std::string>() + "'");
    return *g;
}

Season season_from(const Json& j) {
    auto s = parse_season(j.get<std::string>());
    if (!s) throw DataError("unknown season '" + j.get<std::string>() + "'");
    return *s;
}

Json window_json(const HourWindow& w) { return Json::array({w.begin, w.end}); }

HourWindow window_from(const Json& j) {
    if (!j.is_array() || j.size() != 2) throw DataError("hour window must be [begin, end]");
    return HourWindow{j[0].get<unsigned>(), j[1].get<unsigned>()};
}

Json column_json(const regress::Column& c) {
    return {{"source", series_name(c.source)}, {"gate", gate_name(c.gate)}, {"lag", c.lag}, {"name", c.name()}};
}

Json columns_json(const std::vector<regress::Column>& cs) {
    Json a = Json::array();
    for (const auto& c : cs) a.push_back(column_json(c));
    return a;
}

double round_sig(double x, int digits) {
    if (x == 0.0 || !std::isfinite(x)) return x;
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.*e", digits - 1, x);
    return std::strtod(buf, nullptr);
}

}  // namespace

Json to_json(const transform::FittedTransform& t) {
    Json steps = Json::array();
    for (auto s : t.steps) steps.push_back(step_name(s));
    Json j = {{"steps", steps}};
    j["quantiles"] = {{"values", nums(t.quantiles.values)}, {"z", nums(t.quantiles.z)}};
    Json bins = Json::array();
    for (std::size_t b = 0; b < transform::kBinCount; ++b) {
        if (!t.bins[b]) {
            bins.push_back(nullptr);
            continue;
        }
        bins.push_back({{"bin", transform::bin_label(b)},
                        {"mean", num(t.bins[b]->mean)},
                        {"std", num(t.bins[b]->std)},
                        {"count", t.bins[b]->count}});
    }
    j["bins"] = bins;
    if (t.trend) {
        j["trend"] = {{"first_day", format_day(t.trend->first_day)},
                      {"window_days", t.trend->window_days},
                      {"values", nums(t.trend->values)}};
    } else {
        j["trend"] = nullptr;
    }
    return j;
}

transform::FittedTransform fitted_transform_from_json(const Json& j) {
    transform::FittedTransform t;
    for (const auto& s : field(j, "steps")) {
        auto name = s.get<std::string>();
        if (name == "trend") {
            t.steps.push_back(transform::Step::trend);
        } else if (name == "gaussianize") {
            t.steps.push_back(transform::Step::gaussianize);
        } else if (name == "standardize") {
            t.steps.push_back(transform::Step::standardize);
        } else {
            throw DataError("unknown transform step '" + name + "'");
        }
    }
    const auto& q = field(j, "quantiles");
    t.quantiles.values = get_nums(field(q, "values"));
    t.quantiles.z = get_nums(field(q, "z"));
    if (t.quantiles.values.size() != t.quantiles.z.size() || t.quantiles.values.size() < 2) {
        throw DataError("quantile map needs matching value and score arrays of length >= 2");
    }
    for (std::size_t i = 1; i < t.quantiles.z.size(); ++i) {
        if (!(t.quantiles.z[i] > t.quantiles.z[i - 1]) || t.quantiles.values[i] < t.quantiles.values[i - 1]) {
            throw DataError("quantile map is not monotone at entry " + std::to_string(i));
        }
    }
    const auto& bins = field(j, "bins");
    if (!bins.is_array() || bins.size() != transform::kBinCount) {
        throw DataError("bins must be an array of " + std::to_string(transform::kBinCount) + " entries");
    }
    for (std::size_t b = 0; b < transform::kBinCount; ++b) {
        if (bins[b].is_null()) continue;
        transform::BinStat s{get_num(field(bins[b], "mean")), get_num(field(bins[b], "std")),
                             field(bins[b], "count").get<std::size_t>()};
        if (!(s.std > 0.0) || !std::isfinite(s.mean)) throw DataError("bin " + transform::bin_label(b) + " is invalid");
        t.bins[b] = s;
    }
    const auto& tr = field(j, "trend");
    if (!tr.is_null()) {
        transform::TrendCurve c;
        auto d = parse_day(field(tr, "first_day").get<std::string>());
        if (!d) throw DataError("trend first_day is not a YYYY-MM-DD date");
        c.first_day = *d;
        c.window_days = field(tr, "window_days").get<int>();
        c.values = get_nums(field(tr, "values"));
        for (double v : c.values) {
            if (!(v > 0.0)) throw DataError("trend values must be positive");
        }
        t.trend = std::move(c);
    }
    return t;
}

Json to_json(const transform::TransformSet& set) {
    Json series = Json::object();
    for (const auto& [s, t] : set.series) series[std::string(series_name(s))] = to_json(t);
    return {{"format", kTransformFormat}, {"series", series}};
}

transform::TransformSet transform_set_from_json(const Json& j) {
    expect_format(j, kTransformFormat);
    transform::TransformSet set;
    for (const auto& [name, t] : field(j, "series").items()) {
        auto s = parse_series(name);
        if (!s) throw DataError("unknown series '" + name + "' in transform file");
        try {
            set.series[*s] = fitted_transform_from_json(t);
        } catch (const Error& e) {
            throw DataError("transform for " + name + ": " + e.what());
        }
    }
    return set;
}

Json to_json(const sarima::SarimaOrder& o) {
    return {{"p", o.p}, {"d", o.d}, {"q", o.q}, {"P", o.P}, {"D", o.D}, {"Q", o.Q}, {"S", o.S}, {"label", o.label()}};
}

sarima::SarimaOrder sarima_order_from_json(const Json& j) {
    sarima::SarimaOrder o{field(j, "p").get<int>(), field(j, "d").get<int>(), field(j, "q").get<int>(),
                          field(j, "P").get<int>(), field(j, "D").get<int>(), field(j, "Q").get<int>(),
                          field(j, "S").get<int>()};
    try {
        o.validate();
    } catch (const Error& e) {
        throw DataError(e.what());
    }
    return o;
}

Json to_json(const sarima::SarimaFit& f) {
    Json coefs = Json::object();
    auto names = f.parameter_names();
    auto values = f.params.coefficients();
    values.push_back(f.params.sigma);
    Json params = Json::array();
    for (std::size_t i = 0; i < names.size(); ++i) {
        params.push_back({{"name", names[i]},
                          {"value", num(values[i])},
                          {"se", i < f.se.size() ? num(f.se[i]) : Json(nullptr)},
                          {"p_value", i < f.p_values.size() ? num(f.p_values[i]) : Json(nullptr)}});
    }
    return {{"order", to_json(f.order)},
            {"phi", nums(f.params.phi)},
            {"theta", nums(f.params.theta)},
            {"Phi", nums(f.params.Phi)},
            {"Theta", nums(f.params.Theta)},
            {"sigma", num(f.params.sigma)},
            {"se", nums(f.se)},
            {"p_values", nums(f.p_values)},
            {"parameters", params},
            {"aic", num(f.aic)},
            {"loglik", num(f.loglik)},
            {"css", num(f.css)},
            {"n_eff", f.n_eff},
            {"condition_start", f.condition_start},
            {"converged", f.converged},
            {"evaluations", f.evaluations}};
}

sarima::SarimaFit sarima_fit_from_json(const Json& j) {
    sarima::SarimaFit f;
    f.order = sarima_order_from_json(field(j, "order"));
    f.params.phi = get_nums(field(j, "phi"));
    f.params.theta = get_nums(field(j, "theta"));
    f.params.Phi = get_nums(field(j, "Phi"));
    f.params.Theta = get_nums(field(j, "Theta"));
    f.params.sigma = get_num(field(j, "sigma"));
    if (static_cast<int>(f.params.phi.size()) != f.order.p || static_cast<int>(f.params.theta.size()) != f.order.q ||
        static_cast<int>(f.params.Phi.size()) != f.order.P || static_cast<int>(f.params.Theta.size()) != f.order.Q) {
        throw DataError("SARIMA coefficient counts do not match order " + f.order.label());
    }
    if (!(f.params.sigma > 0.0)) throw DataError("SARIMA sigma must be positive");
    f.se = get_nums(field(j, "se"));
    f.p_values = get_nums(field(j, "p_values"));
    f.aic = get_num(j.value("aic", Json(nullptr)));
    f.loglik = get_num(j.value("loglik", Json(nullptr)));
    f.css = get_num(j.value("css", Json(nullptr)));
    f.n_eff = j.value("n_eff", std::size_t{0});
    f.condition_start = j.value("condition_start", f.order.condition_length());
    f.converged = j.value("converged", true);
    f.evaluations = j.value("evaluations", 0);
    return f;
}

Json to_json(const drmodel::DemandModel& m) {
    Json terms = Json::array();
    for (const auto& t : m.terms) {
        Json c = column_json(t.column);
        c["coef"] = num(t.coef);
        c["se"] = num(t.se);
        c["p_value"] = num(t.p_value);
        c["stage"] = t.stage;
        terms.push_back(c);
    }
    return {{"format", kModelFormat},
            {"season", season_name(m.season)},
            {"mask",
             {{"day", window_json(m.mask.day)}, {"peak", window_json(m.mask.peak)}, {"fourcp", window_json(m.mask.fourcp)}}},
            {"terms", terms},
            {"sarima", to_json(m.sarima)},
            {"transforms", to_json(m.transforms)}};
}

drmodel::DemandModel model_from_json(const Json& j) {
    expect_format(j, kModelFormat);
    drmodel::DemandModel m;
    try {
        m.season = season_from(field(j, "season"));
        const auto& mask = field(j, "mask");
        m.mask.season = m.season;
        m.mask.day = window_from(field(mask, "day"));
        m.mask.peak = window_from(field(mask, "peak"));
        m.mask.fourcp = window_from(field(mask, "fourcp"));
        for (const auto& t : field(j, "terms")) {
            drmodel::Term term;
            term.column = regress::Column{series_from(field(t, "source")), gate_from(field(t, "gate")),
                                          field(t, "lag").get<int>()};
            if (term.column.lag < 0) throw DataError("term lags must be nonnegative");
            term.coef = get_num(field(t, "coef"));
            term.se = get_num(field(t, "se"));
            term.p_value = get_num(t.value("p_value", Json(nullptr)));
            term.stage = t.value("stage", std::string());
            m.terms.push_back(std::move(term));
        }
        m.sarima = sarima_fit_from_json(field(j, "sarima"));
        m.transforms = transform_set_from_json(field(j, "transforms"));
        m.validate();
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("model file: ") + e.what());
    } catch (const PreconditionError& e) {
        throw DataError(std::string("model file: ") + e.what());
    }
    return m;
}

Json to_json(const stats::TestReport& r) {
    Json extras = Json::object();
    for (const auto& [k, v] : r.extras) extras[k] = num(v);
    return {{"name", r.name},
            {"statistic", num(r.statistic)},
            {"p_value", r.p_value ? num(*r.p_value) : Json(nullptr)},
            {"df_or_lags", r.df_or_lags},
            {"decision_note", r.decision_note},
            {"extras", extras}};
}

Json to_json(const stats::CorrelationResult& r) {
    return {{"r", num(r.r)}, {"p_value", num(r.p_value)}, {"n", r.n}, {"window_note", r.window_note}};
}

Json to_json(const regress::StepResult& r) {
    Json coefs = Json::array();
    for (std::size_t i = 0; i < r.columns.size(); ++i) {
        Json c = column_json(r.columns[i]);
        c["coef"] = num(r.coefficients[i]);
        c["se"] = num(r.se[i]);
        c["t_value"] = num(r.t_values[i]);
        c["p_value"] = num(r.p_values[i]);
        coefs.push_back(c);
    }
    return {{"stage", r.stage},
            {"coefficients", coefs},
            {"sigma2", num(r.sigma2)},
            {"n", r.n},
            {"train_mse", num(r.train_mse)},
            {"test_mse", num(r.test_mse)},
            {"pruned", columns_json(r.pruned)},
            {"warnings", r.warnings}};
}

Json to_json(const regress::FitMetrics& m) {
    return {{"mse", num(m.mse)},
            {"rmse", num(m.rmse)},
            {"mape", num(m.mape)},
            {"mape_excluded", m.mape_excluded},
            {"r_squared", num(m.r_squared)},
            {"r_squared_iqr75", num(m.r_squared_iqr75)},
            {"n", m.n}};
}

Json to_json(const indicators::CpInterval& c) {
    return {{"month", c.month},
            {"start", format_minute(c.start)},
            {"duration_minutes", c.duration_minutes},
            {"load_mw", num(c.load_mw)}};
}

Json to_json(const sarima::Selection& s) {
    Json table = Json::array();
    for (const auto& c : s.table) {
        table.push_back({{"order", c.order.label()},
                         {"aic", c.aic ? num(*c.aic) : Json(nullptr)},
                         {"error", c.error.empty() ? Json(nullptr) : Json(c.error)}});
    }
    return {{"selected", s.order.label()}, {"candidates", table}};
}

Json to_json(const drmodel::FitReport& r) {
    Json stages = Json::array();
    for (const auto& s : r.staged.steps) stages.push_back(to_json(s));
    Json removed = Json::array();
    for (Day d : r.removed_days) removed.push_back(format_day(d));
    Json sar = to_json(r.model.sarima);
    sar["selection"] = to_json(r.selection);
    return {{"season", season_name(r.model.season)},
            {"days", r.days},
            {"train_days", r.train_days},
            {"test_days", r.test_days},
            {"removed_days", removed},
            {"stages", stages},
            {"sarima", sar},
            {"metrics",
             {{"deterministic", to_json(r.deterministic_metrics)},
              {"combined", to_json(r.combined_metrics)},
              {"sarima_test_mse", num(r.sarima_test_mse)}}},
            {"diagnostics",
             Json::array({to_json(r.ljung_box), to_json(r.adf), to_json(r.breusch_pagan), to_json(r.durbin_watson)})}};
}

Json rounded(const Json& j, int digits) {
    if (j.is_number_float()) return round_sig(j.get<double>(), digits);
    if (j.is_array()) {
        Json a = Json::array();
        for (const auto& x : j) a.push_back(rounded(x, digits));
        return a;
    }
    if (j.is_object()) {
        Json o = Json::object();
        for (const auto& [k, v] : j.items()) o[k] = rounded(v, digits);
        return o;
    }
    return j;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

Json read_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

void expect_format(const Json& j, std::string_view format) {
    if (!j.is_object() || !j.contains("format") || !j["format"].is_string() || j["format"].get<std::string>() != format) {
        throw DataError("expected a document with format '" + std::string(format) + "'");
    }
}

}  // namespace minerdr::serialize
