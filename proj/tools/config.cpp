#include "config.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>

#include "minerdr/error.hpp"
#include "minerdr/text.hpp"

namespace minerdr::cli {

namespace {

[[noreturn]] void bad(const std::string& key, const std::string& value, const std::string& why) {
    throw PreconditionError("config key '" + key + "' = '" + value + "': " + why);
}

double real(const std::string& key, const std::string& v) {
    auto d = text::parse_double(v);
    if (!d) bad(key, v, "expected a number");
    return *d;
}

long long integer(const std::string& key, const std::string& v, long long lo) {
    auto i = text::parse_int(v);
    if (!i) bad(key, v, "expected an integer");
    if (*i < lo) bad(key, v, "must be at least " + std::to_string(lo));
    return *i;
}

bool boolean(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    bad(key, v, "expected true or false");
}

std::vector<std::string> items(std::string_view v, char sep) {
    std::vector<std::string> out;
    for (const auto& part : text::split(v, sep)) {
        auto t = text::trim(part);
        if (!t.empty()) out.emplace_back(t);
    }
    return out;
}

HourWindow window(const std::string& key, const std::string& v) {
    auto parts = items(v, '-');
    if (parts.size() != 2) bad(key, v, "expected BEGIN-END hours");
    auto b = integer(key, parts[0], 0);
    auto e = integer(key, parts[1], 0);
    if (e > 24 || b >= e) bad(key, v, "expected 0 <= BEGIN < END <= 24");
    return {static_cast<unsigned>(b), static_cast<unsigned>(e)};
}

// `series[@gate]:lag,lag; ...`
std::vector<regress::LagSpec> lag_specs(const std::string& key, const std::string& v) {
    std::vector<regress::LagSpec> specs;
    for (const auto& item : items(v, ';')) {
        auto colon = item.find(':');
        if (colon == std::string::npos) bad(key, v, "expected series[@gate]:lags");
        std::string head(text::trim(std::string_view(item).substr(0, colon)));
        regress::LagSpec spec;
        auto at = head.find('@');
        auto series = parse_series(text::trim(std::string_view(head).substr(0, at)));
        if (!series) bad(key, v, "unknown series in '" + item + "'");
        spec.source = *series;
        if (at != std::string::npos) {
            auto gate = parse_gate(text::trim(std::string_view(head).substr(at + 1)));
            if (!gate) bad(key, v, "unknown gate in '" + item + "'");
            spec.gate = *gate;
        }
        spec.lags.clear();
        for (const auto& lag : items(std::string_view(item).substr(colon + 1), ',')) {
            spec.lags.push_back(static_cast<int>(integer(key, lag, 0)));
        }
        if (spec.lags.empty()) bad(key, v, "no lags in '" + item + "'");
        specs.push_back(std::move(spec));
    }
    if (specs.empty()) bad(key, v, "empty stage");
    return specs;
}

using Setter = std::function<void(RunConfig&, const std::string& key, const std::string& value)>;

struct KeyInfo {
    std::string help;
    Setter set;
};

const std::map<std::string, KeyInfo>& table() {
    static const std::map<std::string, KeyInfo> keys = {
        {"inputs", {"comma-separated raw CSV files (ingest)",
                    [](RunConfig& c, const std::string&, const std::string& v) {
                        c.inputs.clear();
                        for (const auto& p : items(v, ',')) c.inputs.emplace_back(p);
                    }}},
        {"schema", {"column schema map for the raw inputs",
                    [](RunConfig& c, const std::string&, const std::string& v) { c.schema = v; }}},
        {"panel", {"canonical panel CSV", [](RunConfig& c, const std::string&, const std::string& v) { c.panel = v; }}},
        {"transform", {"transform JSON", [](RunConfig& c, const std::string&, const std::string& v) { c.transform = v; }}},
        {"model", {"model JSON, or 'reference_model' for the preset",
                   [](RunConfig& c, const std::string&, const std::string& v) { c.model = v; }}},
        {"out", {"output directory", [](RunConfig& c, const std::string&, const std::string& v) { c.out = v; }}},
        {"season", {"summer or non_summer",
                    [](RunConfig& c, const std::string& k, const std::string& v) {
                        auto s = parse_season(v);
                        if (!s) bad(k, v, "expected summer or non_summer");
                        c.season = *s;
                    }}},
        {"window.day", {"day window hours, e.g. 10-20",
                        [](RunConfig& c, const std::string& k, const std::string& v) { c.mask.day = window(k, v); }}},
        {"window.peak", {"peak window hours",
                         [](RunConfig& c, const std::string& k, const std::string& v) { c.mask.peak = window(k, v); }}},
        {"window.fourcp", {"4CP window hours",
                           [](RunConfig& c, const std::string& k, const std::string& v) { c.mask.fourcp = window(k, v); }}},
        {"trend_window_days", {"rolling-peak window for miner-load detrending",
                               [](RunConfig& c, const std::string& k, const std::string& v) {
                                   c.trend_window_days = static_cast<int>(integer(k, v, 1));
                               }}},
        {"outlier_z", {"daily mean RT price z-score threshold",
                       [](RunConfig& c, const std::string& k, const std::string& v) {
                           c.outlier_z = real(k, v);
                           if (!(c.outlier_z > 0.0)) bad(k, v, "must be positive");
                       }}},
        {"train_fraction", {"share of days used for training",
                            [](RunConfig& c, const std::string& k, const std::string& v) {
                                c.train_fraction = real(k, v);
                                if (!(c.train_fraction > 0.0 && c.train_fraction < 1.0)) bad(k, v, "must be in (0, 1)");
                            }}},
        {"split_seed", {"random day split seed (earliest days train when unset)",
                        [](RunConfig& c, const std::string& k, const std::string& v) {
                            c.split_seed = static_cast<std::uint64_t>(integer(k, v, 0));
                        }}},
        {"alpha", {"significance threshold for regressor pruning",
                   [](RunConfig& c, const std::string& k, const std::string& v) {
                       c.alpha = real(k, v);
                       if (!(c.alpha > 0.0 && c.alpha < 1.0)) bad(k, v, "must be in (0, 1)");
                   }}},
        {"min_days", {"minimum season days for fitting",
                      [](RunConfig& c, const std::string& k, const std::string& v) {
                          c.min_days = static_cast<std::size_t>(integer(k, v, 1));
                      }}},
        {"ljung_box_lags", {"Ljung-Box lag count for residual diagnostics",
                            [](RunConfig& c, const std::string& k, const std::string& v) {
                                c.ljung_box_lags = static_cast<std::size_t>(integer(k, v, 1));
                            }}},
        {"fourcp_source", {"system_load or own_load for the 4CP stage",
                           [](RunConfig& c, const std::string& k, const std::string& v) {
                               if (v == "system_load") {
                                   c.fourcp_source = FourcpSource::system_load;
                               } else if (v == "own_load") {
                                   c.fourcp_source = FourcpSource::own_load;
                               } else {
                                   bad(k, v, "expected system_load or own_load");
                               }
                           }}},
        {"sarima.grid", {"candidate orders separated by ';'",
                         [](RunConfig& c, const std::string& k, const std::string& v) {
                             c.sarima_grid.clear();
                             try {
                                 for (const auto& o : items(v, ';')) c.sarima_grid.push_back(sarima::parse_order(o));
                             } catch (const Error& e) {
                                 bad(k, v, e.what());
                             }
                             if (c.sarima_grid.empty()) bad(k, v, "empty grid");
                         }}},
        {"seed", {"random seed", [](RunConfig& c, const std::string& k, const std::string& v) {
                      c.seed = static_cast<std::uint64_t>(integer(k, v, 0));
                  }}},
        {"days", {"days to simulate", [](RunConfig& c, const std::string& k, const std::string& v) {
                      c.days = static_cast<std::size_t>(integer(k, v, 1));
                  }}},
        {"start", {"first simulated day, YYYY-MM-DD",
                   [](RunConfig& c, const std::string& k, const std::string& v) {
                       auto d = parse_day(v);
                       if (!d) bad(k, v, "expected YYYY-MM-DD");
                       c.start = *d;
                   }}},
        {"scenario.temp_ar", {"hourly persistence of the temperature anomaly",
                              [](RunConfig& c, const std::string& k, const std::string& v) {
                                  c.scenario.temp_ar = real(k, v);
                                  if (!(std::abs(c.scenario.temp_ar) < 1.0)) bad(k, v, "must be in (-1, 1)");
                              }}},
        {"scenario.load_ar", {"hourly persistence of the system-load anomaly",
                              [](RunConfig& c, const std::string& k, const std::string& v) {
                                  c.scenario.load_ar = real(k, v);
                                  if (!(std::abs(c.scenario.load_ar) < 1.0)) bad(k, v, "must be in (-1, 1)");
                              }}},
        {"scenario.btc", {"add a simulated Bitcoin price column",
                          [](RunConfig& c, const std::string& k, const std::string& v) {
                              c.scenario.with_btc = boolean(k, v);
                          }}},
        {"dynamics", {"stationary_core or integrated",
                      [](RunConfig& c, const std::string& k, const std::string& v) {
                          if (v == "stationary_core") {
                              c.synthetic.dynamics = drmodel::ResidualDynamics::stationary_core;
                          } else if (v == "integrated") {
                              c.synthetic.dynamics = drmodel::ResidualDynamics::integrated;
                          } else {
                              bad(k, v, "expected stationary_core or integrated");
                          }
                      }}},
        {"scale", {"unit_variance or model_sigma",
                   [](RunConfig& c, const std::string& k, const std::string& v) {
                       if (v == "unit_variance") {
                           c.synthetic.scale = drmodel::ResidualScale::unit_variance;
                       } else if (v == "model_sigma") {
                           c.synthetic.scale = drmodel::ResidualScale::model_sigma;
                       } else {
                           bad(k, v, "expected unit_variance or model_sigma");
                       }
                   }}},
        {"threads", {"worker threads for transforming scenarios",
                     [](RunConfig& c, const std::string& k, const std::string& v) {
                         c.synthetic.threads = static_cast<unsigned>(integer(k, v, 1));
                     }}},
        {"rsi.windows", {"RSI windows in days, comma-separated",
                         [](RunConfig& c, const std::string& k, const std::string& v) {
                             c.rsi_windows.clear();
                             for (const auto& w : items(v, ',')) {
                                 c.rsi_windows.push_back(static_cast<std::size_t>(integer(k, w, 1)));
                             }
                         }}},
        {"correlation.lags", {"hour lags for price/load correlations",
                              [](RunConfig& c, const std::string& k, const std::string& v) {
                                  c.correlation_lags.clear();
                                  for (const auto& l : items(v, ',')) c.correlation_lags.push_back(integer(k, l, 0));
                              }}},
    };
    return keys;
}

}  // namespace

drmodel::FitConfig RunConfig::fit_config() const {
    drmodel::FitConfig f;
    f.train_fraction = train_fraction;
    f.split_seed = split_seed;
    f.outlier_z = outlier_z;
    f.alpha = alpha;
    f.stages = stages.empty() ? drmodel::default_stages(season) : stages;
    if (fourcp_source == FourcpSource::own_load) {
        for (auto& stage : f.stages) {
            for (auto& spec : stage.specs) {
                if (spec.gate == Gate::fourcp && spec.source == Series::system_mw) spec.source = Series::miner_mw;
            }
        }
    }
    f.sarima_grid = sarima_grid;
    f.min_days = min_days;
    f.ljung_box_lags = ljung_box_lags;
    f.mask = mask;
    f.mask.season = season;
    return f;
}

void apply_settings(RunConfig& config, const std::vector<std::pair<std::string, std::string>>& settings) {
    const auto& keys = table();
    for (const auto& [key, value] : settings) {
        if (key.starts_with("stage.")) {
            std::string name = key.substr(6);
            if (name.empty()) bad(key, value, "missing stage name");
            auto specs = lag_specs(key, value);
            auto it = std::find_if(config.stages.begin(), config.stages.end(),
                                   [&](const regress::Stage& s) { return s.name == name; });
            if (it != config.stages.end()) {
                it->specs = std::move(specs);
            } else {
                config.stages.push_back({name, std::move(specs)});
            }
            continue;
        }
        auto it = keys.find(key);
        if (it == keys.end()) throw PreconditionError("unknown config key '" + key + "'");
        it->second.set(config, key, value);
    }
    config.mask.season = config.season;
    config.mask.validate();
}

std::pair<std::string, std::string> parse_assignment(const std::string& text) {
    auto eq = text.find('=');
    if (eq == std::string::npos) throw PreconditionError("expected key=value, got '" + text + "'");
    std::string key(text::trim(std::string_view(text).substr(0, eq)));
    std::string value(text::trim(std::string_view(text).substr(eq + 1)));
    if (key.empty()) throw PreconditionError("expected key=value, got '" + text + "'");
    return {key, value};
}

std::vector<std::pair<std::string, std::string>> read_settings(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open config " + path.string());
    std::vector<std::pair<std::string, std::string>> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        if (text::trim(line).empty()) continue;
        try {
            out.push_back(parse_assignment(line));
        } catch (const Error& e) {
            throw DataError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

const std::vector<std::pair<std::string, std::string>>& known_keys() {
    static const auto list = [] {
        std::vector<std::pair<std::string, std::string>> v;
        for (const auto& [k, info] : table()) v.emplace_back(k, info.help);
        v.emplace_back("stage.<name>", "regressor stage, e.g. rt_price@day:1,24; temp_f:0");
        return v;
    }();
    return list;
}

}  // namespace minerdr::cli
