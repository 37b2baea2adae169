#include "minerdr/panel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "minerdr/error.hpp"
#include "minerdr/text.hpp"

namespace minerdr {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

constexpr std::array<Series, 6> kAllSeries = {Series::rt_price,  Series::da_price,
                                              Series::system_mw, Series::temp_f,
                                              Series::miner_mw,  Series::btc_usd};

bool is_core(Series s) { return s != Series::btc_usd; }

// One parsed input file: series role -> (hour -> value).
struct FileColumns {
    std::filesystem::path path;
    std::map<Series, std::map<std::int64_t, double>> values;
    Hour first{std::numeric_limits<std::int64_t>::max()};
    Hour last{std::numeric_limits<std::int64_t>::min()};
    std::vector<Hour> dropped_duplicates;
    bool daily = false;
};

FileColumns read_file(const std::filesystem::path& path, const SchemaMap& schema) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw DataError(path.string() + ": empty file");
    auto header = text::split_csv(line);
    for (auto& h : header) h = std::string(text::trim(h));

    auto source_of = [&](std::string_view canonical) {
        auto it = schema.find(canonical);
        return it == schema.end() ? std::string(canonical) : it->second;
    };
    auto column_index = [&](const std::string& name) -> std::optional<std::size_t> {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) return std::nullopt;
        return static_cast<std::size_t>(it - header.begin());
    };

    auto ts_col = column_index(source_of("timestamp"));
    if (!ts_col) throw DataError(path.string() + ": no timestamp column '" + source_of("timestamp") + "'");

    std::vector<std::pair<Series, std::size_t>> cols;
    for (Series s : kAllSeries) {
        if (auto idx = column_index(source_of(series_name(s)))) cols.emplace_back(s, *idx);
    }
    if (cols.empty()) throw DataError(path.string() + ": no recognised series columns");

    FileColumns fc;
    fc.path = path;
    for (auto& [s, idx] : cols) fc.values[s];
    std::set<std::int64_t> seen;
    std::size_t row = 1;
    bool first_row = true;
    while (std::getline(in, line)) {
        ++row;
        if (text::trim(line).empty()) continue;
        auto fields = text::split_csv(line);
        auto where = [&] { return path.string() + ": row " + std::to_string(row); };
        if (fields.size() != header.size()) throw DataError(where() + ": expected " +
                                                            std::to_string(header.size()) +
                                                            " fields, got " + std::to_string(fields.size()));
        auto stamp = text::trim(fields[*ts_col]);
        std::vector<Hour> hours;
        if (stamp.size() == 10) {
            auto day = parse_day(stamp);
            if (!day) throw DataError(where() + ": unparseable timestamp '" + std::string(stamp) + "'");
            if (first_row) fc.daily = true;
            if (!fc.daily) throw DataError(where() + ": mixed daily and hourly timestamps");
            for (int h = 0; h < 24; ++h) hours.push_back(first_hour(*day) + h);
        } else {
            auto hour = parse_hour(stamp);
            if (!hour) throw DataError(where() + ": unparseable timestamp '" + std::string(stamp) + "'");
            if (fc.daily) throw DataError(where() + ": mixed daily and hourly timestamps");
            hours.push_back(*hour);
        }
        first_row = false;

        if (!seen.insert(hours.front().value).second) {
            if (!fc.daily && is_dst_fallback_hour(hours.front())) {
                fc.dropped_duplicates.push_back(hours.front());
                continue;
            }
            throw DataError(where() + ": duplicate timestamp " + std::string(stamp));
        }
        for (auto& [s, idx] : cols) {
            auto token = text::trim(fields[idx]);
            if (token.empty()) continue;
            auto v = text::parse_double(token);
            if (!v || !std::isfinite(*v)) {
                throw DataError(where() + ": unparseable value '" + std::string(token) + "' in column " +
                                header[idx]);
            }
            for (Hour h : hours) fc.values[s][h.value] = *v;
        }
        fc.first = std::min(fc.first, hours.front());
        fc.last = std::max(fc.last, hours.back());
    }
    if (seen.empty()) throw DataError(path.string() + ": no data rows");
    return fc;
}

}  // namespace

std::string_view series_name(Series s) {
    switch (s) {
        case Series::rt_price: return "rt_price";
        case Series::da_price: return "da_price";
        case Series::system_mw: return "system_mw";
        case Series::temp_f: return "temp_f";
        case Series::miner_mw: return "miner_mw";
        case Series::btc_usd: return "btc_usd";
    }
    return "?";
}

std::optional<Series> parse_series(std::string_view name) {
    for (Series s : kAllSeries) {
        if (series_name(s) == name) return s;
    }
    return std::nullopt;
}

bool HourlyPanel::has(Series s) const {
    return s == Series::btc_usd ? !btc_usd.empty() : true;
}

std::span<const double> HourlyPanel::column(Series s) const {
    return const_cast<HourlyPanel*>(this)->column(s);
}

std::vector<double>& HourlyPanel::column(Series s) {
    switch (s) {
        case Series::rt_price: return rt_price;
        case Series::da_price: return da_price;
        case Series::system_mw: return system_mw;
        case Series::temp_f: return temp_f;
        case Series::miner_mw: return miner_mw;
        case Series::btc_usd: return btc_usd;
    }
    return miner_mw;
}

std::optional<std::size_t> HourlyPanel::index_of(Hour h) const {
    auto off = h - start;
    if (off < 0 || static_cast<std::size_t>(off) >= size()) return std::nullopt;
    return static_cast<std::size_t>(off);
}

bool HourlyPanel::row_complete(std::size_t i) const {
    return std::isfinite(rt_price[i]) && std::isfinite(da_price[i]) && std::isfinite(system_mw[i]) &&
           std::isfinite(temp_f[i]) && std::isfinite(miner_mw[i]);
}

std::vector<Hour> HourlyPanel::gaps() const {
    std::vector<Hour> out;
    for (std::size_t i = 0; i < size(); ++i) {
        if (!row_complete(i)) out.push_back(hour(i));
    }
    return out;
}

HourlyPanel HourlyPanel::missing_grid(Hour start, std::size_t n, bool with_btc) {
    HourlyPanel p;
    p.start = start;
    for (Series s : kCoreSeries) p.column(s).assign(n, kNaN);
    if (with_btc) p.btc_usd.assign(n, kNaN);
    return p;
}

std::string_view season_name(Season s) {
    return s == Season::summer ? "summer" : "non_summer";
}

std::optional<Season> parse_season(std::string_view name) {
    if (name == "summer") return Season::summer;
    if (name == "non_summer" || name == "nonsummer" || name == "non-summer") return Season::non_summer;
    return std::nullopt;
}

bool in_season(Season s, unsigned month) {
    bool summer = month >= 6 && month <= 9;
    return s == Season::summer ? summer : !summer;
}

std::string_view gate_name(Gate g) {
    switch (g) {
        case Gate::none: return "none";
        case Gate::day: return "day";
        case Gate::peak: return "peak";
        case Gate::fourcp: return "fourcp";
    }
    return "?";
}

std::optional<Gate> parse_gate(std::string_view name) {
    for (Gate g : {Gate::none, Gate::day, Gate::peak, Gate::fourcp}) {
        if (gate_name(g) == name) return g;
    }
    return std::nullopt;
}

void SeasonMask::validate() const {
    for (const HourWindow* w : {&day, &peak, &fourcp}) {
        if (w->begin >= w->end || w->end > 24) {
            throw PreconditionError("hour window [" + std::to_string(w->begin) + ", " +
                                    std::to_string(w->end) + ") is not a nonempty range within a day");
        }
    }
    if (!peak.within(day)) throw PreconditionError("peak window must lie inside the day window");
}

bool SeasonMask::active(Gate g, Hour h) const {
    if (g == Gate::none) return true;
    if (!in_season(season, month_of(h))) return false;
    unsigned hod = hour_of_day(h);
    switch (g) {
        case Gate::day: return day.contains(hod);
        case Gate::peak: return peak.contains(hod);
        case Gate::fourcp: return fourcp.contains(hod);
        case Gate::none: break;
    }
    return true;
}

std::vector<std::uint8_t> indicator(const HourlyPanel& panel, const SeasonMask& mask, Gate which) {
    std::vector<std::uint8_t> out(panel.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = mask.active(which, panel.hour(i)) ? 1 : 0;
    return out;
}

SchemaMap parse_schema(std::istream& in) {
    SchemaMap schema;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto body = text::trim(std::string_view(line).substr(0, line.find('#')));
        if (body.empty()) continue;
        auto eq = body.find('=');
        if (eq == std::string_view::npos) {
            throw DataError("schema line " + std::to_string(lineno) + ": expected key = value");
        }
        std::string key(text::trim(body.substr(0, eq)));
        std::string value(text::trim(body.substr(eq + 1)));
        if (key != "timestamp" && !parse_series(key)) {
            throw DataError("schema line " + std::to_string(lineno) + ": unknown canonical name '" + key + "'");
        }
        schema[key] = value;
    }
    return schema;
}

SchemaMap read_schema(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open schema " + path.string());
    return parse_schema(in);
}

LoadedPanel load_panel(std::span<const std::filesystem::path> paths, const SchemaMap& schema) {
    if (paths.empty()) throw PreconditionError("load_panel needs at least one file");
    std::vector<FileColumns> files;
    for (const auto& p : paths) files.push_back(read_file(p, schema));

    std::map<Series, const FileColumns*> provider;
    for (const auto& f : files) {
        for (const auto& [s, v] : f.values) {
            auto [it, inserted] = provider.emplace(s, &f);
            if (!inserted) {
                throw DataError("series " + std::string(series_name(s)) + " provided by both " +
                                it->second->path.string() + " and " + f.path.string());
            }
        }
    }
    for (Series s : kCoreSeries) {
        if (!provider.count(s)) throw DataError("no input provides series " + std::string(series_name(s)));
    }

    Hour lo{std::numeric_limits<std::int64_t>::min()};
    Hour hi{std::numeric_limits<std::int64_t>::max()};
    for (const auto& f : files) {
        bool core = std::any_of(f.values.begin(), f.values.end(), [](auto& kv) { return is_core(kv.first); });
        if (!core) continue;
        lo = std::max(lo, f.first);
        hi = std::min(hi, f.last);
    }
    if (lo > hi) throw DataError("input files cover no common hours (empty intersection)");

    LoadedPanel out;
    auto n = static_cast<std::size_t>(hi - lo + 1);
    out.panel = HourlyPanel::missing_grid(lo, n, provider.count(Series::btc_usd) > 0);
    for (const auto& [s, f] : provider) {
        auto& col = out.panel.column(s);
        const auto& values = f->values.at(s);
        for (auto it = values.lower_bound(lo.value); it != values.end() && it->first <= hi.value; ++it) {
            col[static_cast<std::size_t>(it->first - lo.value)] = it->second;
        }
    }
    for (const auto& f : files) {
        for (Hour h : f.dropped_duplicates) {
            if (h >= lo && h <= hi) out.gaps.dropped_duplicates.push_back(h);
        }
    }
    std::sort(out.gaps.dropped_duplicates.begin(), out.gaps.dropped_duplicates.end());
    out.gaps.dropped_duplicates.erase(
        std::unique(out.gaps.dropped_duplicates.begin(), out.gaps.dropped_duplicates.end()),
        out.gaps.dropped_duplicates.end());
    validate_panel(out.panel);
    out.gaps.missing = out.panel.gaps();
    return out;
}

void write_panel_csv(const HourlyPanel& panel, std::ostream& out) {
    bool btc = panel.has(Series::btc_usd);
    out << "timestamp,rt_price,da_price,system_mw,temp_f,miner_mw";
    if (btc) out << ",btc_usd";
    out << '\n';
    auto put = [&](double v) {
        out << ',';
        if (std::isfinite(v)) out << text::format_double(v);
    };
    for (std::size_t i = 0; i < panel.size(); ++i) {
        out << format_hour(panel.hour(i));
        for (Series s : kCoreSeries) put(panel.column(s)[i]);
        if (btc) put(panel.btc_usd[i]);
        out << '\n';
    }
}

void write_panel_csv(const HourlyPanel& panel, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    write_panel_csv(panel, out);
}

LoadedPanel read_panel_csv(const std::filesystem::path& path) {
    std::array<std::filesystem::path, 1> one{path};
    return load_panel(one);
}

void validate_panel(const HourlyPanel& panel) {
    auto n = panel.size();
    for (Series s : kCoreSeries) {
        if (panel.column(s).size() != n) {
            throw DataError("series " + std::string(series_name(s)) + " length differs from the grid");
        }
    }
    if (panel.has(Series::btc_usd) && panel.btc_usd.size() != n) {
        throw DataError("series btc_usd length differs from the grid");
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (Series s : kCoreSeries) {
            double v = panel.column(s)[i];
            if (std::isinf(v)) {
                throw DataError(std::string(series_name(s)) + " is not finite at " + format_hour(panel.hour(i)));
            }
        }
        if (panel.miner_mw[i] < 0.0) {
            throw DataError("miner_mw is negative at " + format_hour(panel.hour(i)));
        }
    }
}

std::vector<Day> complete_days(const HourlyPanel& panel) {
    std::vector<Day> days;
    for (std::size_t i = 0; i < panel.size(); ++i) {
        if (!panel.row_complete(i)) continue;
        Day d = day_of(panel.hour(i));
        if (days.empty() || days.back() != d) days.push_back(d);
    }
    return days;
}

HourlyPanel keep_days(const HourlyPanel& panel, const std::set<Day>& keep) {
    HourlyPanel out = panel;
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (keep.count(day_of(out.hour(i)))) continue;
        for (Series s : kCoreSeries) out.column(s)[i] = kNaN;
        if (out.has(Series::btc_usd)) out.btc_usd[i] = kNaN;
    }
    return out;
}

HourlyPanel slice(const HourlyPanel& panel, Hour from, Hour to) {
    if (from < panel.start || to > panel.end() || from > to) {
        throw PreconditionError("slice [" + format_hour(from) + ", " + format_hour(to) + ") outside the panel");
    }
    auto b = static_cast<std::ptrdiff_t>(from - panel.start);
    auto e = static_cast<std::ptrdiff_t>(to - panel.start);
    HourlyPanel out;
    out.start = from;
    for (Series s : kAllSeries) {
        if (!panel.has(s)) continue;
        const auto& src = panel.column(s);
        out.column(s).assign(src.begin() + b, src.begin() + e);
    }
    return out;
}

TrainTestSplit split_train_test(const HourlyPanel& panel, double fraction, std::optional<std::uint64_t> seed) {
    if (!(fraction > 0.0 && fraction < 1.0)) {
        throw PreconditionError("train fraction must lie strictly between 0 and 1");
    }
    auto days = complete_days(panel);
    auto k = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(days.size())));
    if (k == 0 || k >= days.size()) {
        throw PreconditionError("train fraction " + text::format_double(fraction) + " over " +
                                std::to_string(days.size()) + " days leaves an empty part");
    }
    std::vector<Day> order = days;
    if (seed) {
        std::mt19937_64 rng(*seed);
        std::shuffle(order.begin(), order.end(), rng);
    }
    TrainTestSplit split;
    split.train_days.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
    split.test_days.assign(order.begin() + static_cast<std::ptrdiff_t>(k), order.end());
    std::sort(split.train_days.begin(), split.train_days.end());
    std::sort(split.test_days.begin(), split.test_days.end());
    split.train = keep_days(panel, {split.train_days.begin(), split.train_days.end()});
    split.test = keep_days(panel, {split.test_days.begin(), split.test_days.end()});
    return split;
}

}  // namespace minerdr
