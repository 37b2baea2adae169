#include "minerdr/transform.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "minerdr/distributions.hpp"
#include "minerdr/error.hpp"

namespace minerdr::transform {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

double TrendCurve::at(Day d) const {
    if (values.empty()) throw PreconditionError("trend curve is empty");
    std::int64_t i = d.value - first_day.value;
    i = std::clamp<std::int64_t>(i, 0, static_cast<std::int64_t>(values.size()) - 1);
    return values[static_cast<std::size_t>(i)];
}

TrendResult extract_trend(Hour start, std::span<const double> series, int window_days) {
    if (window_days < 1) throw PreconditionError("extract_trend: window_days must be >= 1");
    if (series.empty()) throw PreconditionError("extract_trend: empty series");
    const Day first = day_of(start);
    const Day last = day_of(start + static_cast<std::int64_t>(series.size()) - 1);
    const auto ndays = static_cast<std::size_t>(last.value - first.value + 1);

    std::vector<double> peak(ndays, kNaN);
    for (std::size_t i = 0; i < series.size(); ++i) {
        double v = series[i];
        if (!std::isfinite(v)) continue;
        auto d = static_cast<std::size_t>(day_of(start + static_cast<std::int64_t>(i)).value - first.value);
        if (!std::isfinite(peak[d]) || v > peak[d]) peak[d] = v;
    }

    TrendResult out;
    out.trend.first_day = first;
    out.trend.window_days = window_days;
    out.trend.values.assign(ndays, kNaN);
    for (std::size_t d = 0; d < ndays; ++d) {
        std::size_t lo = d + 1 >= static_cast<std::size_t>(window_days) ? d + 1 - static_cast<std::size_t>(window_days) : 0;
        double m = kNaN;
        for (std::size_t k = lo; k <= d; ++k) {
            if (std::isfinite(peak[k]) && (!std::isfinite(m) || peak[k] > m)) m = peak[k];
        }
        out.trend.values[d] = m;
    }
    // Days whose window holds no data take the previous trend, or the first
    // available one at the start of the range.
    auto first_valid = std::find_if(out.trend.values.begin(), out.trend.values.end(),
                                    [](double v) { return std::isfinite(v); });
    if (first_valid == out.trend.values.end()) throw PreconditionError("extract_trend: no finite values");
    std::fill(out.trend.values.begin(), first_valid, *first_valid);
    for (std::size_t d = 1; d < ndays; ++d) {
        if (!std::isfinite(out.trend.values[d])) out.trend.values[d] = out.trend.values[d - 1];
    }
    for (std::size_t d = 0; d < ndays; ++d) {
        if (!(out.trend.values[d] > 0.0)) {
            throw DegenerateError("extract_trend: nonpositive trend value on " +
                                  format_day(Day{first.value + static_cast<std::int64_t>(d)}));
        }
    }

    out.detrended.resize(series.size());
    for (std::size_t i = 0; i < series.size(); ++i) {
        double v = series[i];
        out.detrended[i] =
            std::isfinite(v) ? v / out.trend.at(day_of(start + static_cast<std::int64_t>(i))) : kNaN;
    }
    return out;
}

double QuantileMap::forward(double x) const {
    if (empty()) throw PreconditionError("quantile map is not fitted");
    if (std::isnan(x)) return kNaN;
    if (x <= values.front()) {
        auto hi = std::upper_bound(values.begin(), values.end(), values.front()) - values.begin();
        return x < values.front() ? z.front() : 0.5 * (z.front() + z[static_cast<std::size_t>(hi - 1)]);
    }
    if (x >= values.back()) {
        auto lo = std::lower_bound(values.begin(), values.end(), values.back()) - values.begin();
        return x > values.back() ? z.back() : 0.5 * (z[static_cast<std::size_t>(lo)] + z.back());
    }
    auto [lo_it, hi_it] = std::equal_range(values.begin(), values.end(), x);
    auto lo = static_cast<std::size_t>(lo_it - values.begin());
    auto hi = static_cast<std::size_t>(hi_it - values.begin());
    if (lo < hi) return 0.5 * (z[lo] + z[hi - 1]);
    // values[lo - 1] < x < values[lo]
    double a = values[lo - 1], b = values[lo];
    double w = (x - a) / (b - a);
    return z[lo - 1] + w * (z[lo] - z[lo - 1]);
}

double QuantileMap::inverse(double q) const {
    if (empty()) throw PreconditionError("invert called before the transform was fitted");
    if (std::isnan(q)) return kNaN;
    if (q <= z.front()) return values.front();
    if (q >= z.back()) return values.back();
    auto k = static_cast<std::size_t>(std::upper_bound(z.begin(), z.end(), q) - z.begin());
    double w = (q - z[k - 1]) / (z[k] - z[k - 1]);
    return values[k - 1] + w * (values[k] - values[k - 1]);
}

GaussianizeResult gaussianize(std::span<const double> series) {
    std::vector<std::size_t> idx;
    idx.reserve(series.size());
    for (std::size_t i = 0; i < series.size(); ++i) {
        if (std::isfinite(series[i])) idx.push_back(i);
    }
    if (idx.size() < 30) throw PreconditionError("gaussianize: need at least 30 finite observations");
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return series[a] < series[b]; });
    if (series[idx.front()] == series[idx.back()]) throw DegenerateError("gaussianize: all values are identical");

    const double n = static_cast<double>(idx.size());
    GaussianizeResult out;
    out.z.assign(series.size(), kNaN);
    out.map.values.resize(idx.size());
    out.map.z.resize(idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k) {
        double q = dist::normal_quantile((static_cast<double>(k) + 0.5) / n);
        out.map.values[k] = series[idx[k]];
        out.map.z[k] = q;
        out.z[idx[k]] = q;
    }
    return out;
}

std::size_t bin_of(Hour h) {
    std::size_t season = season_of(month_of(h)) == Season::summer ? 0 : 1;
    return season * 24 + hour_of_day(h);
}

std::string bin_label(std::size_t bin) {
    return std::string(season_name(bin < 24 ? Season::summer : Season::non_summer)) + "/hour " +
           std::to_string(bin % 24);
}

StandardizeResult standardize(std::span<const double> z, std::span<const std::size_t> bins) {
    if (z.size() != bins.size()) throw PreconditionError("standardize: values and bins differ in length");
    std::array<double, kBinCount> sum{};
    std::array<std::size_t, kBinCount> count{};
    for (std::size_t i = 0; i < z.size(); ++i) {
        if (bins[i] >= kBinCount) throw PreconditionError("standardize: bin index out of range");
        if (!std::isfinite(z[i])) continue;
        sum[bins[i]] += z[i];
        ++count[bins[i]];
    }
    std::array<double, kBinCount> mean{};
    for (std::size_t b = 0; b < kBinCount; ++b) mean[b] = count[b] ? sum[b] / static_cast<double>(count[b]) : 0.0;
    std::array<double, kBinCount> ss{};
    for (std::size_t i = 0; i < z.size(); ++i) {
        if (!std::isfinite(z[i])) continue;
        double d = z[i] - mean[bins[i]];
        ss[bins[i]] += d * d;
    }

    StandardizeResult out;
    for (std::size_t b = 0; b < kBinCount; ++b) {
        if (count[b] == 0) continue;
        if (count[b] < 2) throw DegenerateError("standardize: bin " + bin_label(b) + " has a single observation");
        double sd = std::sqrt(ss[b] / static_cast<double>(count[b] - 1));
        if (!(sd > 0.0)) throw DegenerateError("standardize: bin " + bin_label(b) + " has zero variance");
        out.stats[b] = BinStat{mean[b], sd, count[b]};
    }
    out.tilde.resize(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) {
        out.tilde[i] = std::isfinite(z[i]) ? (z[i] - out.stats[bins[i]]->mean) / out.stats[bins[i]]->std : kNaN;
    }
    return out;
}

std::string_view step_name(Step s) {
    switch (s) {
        case Step::trend: return "trend";
        case Step::gaussianize: return "gaussianize";
        case Step::standardize: return "standardize";
    }
    return "?";
}

double FittedTransform::apply_one(Hour h, double x) const {
    if (!fitted()) throw PreconditionError("transform is not fitted");
    if (!std::isfinite(x)) return kNaN;
    for (Step s : steps) {
        switch (s) {
            case Step::trend: x /= trend->at(day_of(h)); break;
            case Step::gaussianize: x = quantiles.forward(x); break;
            case Step::standardize: {
                const auto& b = bins[bin_of(h)];
                if (!b) throw PreconditionError("transform has no statistics for bin " + bin_label(bin_of(h)));
                x = (x - b->mean) / b->std;
                break;
            }
        }
    }
    return x;
}

double FittedTransform::invert_one(Hour h, double z) const {
    if (!fitted()) throw PreconditionError("invert called before the transform was fitted");
    if (!std::isfinite(z)) return kNaN;
    for (auto it = steps.rbegin(); it != steps.rend(); ++it) {
        switch (*it) {
            case Step::trend: z *= trend->at(day_of(h)); break;
            case Step::gaussianize: z = quantiles.inverse(z); break;
            case Step::standardize: {
                const auto& b = bins[bin_of(h)];
                if (!b) throw PreconditionError("transform has no statistics for bin " + bin_label(bin_of(h)));
                z = z * b->std + b->mean;
                break;
            }
        }
    }
    return z;
}

std::vector<double> FittedTransform::apply(Hour start, std::span<const double> x) const {
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = apply_one(start + static_cast<std::int64_t>(i), x[i]);
    return out;
}

std::vector<double> FittedTransform::invert(Hour start, std::span<const double> z) const {
    std::vector<double> out(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) out[i] = invert_one(start + static_cast<std::int64_t>(i), z[i]);
    return out;
}

FittedTransform fit(Hour start, std::span<const double> series, const FitOptions& options) {
    FittedTransform t;
    std::vector<double> work(series.begin(), series.end());
    if (options.detrend) {
        auto tr = extract_trend(start, work, options.trend_window_days);
        t.trend = std::move(tr.trend);
        work = std::move(tr.detrended);
        t.steps.push_back(Step::trend);
    }
    t.quantiles = gaussianize(work).map;
    t.steps.push_back(Step::gaussianize);
    // Normal scores through the stored map, so tied values share the score
    // that apply() will later produce.
    std::vector<std::size_t> bins(work.size());
    for (std::size_t i = 0; i < work.size(); ++i) {
        work[i] = t.quantiles.forward(work[i]);
        bins[i] = bin_of(start + static_cast<std::int64_t>(i));
    }
    t.bins = standardize(work, bins).stats;
    t.steps.push_back(Step::standardize);
    return t;
}

const FittedTransform& TransformSet::at(Series s) const {
    auto it = series.find(s);
    if (it == series.end()) {
        throw PreconditionError("no fitted transform for series " + std::string(series_name(s)));
    }
    return it->second;
}

HourlyPanel TransformSet::apply(const HourlyPanel& panel) const {
    HourlyPanel out = panel;
    for (const auto& [s, t] : series) {
        if (!panel.has(s)) continue;
        out.column(s) = t.apply(panel.start, panel.column(s));
    }
    return out;
}

TransformSet fit_panel(const HourlyPanel& panel, int trend_window_days) {
    TransformSet set;
    for (Series s : kCoreSeries) {
        FitOptions opt;
        opt.detrend = s == Series::miner_mw;
        opt.trend_window_days = trend_window_days;
        try {
            set.series.emplace(s, fit(panel.start, panel.column(s), opt));
        } catch (const Error& e) {
            throw Error(e.kind(), std::string(series_name(s)) + ": " + e.what());
        }
    }
    return set;
}

OutlierResult remove_outlier_days(const HourlyPanel& panel, double z_threshold) {
    if (!(z_threshold > 0.0)) throw PreconditionError("remove_outlier_days: z_threshold must be positive");
    std::map<Day, std::pair<double, std::size_t>> acc;
    for (std::size_t i = 0; i < panel.size(); ++i) {
        double v = panel.rt_price[i];
        if (!std::isfinite(v)) continue;
        auto& a = acc[day_of(panel.hour(i))];
        a.first += v;
        ++a.second;
    }
    OutlierResult out;
    if (acc.size() < 2) {
        out.panel = panel;
        return out;
    }
    std::vector<std::pair<Day, double>> daily;
    daily.reserve(acc.size());
    for (const auto& [d, a] : acc) daily.emplace_back(d, a.first / static_cast<double>(a.second));
    double mean = 0.0;
    for (const auto& [d, m] : daily) mean += m;
    mean /= static_cast<double>(daily.size());
    double ss = 0.0;
    for (const auto& [d, m] : daily) ss += (m - mean) * (m - mean);
    double sd = std::sqrt(ss / static_cast<double>(daily.size() - 1));

    std::set<Day> removed;
    if (sd > 0.0) {
        for (const auto& [d, m] : daily) {
            if (std::abs(m - mean) / sd > z_threshold) removed.insert(d);
        }
    }
    if (removed.size() == daily.size()) {
        throw PreconditionError("remove_outlier_days: threshold would remove every day");
    }
    std::set<Day> keep;
    if (!panel.empty()) {
        for (Day d = day_of(panel.start); d <= day_of(panel.end() - 1); d.value++) {
            if (!removed.count(d)) keep.insert(d);
        }
    }
    out.panel = removed.empty() ? panel : keep_days(panel, keep);
    out.removed.assign(removed.begin(), removed.end());
    return out;
}

}  // namespace minerdr::transform
