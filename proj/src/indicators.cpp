#include "minerdr/indicators.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "minerdr/error.hpp"
#include "minerdr/transform.hpp"

namespace minerdr::indicators {

namespace {

double rsi_value(double gain, double loss) {
    if (loss == 0.0) return gain == 0.0 ? 50.0 : 100.0;
    return 100.0 - 100.0 / (1.0 + gain / loss);
}

}  // namespace

DailySeries rsi(const DailySeries& prices, std::size_t window) {
    if (window < 2) throw PreconditionError("rsi: window must be >= 2");
    if (prices.dates.size() != prices.values.size()) throw PreconditionError("rsi: dates and values differ in length");
    if (prices.size() <= window) throw PreconditionError("rsi: series must be longer than the window");
    for (double v : prices.values) {
        if (!std::isfinite(v)) throw PreconditionError("rsi: prices must be finite");
    }
    const double w = static_cast<double>(window);
    double gain = 0.0, loss = 0.0;
    for (std::size_t i = 1; i <= window; ++i) {
        double d = prices.values[i] - prices.values[i - 1];
        (d > 0 ? gain : loss) += std::abs(d);
    }
    gain /= w;
    loss /= w;

    DailySeries out;
    out.dates.push_back(prices.dates[window]);
    out.values.push_back(rsi_value(gain, loss));
    for (std::size_t i = window + 1; i < prices.size(); ++i) {
        double d = prices.values[i] - prices.values[i - 1];
        gain = (gain * (w - 1.0) + std::max(d, 0.0)) / w;
        loss = (loss * (w - 1.0) + std::max(-d, 0.0)) / w;
        out.dates.push_back(prices.dates[i]);
        out.values.push_back(rsi_value(gain, loss));
    }
    return out;
}

DailyEnergy daily_energy(Hour start, std::span<const double> detrended) {
    std::map<Day, std::pair<double, int>> days;
    for (std::size_t i = 0; i < detrended.size(); ++i) {
        Hour h = start + static_cast<std::int64_t>(i);
        auto& acc = days[day_of(h)];
        if (std::isfinite(detrended[i])) {
            acc.first += detrended[i];
            ++acc.second;
        }
    }
    DailyEnergy out;
    for (const auto& [d, acc] : days) {
        if (acc.second == 24) {
            out.energy.dates.push_back(d);
            out.energy.values.push_back(acc.first);
        } else {
            out.partial_days.push_back(d);
        }
    }
    if (out.energy.dates.empty()) throw PreconditionError("daily_energy: no day has full 24-hour coverage");
    return out;
}

DailySeries daily_close(Hour start, std::span<const double> hourly) {
    std::map<Day, double> last;
    for (std::size_t i = 0; i < hourly.size(); ++i) {
        if (std::isfinite(hourly[i])) last[day_of(start + static_cast<std::int64_t>(i))] = hourly[i];
    }
    DailySeries out;
    for (const auto& [d, v] : last) {
        out.dates.push_back(d);
        out.values.push_back(v);
    }
    return out;
}

std::vector<RsiCorrelation> rsi_correlation_study(const DailySeries& prices, const DailySeries& energy,
                                                  std::span<const std::size_t> windows) {
    if (windows.empty()) throw PreconditionError("rsi_correlation_study: no windows requested");
    std::map<Day, double> e;
    for (std::size_t i = 0; i < energy.size(); ++i) e[energy.dates[i]] = energy.values[i];

    std::vector<RsiCorrelation> out;
    for (std::size_t w : windows) {
        auto r = rsi(prices, w);
        std::vector<double> x, y;
        for (std::size_t i = 0; i < r.size(); ++i) {
            auto it = e.find(r.dates[i]);
            if (it == e.end()) continue;
            x.push_back(r.values[i]);
            y.push_back(it->second);
        }
        if (x.size() < 60) {
            throw PreconditionError("rsi_correlation_study: window " + std::to_string(w) + " leaves " +
                                    std::to_string(x.size()) + " overlapping days, need at least 60");
        }
        RsiCorrelation rc;
        rc.window = w;
        rc.result = stats::pearson(x, y);
        rc.result.window_note = "rsi window " + std::to_string(w) + " days";
        out.push_back(std::move(rc));
    }
    return out;
}

std::vector<RsiCorrelation> rsi_correlation_study(const HourlyPanel& panel, std::span<const std::size_t> windows,
                                                  int trend_window_days) {
    if (!panel.has(Series::btc_usd)) throw PreconditionError("rsi_correlation_study: panel has no btc_usd series");
    auto prices = daily_close(panel.start, panel.btc_usd);
    auto detrended = transform::extract_trend(panel.start, panel.miner_mw, trend_window_days).detrended;
    auto energy = daily_energy(panel.start, detrended).energy;
    return rsi_correlation_study(prices, energy, windows);
}

std::vector<CpInterval> find_4cp_intervals(const LoadSeries& load, int year, std::size_t per_month) {
    if (load.step_minutes <= 0) throw PreconditionError("find_4cp_intervals: step must be positive");
    if (per_month == 0) throw PreconditionError("find_4cp_intervals: per_month must be >= 1");
    struct Sample {
        double mw;
        std::int64_t minute;
    };
    std::map<unsigned, std::vector<Sample>> by_month;
    for (std::size_t i = 0; i < load.mw.size(); ++i) {
        if (!std::isfinite(load.mw[i])) continue;
        Minute m{load.start.value + static_cast<std::int64_t>(i) * load.step_minutes};
        Day d = day_of(m);
        if (year_of(d) != year) continue;
        unsigned month = month_of(d);
        if (month < 6 || month > 9) continue;
        by_month[month].push_back({load.mw[i], m.value});
    }
    std::vector<CpInterval> out;
    for (unsigned month = 6; month <= 9; ++month) {
        auto it = by_month.find(month);
        if (it == by_month.end() || it->second.empty()) {
            throw DataError("find_4cp_intervals: no load data for month " + std::to_string(month) + " of " +
                            std::to_string(year));
        }
        auto& s = it->second;
        std::stable_sort(s.begin(), s.end(), [](const Sample& a, const Sample& b) {
            if (a.mw != b.mw) return a.mw > b.mw;
            return a.minute < b.minute;
        });
        for (std::size_t k = 0; k < std::min(per_month, s.size()); ++k) {
            out.push_back({month, Minute{s[k].minute}, load.step_minutes, s[k].mw});
        }
    }
    return out;
}

LoadSeries system_load(const HourlyPanel& panel) {
    return LoadSeries{to_minute(panel.start), 60, panel.system_mw};
}

}  // namespace minerdr::indicators
