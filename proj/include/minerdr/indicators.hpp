#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "minerdr/calendar.hpp"
#include "minerdr/panel.hpp"
#include "minerdr/stats.hpp"

namespace minerdr::indicators {

struct DailySeries {
    std::vector<Day> dates;
    std::vector<double> values;

    [[nodiscard]] std::size_t size() const { return values.size(); }
};

/// Wilder RSI. The first value (at index `window`) uses simple averages of
/// the first `window` gains and losses; later values smooth recursively.
/// A window with neither gains nor losses gives 50.
[[nodiscard]] DailySeries rsi(const DailySeries& prices, std::size_t window);

struct DailyEnergy {
    DailySeries energy;
    std::vector<Day> partial_days;  // days dropped for incomplete coverage
};

/// Sum of the 24 hourly values of each fully covered day.
[[nodiscard]] DailyEnergy daily_energy(Hour start, std::span<const double> detrended);

/// Daily closing value of an hourly-spread daily series (last finite hour).
[[nodiscard]] DailySeries daily_close(Hour start, std::span<const double> hourly);

struct RsiCorrelation {
    std::size_t window = 0;
    stats::CorrelationResult result;
};

/// Pearson correlation of rsi(prices, w) against energy on common dates, per
/// window. Needs >= 60 overlapping days for every window.
[[nodiscard]] std::vector<RsiCorrelation> rsi_correlation_study(const DailySeries& prices, const DailySeries& energy,
                                                                std::span<const std::size_t> windows);

/// Panel form: Bitcoin closes from `btc_usd`, energy from miner demand
/// detrended with a `trend_window_days` rolling peak.
[[nodiscard]] std::vector<RsiCorrelation> rsi_correlation_study(const HourlyPanel& panel,
                                                                std::span<const std::size_t> windows,
                                                                int trend_window_days = 7);

/// Regularly spaced load samples (15 or 60 minutes apart).
struct LoadSeries {
    Minute start;
    int step_minutes = 60;
    std::vector<double> mw;
};

struct CpInterval {
    unsigned month = 0;
    Minute start;
    int duration_minutes = 60;
    double load_mw = 0.0;
};

/// Highest-demand interval of each month June-September of `year` (ties go
/// to the earliest), or the `per_month` highest intervals when greater than 1.
[[nodiscard]] std::vector<CpInterval> find_4cp_intervals(const LoadSeries& load, int year, std::size_t per_month = 1);

/// Hourly system demand of a panel as a load series.
[[nodiscard]] LoadSeries system_load(const HourlyPanel& panel);

}  // namespace minerdr::indicators
