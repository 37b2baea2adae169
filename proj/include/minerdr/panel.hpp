#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "minerdr/calendar.hpp"

namespace minerdr {

/// Column roles of the hourly panel.
enum class Series { rt_price, da_price, system_mw, temp_f, miner_mw, btc_usd };

inline constexpr std::array<Series, 5> kCoreSeries = {
    Series::rt_price, Series::da_price, Series::system_mw, Series::temp_f, Series::miner_mw};

[[nodiscard]] std::string_view series_name(Series s);
[[nodiscard]] std::optional<Series> parse_series(std::string_view name);

/// Aligned hourly series on a contiguous hourly grid starting at `start`.
///
/// Missing observations are NaN. A row with any core series missing is a
/// gap; gaps stay in the grid so hour arithmetic (lags, day boundaries) is
/// always index arithmetic. `btc_usd` is empty when the panel carries no
/// Bitcoin price. The same layout is reused for transformed series, where the
/// raw-unit invariants checked by `validate_panel` do not apply.
struct HourlyPanel {
    Hour start;
    std::vector<double> rt_price;
    std::vector<double> da_price;
    std::vector<double> system_mw;
    std::vector<double> temp_f;
    std::vector<double> miner_mw;
    std::vector<double> btc_usd;

    [[nodiscard]] std::size_t size() const { return miner_mw.size(); }
    [[nodiscard]] bool empty() const { return miner_mw.empty(); }
    [[nodiscard]] Hour hour(std::size_t i) const { return start + static_cast<std::int64_t>(i); }
    [[nodiscard]] Hour end() const { return hour(size()); }
    [[nodiscard]] bool has(Series s) const;
    [[nodiscard]] std::span<const double> column(Series s) const;
    [[nodiscard]] std::vector<double>& column(Series s);
    [[nodiscard]] std::optional<std::size_t> index_of(Hour h) const;

    /// True when every core series is finite at row `i`.
    [[nodiscard]] bool row_complete(std::size_t i) const;
    [[nodiscard]] std::vector<Hour> gaps() const;

    /// All-missing grid of `n` hours.
    [[nodiscard]] static HourlyPanel missing_grid(Hour start, std::size_t n, bool with_btc);
};

/// Half-open hour-of-day range [begin, end).
struct HourWindow {
    unsigned begin = 0;
    unsigned end = 24;

    [[nodiscard]] bool contains(unsigned hod) const { return hod >= begin && hod < end; }
    [[nodiscard]] unsigned length() const { return end - begin; }
    [[nodiscard]] bool within(const HourWindow& outer) const {
        return begin >= outer.begin && end <= outer.end;
    }
};

enum class Season { summer, non_summer };

[[nodiscard]] std::string_view season_name(Season s);
[[nodiscard]] std::optional<Season> parse_season(std::string_view name);
/// Summer is June through September, the 4CP months.
[[nodiscard]] bool in_season(Season s, unsigned month);
[[nodiscard]] inline Season season_of(unsigned month) {
    return in_season(Season::summer, month) ? Season::summer : Season::non_summer;
}

enum class Gate { none, day, peak, fourcp };

[[nodiscard]] std::string_view gate_name(Gate g);
[[nodiscard]] std::optional<Gate> parse_gate(std::string_view name);

struct SeasonMask {
    Season season = Season::non_summer;
    HourWindow day{10, 20};
    HourWindow peak{15, 19};
    HourWindow fourcp{16, 18};

    /// Throws PreconditionError unless peak lies inside day and all windows
    /// are nonempty ranges inside [0, 24].
    void validate() const;
    /// Indicator value of gate `g` at hour `h`; `Gate::none` is always active.
    [[nodiscard]] bool active(Gate g, Hour h) const;
};

[[nodiscard]] std::vector<std::uint8_t> indicator(const HourlyPanel& panel, const SeasonMask& mask,
                                                  Gate which);

/// Canonical series name -> source column. `timestamp` maps the time column.
using SchemaMap = std::map<std::string, std::string, std::less<>>;

/// Parses `key = value` lines; `#` starts a comment. Unknown canonical keys
/// are rejected.
[[nodiscard]] SchemaMap parse_schema(std::istream& in);
[[nodiscard]] SchemaMap read_schema(const std::filesystem::path& path);

struct GapReport {
    std::vector<Hour> missing;             // rows with any core series missing
    std::vector<Hour> dropped_duplicates;  // repeated DST fall-back hours
};

struct LoadedPanel {
    HourlyPanel panel;
    GapReport gaps;
};

/// Reads one or more CSV files, maps columns through `schema`, and aligns
/// them on the intersection of the hours covered by the files providing
/// core series. Files whose time column holds plain dates (`YYYY-MM-DD`)
/// spread each value across the 24 hours of that day.
[[nodiscard]] LoadedPanel load_panel(std::span<const std::filesystem::path> paths,
                                     const SchemaMap& schema = {});

/// Canonical CSV: `timestamp,rt_price,da_price,system_mw,temp_f,miner_mw[,btc_usd]`,
/// numbers in shortest round-trip form, missing values empty.
void write_panel_csv(const HourlyPanel& panel, std::ostream& out);
void write_panel_csv(const HourlyPanel& panel, const std::filesystem::path& path);
[[nodiscard]] LoadedPanel read_panel_csv(const std::filesystem::path& path);

/// Raw-unit invariants: non-negative miner demand, finite values, 1-hour grid.
void validate_panel(const HourlyPanel& panel);

/// Days holding at least one complete row, in order.
[[nodiscard]] std::vector<Day> complete_days(const HourlyPanel& panel);

/// Copy with every row outside `keep` set to missing.
[[nodiscard]] HourlyPanel keep_days(const HourlyPanel& panel, const std::set<Day>& keep);

/// Rows [from, to) of the grid.
[[nodiscard]] HourlyPanel slice(const HourlyPanel& panel, Hour from, Hour to);

struct TrainTestSplit {
    HourlyPanel train;
    HourlyPanel test;
    std::vector<Day> train_days;
    std::vector<Day> test_days;
};

/// Splits at whole-day granularity. `round(fraction * days)` days go to the
/// training part: the earliest days when `seed` is empty, otherwise a seeded
/// random subset. Both parts keep the full grid, with the other part's days
/// marked missing.
[[nodiscard]] TrainTestSplit split_train_test(const HourlyPanel& panel, double fraction,
                                              std::optional<std::uint64_t> seed = std::nullopt);

}  // namespace minerdr
