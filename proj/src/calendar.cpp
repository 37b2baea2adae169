#include "minerdr/calendar.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>

namespace minerdr {

namespace {

namespace chr = std::chrono;

std::optional<unsigned> parse_uint(std::string_view text) {
    unsigned value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
    return value;
}

struct Stamp {
    Day day;
    unsigned hour = 0;
    unsigned minute = 0;
    unsigned second = 0;
};

std::optional<Stamp> parse_stamp(std::string_view text) {
    while (!text.empty() && (text.back() == ' ' || text.back() == '\r')) text.remove_suffix(1);
    while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
    if (text.size() < 16) return std::nullopt;
    auto day = parse_day(text.substr(0, 10));
    if (!day || (text[10] != 'T' && text[10] != ' ') || text[13] != ':') return std::nullopt;
    auto hh = parse_uint(text.substr(11, 2));
    auto mm = parse_uint(text.substr(14, 2));
    if (!hh || !mm || *hh > 23 || *mm > 59) return std::nullopt;
    Stamp s{*day, *hh, *mm, 0};
    if (text.size() > 16) {
        if (text.size() != 19 || text[16] != ':') return std::nullopt;
        auto ss = parse_uint(text.substr(17, 2));
        if (!ss || *ss > 59) return std::nullopt;
        s.second = *ss;
    }
    return s;
}

Day nth_sunday(int year, unsigned month, unsigned n) {
    auto ymd = chr::year{year} / chr::month{month} / chr::Sunday[n];
    return Day{chr::sys_days{ymd}.time_since_epoch().count()};
}

}  // namespace

Day make_day(int year, unsigned month, unsigned day) {
    chr::sys_days d{chr::year{year} / chr::month{month} / chr::day{day}};
    return Day{d.time_since_epoch().count()};
}

CivilDate civil(Day day) {
    chr::year_month_day ymd{chr::sys_days{chr::days{day.value}}};
    return {static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
            static_cast<unsigned>(ymd.day())};
}

Hour make_hour(int year, unsigned month, unsigned day, unsigned hour) {
    return Hour{make_day(year, month, day).value * 24 + hour};
}

Minute make_minute(int year, unsigned month, unsigned day, unsigned hour, unsigned minute) {
    return Minute{make_day(year, month, day).value * 1440 + hour * 60 + minute};
}

unsigned month_of(Day d) { return civil(d).month; }
int year_of(Day d) { return civil(d).year; }

std::string format_day(Day d) {
    auto c = civil(d);
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", c.year, c.month, c.day);
    return buf;
}

std::string format_hour(Hour h) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "T%02u:00", hour_of_day(h));
    return format_day(day_of(h)) + buf;
}

std::string format_minute(Minute m) {
    auto minute = static_cast<unsigned>(m.value - day_of(m).value * 1440);
    char buf[16];
    std::snprintf(buf, sizeof buf, "T%02u:%02u", minute / 60, minute % 60);
    return format_day(day_of(m)) + buf;
}

std::optional<Day> parse_day(std::string_view text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
    auto y = parse_uint(text.substr(0, 4));
    auto m = parse_uint(text.substr(5, 2));
    auto d = parse_uint(text.substr(8, 2));
    if (!y || !m || !d) return std::nullopt;
    chr::year_month_day ymd{chr::year{static_cast<int>(*y)}, chr::month{*m}, chr::day{*d}};
    if (!ymd.ok()) return std::nullopt;
    return Day{chr::sys_days{ymd}.time_since_epoch().count()};
}

std::optional<Hour> parse_hour(std::string_view text) {
    auto s = parse_stamp(text);
    if (!s || s->minute != 0 || s->second != 0) return std::nullopt;
    return Hour{s->day.value * 24 + s->hour};
}

std::optional<Minute> parse_minute(std::string_view text) {
    auto s = parse_stamp(text);
    if (!s || s->second != 0) return std::nullopt;
    return Minute{s->day.value * 1440 + s->hour * 60 + s->minute};
}

bool is_dst_fallback_hour(Hour h) {
    auto d = day_of(h);
    auto c = civil(d);
    return c.month == 11 && hour_of_day(h) == 1 && d == nth_sunday(c.year, 11, 1);
}

bool is_dst_springforward_hour(Hour h) {
    auto d = day_of(h);
    auto c = civil(d);
    return c.month == 3 && hour_of_day(h) == 2 && d == nth_sunday(c.year, 3, 2);
}

}  // namespace minerdr
