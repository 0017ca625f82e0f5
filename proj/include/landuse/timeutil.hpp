#pragma once

#include <array>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

#include "landuse/errors.hpp"

namespace landuse {

/// Civil calendar date (proleptic Gregorian).
struct CivilDate {
    int year = 1970;
    int month = 1;  // 1..12
    int day = 1;    // 1..31

    auto operator<=>(const CivilDate&) const = default;
};

/// Days since 1970-01-01 (Howard Hinnant's days_from_civil).
inline std::int64_t days_from_civil(const CivilDate& d) {
    int y = d.year - (d.month <= 2);
    const int era_base = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era_base * 400);
    const unsigned doy = (153u * (d.month + (d.month > 2 ? -3 : 9)) + 2) / 5 + d.day - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era_base * 146097LL + static_cast<std::int64_t>(doe) - 719468LL;
}

inline CivilDate civil_from_days(std::int64_t z) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp + (mp < 10 ? 3 : -9);
    return CivilDate{static_cast<int>(y + (m <= 2)), static_cast<int>(m), static_cast<int>(d)};
}

/// 0 = Monday .. 6 = Sunday.
inline int weekday_monday0(const CivilDate& d) {
    std::int64_t z = days_from_civil(d);
    return static_cast<int>(((z % 7) + 10) % 7);  // 1970-01-01 was a Thursday (3)
}

/// An instant carried in local civil time plus its UTC offset. Binning uses
/// the local wall-clock fields directly.
struct LocalTime {
    CivilDate date;
    int hour = 0;    // 0..23
    int minute = 0;  // 0..59
    double second = 0.0;
    int offset_minutes = 0;  // local - UTC
};

namespace detail {
inline bool parse_fixed_uint(std::string_view s, std::size_t pos, std::size_t len, int& out) {
    int v = 0;
    if (pos + len > s.size()) return false;
    for (std::size_t i = pos; i < pos + len; ++i) {
        char c = s[i];
        if (c < '0' || c > '9') return false;
        v = v * 10 + (c - '0');
    }
    out = v;
    return true;
}
}  // namespace detail

/// RFC 3339 timestamp, e.g. 2012-08-06T09:30:00Z or 2012-08-06T09:30:00.25-05:00.
inline std::optional<LocalTime> parse_rfc3339(std::string_view s) {
    LocalTime t;
    int sec_int = 0;
    if (!detail::parse_fixed_uint(s, 0, 4, t.date.year)) return std::nullopt;
    if (s.size() < 20 || s[4] != '-' || s[7] != '-') return std::nullopt;
    if (!detail::parse_fixed_uint(s, 5, 2, t.date.month)) return std::nullopt;
    if (!detail::parse_fixed_uint(s, 8, 2, t.date.day)) return std::nullopt;
    if (s[10] != 'T' && s[10] != 't' && s[10] != ' ') return std::nullopt;
    if (!detail::parse_fixed_uint(s, 11, 2, t.hour)) return std::nullopt;
    if (s[13] != ':') return std::nullopt;
    if (!detail::parse_fixed_uint(s, 14, 2, t.minute)) return std::nullopt;
    if (s[16] != ':') return std::nullopt;
    if (!detail::parse_fixed_uint(s, 17, 2, sec_int)) return std::nullopt;
    t.second = sec_int;

    std::size_t pos = 19;
    if (pos < s.size() && s[pos] == '.') {
        double frac = 0.0, scale = 0.1;
        ++pos;
        if (pos >= s.size() || s[pos] < '0' || s[pos] > '9') return std::nullopt;
        while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') {
            frac += (s[pos] - '0') * scale;
            scale *= 0.1;
            ++pos;
        }
        t.second += frac;
    }
    if (pos >= s.size()) return std::nullopt;
    char c = s[pos];
    if (c == 'Z' || c == 'z') {
        t.offset_minutes = 0;
        ++pos;
    } else if (c == '+' || c == '-') {
        int oh = 0, om = 0;
        if (!detail::parse_fixed_uint(s, pos + 1, 2, oh)) return std::nullopt;
        if (pos + 3 >= s.size() || s[pos + 3] != ':') return std::nullopt;
        if (!detail::parse_fixed_uint(s, pos + 4, 2, om)) return std::nullopt;
        t.offset_minutes = (c == '+' ? 1 : -1) * (oh * 60 + om);
        pos += 6;
    } else {
        return std::nullopt;
    }
    if (pos != s.size()) return std::nullopt;
    if (t.date.month < 1 || t.date.month > 12 || t.date.day < 1 || t.date.day > 31) return std::nullopt;
    if (t.hour > 23 || t.minute > 59 || t.second >= 61.0) return std::nullopt;
    return t;
}

inline std::string format_rfc3339_utc(const CivilDate& date, int hour, int minute, double second) {
    char buf[48];
    int si = static_cast<int>(second);
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d+00:00", date.year, date.month,
                  date.day, hour, minute, si);
    return buf;
}

/// Half-open range of civil dates [start, end).
struct DateRange {
    CivilDate start;
    CivilDate end;

    std::int64_t n_days() const { return days_from_civil(end) - days_from_civil(start); }

    bool contains(const CivilDate& d) const {
        std::int64_t z = days_from_civil(d);
        return z >= days_from_civil(start) && z < days_from_civil(end);
    }

    /// Calendar-day count per day-of-week (Monday = 0) inside the range.
    std::array<std::int64_t, 7> observed_days() const {
        std::array<std::int64_t, 7> obs{};
        std::int64_t z0 = days_from_civil(start), z1 = days_from_civil(end);
        for (std::int64_t z = z0; z < z1; ++z) ++obs[((z % 7) + 10) % 7];
        return obs;
    }
};

inline std::optional<CivilDate> parse_date(std::string_view s) {
    CivilDate d;
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
    if (!detail::parse_fixed_uint(s, 0, 4, d.year)) return std::nullopt;
    if (!detail::parse_fixed_uint(s, 5, 2, d.month)) return std::nullopt;
    if (!detail::parse_fixed_uint(s, 8, 2, d.day)) return std::nullopt;
    if (d.month < 1 || d.month > 12 || d.day < 1 || d.day > 31) return std::nullopt;
    return d;
}

inline std::string format_date(const CivilDate& d) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", d.year, d.month, d.day);
    return buf;
}

}  // namespace landuse
