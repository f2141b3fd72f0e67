#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "area2vec/common.hpp"

namespace area2vec {

/// Calendar date as a day count since 1970-01-01 (proleptic Gregorian).
using DayNumber = std::int64_t;

struct CivilDate {
    int year = 1970;
    unsigned month = 1;
    unsigned day = 1;

    bool operator==(const CivilDate&) const = default;
};

// Howard Hinnant's days_from_civil / civil_from_days.
constexpr DayNumber days_from_civil(int y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

constexpr DayNumber days_from_civil(const CivilDate& c) { return days_from_civil(c.year, c.month, c.day); }

constexpr CivilDate civil_from_days(DayNumber z) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp < 10 ? mp + 3 : mp - 9;
    return CivilDate{static_cast<int>(y + (m <= 2)), m, d};
}

/// 0 = Sunday ... 6 = Saturday.
constexpr unsigned weekday(DayNumber z) {
    return static_cast<unsigned>(z >= -4 ? (z + 4) % 7 : (z + 5) % 7 + 6);
}

inline std::string format_date(DayNumber z) {
    const CivilDate c = civil_from_days(z);
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", c.year, c.month, c.day);
    return buf;
}

namespace detail {

inline bool parse_uint(std::string_view s, unsigned& out) {
    if (s.empty()) return false;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && p == s.data() + s.size();
}

}  // namespace detail

/// Parse "YYYY-MM-DD".
inline std::optional<DayNumber> parse_date(std::string_view s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
    unsigned y, m, d;
    if (!detail::parse_uint(s.substr(0, 4), y) || !detail::parse_uint(s.substr(5, 2), m) ||
        !detail::parse_uint(s.substr(8, 2), d))
        return std::nullopt;
    if (m < 1 || m > 12 || d < 1 || d > 31) return std::nullopt;
    const DayNumber z = days_from_civil(static_cast<int>(y), m, d);
    if (civil_from_days(z) != CivilDate{static_cast<int>(y), m, d}) return std::nullopt;
    return z;
}

/// Parse an ISO-8601 timestamp "YYYY-MM-DDTHH:MM:SS[.fff](Z|+HH:MM|-HH:MM)"
/// into epoch seconds UTC. Without an offset suffix the value is read as
/// local time at `local_offset_min`, or rejected when that is not given.
inline std::optional<double> parse_iso8601(std::string_view s, std::optional<int> local_offset_min = std::nullopt) {
    if (s.size() < 19) return std::nullopt;
    const auto day = parse_date(s.substr(0, 10));
    if (!day || (s[10] != 'T' && s[10] != ' ') || s[13] != ':' || s[16] != ':') return std::nullopt;
    unsigned hh, mm, ss;
    if (!detail::parse_uint(s.substr(11, 2), hh) || !detail::parse_uint(s.substr(14, 2), mm) ||
        !detail::parse_uint(s.substr(17, 2), ss) || hh > 23 || mm > 59 || ss > 60)
        return std::nullopt;
    std::size_t pos = 19;
    double frac = 0.0;
    if (pos < s.size() && s[pos] == '.') {
        std::size_t end = pos + 1;
        while (end < s.size() && s[end] >= '0' && s[end] <= '9') ++end;
        if (end == pos + 1) return std::nullopt;
        double scale = 0.1;
        for (std::size_t i = pos + 1; i < end; ++i, scale *= 0.1) frac += (s[i] - '0') * scale;
        pos = end;
    }
    const std::string_view tz = s.substr(pos);
    int offset_s = 0;
    if (tz.empty()) {
        if (!local_offset_min) return std::nullopt;
        offset_s = *local_offset_min * 60;
    } else if (tz == "Z") {
        offset_s = 0;
    } else if (tz.size() == 6 && (tz[0] == '+' || tz[0] == '-') && tz[3] == ':') {
        unsigned oh, om;
        if (!detail::parse_uint(tz.substr(1, 2), oh) || !detail::parse_uint(tz.substr(4, 2), om) || oh > 23 ||
            om > 59)
            return std::nullopt;
        offset_s = static_cast<int>(oh * 3600 + om * 60) * (tz[0] == '-' ? -1 : 1);
    } else {
        return std::nullopt;
    }
    return static_cast<double>(*day) * 86400.0 + hh * 3600.0 + mm * 60.0 + ss + frac - offset_s;
}

/// A timestamp viewed in a fixed-offset local time zone.
struct LocalTime {
    DayNumber day = 0;
    double minute_of_day = 0.0;  // [0, 1440)
};

inline LocalTime to_local(double epoch_s, int tz_offset_min) {
    const double local_min = epoch_s / 60.0 + tz_offset_min;
    const double day = std::floor(local_min / 1440.0);
    double mod = local_min - day * 1440.0;
    if (mod >= 1440.0) mod = 0.0;  // guard floating round-up
    return LocalTime{static_cast<DayNumber>(day), mod};
}

/// Epoch seconds of a local wall-clock minute on a local day.
inline double from_local(DayNumber day, double minute_of_day, int tz_offset_min) {
    return (static_cast<double>(day) * 1440.0 + minute_of_day - tz_offset_min) * 60.0;
}

enum class DayType : int { Weekday = 0, Weekend = 1 };

inline const char* to_string(DayType t) { return t == DayType::Weekday ? "weekday" : "weekend"; }

/// Set of public holidays, expressed as local calendar days.
class HolidayCalendar {
public:
    HolidayCalendar() = default;
    explicit HolidayCalendar(std::set<DayNumber> days) : days_(std::move(days)) {}

    /// Japanese national holidays (including substitute holidays), 2019-2025.
    static HolidayCalendar japan();

    /// One "YYYY-MM-DD" per line; blank lines and '#' comments ignored.
    static HolidayCalendar load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw Error("cannot open holiday file: " + path);
        std::set<DayNumber> days;
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
            while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) line.pop_back();
            std::size_t b = 0;
            while (b < line.size() && std::isspace(static_cast<unsigned char>(line[b]))) ++b;
            if (b == line.size()) continue;
            auto d = parse_date(std::string_view(line).substr(b));
            if (!d) throw Error(path + ":" + std::to_string(lineno) + ": bad date '" + line + "'");
            days.insert(*d);
        }
        return HolidayCalendar(std::move(days));
    }

    bool is_holiday(DayNumber d) const { return days_.count(d) != 0; }

    DayType day_type(DayNumber d) const {
        const unsigned wd = weekday(d);
        return (wd == 0 || wd == 6 || is_holiday(d)) ? DayType::Weekend : DayType::Weekday;
    }

    const std::set<DayNumber>& days() const { return days_; }

private:
    std::set<DayNumber> days_;
};

inline HolidayCalendar HolidayCalendar::japan() {
    static constexpr const char* kDates[] = {
        // 2019
        "2019-01-01", "2019-01-14", "2019-02-11", "2019-03-21", "2019-04-29", "2019-04-30", "2019-05-01",
        "2019-05-02", "2019-05-03", "2019-05-04", "2019-05-05", "2019-05-06", "2019-07-15", "2019-08-11",
        "2019-08-12", "2019-09-16", "2019-09-23", "2019-10-14", "2019-10-22", "2019-11-03", "2019-11-04",
        "2019-11-23",
        // 2020
        "2020-01-01", "2020-01-13", "2020-02-11", "2020-02-23", "2020-02-24", "2020-03-20", "2020-04-29",
        "2020-05-03", "2020-05-04", "2020-05-05", "2020-05-06", "2020-07-23", "2020-07-24", "2020-08-10",
        "2020-09-21", "2020-09-22", "2020-11-03", "2020-11-23",
        // 2021
        "2021-01-01", "2021-01-11", "2021-02-11", "2021-02-23", "2021-03-20", "2021-04-29", "2021-05-03",
        "2021-05-04", "2021-05-05", "2021-07-22", "2021-07-23", "2021-08-08", "2021-08-09", "2021-09-20",
        "2021-09-23", "2021-11-03", "2021-11-23",
        // 2022
        "2022-01-01", "2022-01-10", "2022-02-11", "2022-02-23", "2022-03-21", "2022-04-29", "2022-05-03",
        "2022-05-04", "2022-05-05", "2022-07-18", "2022-08-11", "2022-09-19", "2022-09-23", "2022-10-10",
        "2022-11-03", "2022-11-23",
        // 2023
        "2023-01-01", "2023-01-02", "2023-01-09", "2023-02-11", "2023-02-23", "2023-03-21", "2023-04-29",
        "2023-05-03", "2023-05-04", "2023-05-05", "2023-07-17", "2023-08-11", "2023-09-18", "2023-09-23",
        "2023-10-09", "2023-11-03", "2023-11-23",
        // 2024
        "2024-01-01", "2024-01-08", "2024-02-11", "2024-02-12", "2024-02-23", "2024-03-20", "2024-04-29",
        "2024-05-03", "2024-05-04", "2024-05-05", "2024-05-06", "2024-07-15", "2024-08-11", "2024-08-12",
        "2024-09-16", "2024-09-22", "2024-09-23", "2024-10-14", "2024-11-03", "2024-11-04", "2024-11-23",
        // 2025
        "2025-01-01", "2025-01-13", "2025-02-11", "2025-02-23", "2025-02-24", "2025-03-20", "2025-04-29",
        "2025-05-03", "2025-05-04", "2025-05-05", "2025-05-06", "2025-07-21", "2025-08-11", "2025-09-15",
        "2025-09-23", "2025-10-13", "2025-11-03", "2025-11-23", "2025-11-24",
    };
    std::set<DayNumber> days;
    for (const char* s : kDates) days.insert(*parse_date(s));
    return HolidayCalendar(std::move(days));
}

/// Inclusive range of local calendar days.
struct DateRange {
    DayNumber first = 0;
    DayNumber last = 0;

    bool contains(DayNumber d) const { return d >= first && d <= last; }
    std::int64_t size() const { return last - first + 1; }
};

struct DayTypeCounts {
    int weekdays = 0;
    int weekend_days = 0;

    int operator[](DayType t) const { return t == DayType::Weekday ? weekdays : weekend_days; }
};

inline DayTypeCounts count_day_types(const DateRange& range, const HolidayCalendar& cal) {
    DayTypeCounts c;
    for (DayNumber d = range.first; d <= range.last; ++d) {
        if (cal.day_type(d) == DayType::Weekday)
            ++c.weekdays;
        else
            ++c.weekend_days;
    }
    return c;
}

}  // namespace area2vec
