#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string>

#include "area2vec/calendar.hpp"
#include "area2vec/geodata.hpp"

namespace area2vec {

inline constexpr int kArrivalBins = 12;   // two-hour windows
inline constexpr int kDurationBins = 7;   // last one ignores arrival time
inline constexpr int kLongStayBin = kDurationBins - 1;
inline constexpr int kNumCategories = 2 * kArrivalBins * (kDurationBins - 1) + 2;  // 146

/// Lower edges (minutes) of the duration bins; bin i is [edge[i], edge[i+1]).
inline constexpr std::array<double, kDurationBins> kDurationEdgesMin = {0, 30, 60, 120, 240, 360, 720};

inline constexpr std::array<const char*, kDurationBins> kDurationLabels = {
    "-29 min", "30-59 min", "60-119 min", "120-239 min", "240-359 min", "360-719 min", "720 min-"};

inline int duration_bin(double duration_min) {
    int bin = 0;
    for (int i = 1; i < kDurationBins; ++i)
        if (duration_min >= kDurationEdgesMin[i]) bin = i;
    return bin;
}

/// Day type x two-hour arrival window x duration bin. Stays of 720 minutes
/// or more carry no arrival window.
struct StayCategory {
    DayType day_type = DayType::Weekday;
    std::optional<int> arrival_bin;
    int duration_bin = 0;

    bool operator==(const StayCategory&) const = default;
};

inline StayCategory classify_stay(const Stay& stay, int tz_offset_min, const HolidayCalendar& holidays) {
    const LocalTime lt = to_local(stay.arrival, tz_offset_min);
    StayCategory c;
    c.day_type = holidays.day_type(lt.day);
    c.duration_bin = duration_bin(stay.duration_min);
    if (c.duration_bin != kLongStayBin)
        c.arrival_bin = std::min(kArrivalBins - 1, static_cast<int>(std::floor(lt.minute_of_day / 120.0)));
    return c;
}

/// Category id: day-major, then arrival window, then duration; the two
/// long-stay categories (weekday, weekend) take ids 144 and 145.
inline int encode(const StayCategory& c) {
    const int day = static_cast<int>(c.day_type);
    if (day < 0 || day > 1) throw Error("encode: invalid day type");
    if (c.duration_bin < 0 || c.duration_bin >= kDurationBins) throw Error("encode: duration bin out of range");
    if (c.duration_bin == kLongStayBin) {
        if (c.arrival_bin) throw Error("encode: long stays (>= 720 min) must not carry an arrival bin");
        return 2 * kArrivalBins * kLongStayBin + day;
    }
    if (!c.arrival_bin) throw Error("encode: arrival bin required for stays under 720 min");
    if (*c.arrival_bin < 0 || *c.arrival_bin >= kArrivalBins) throw Error("encode: arrival bin out of range");
    return day * kArrivalBins * kLongStayBin + *c.arrival_bin * kLongStayBin + c.duration_bin;
}

inline StayCategory decode(int id) {
    if (id < 0 || id >= kNumCategories) throw Error("decode: category id " + std::to_string(id) + " out of range");
    constexpr int kRegular = 2 * kArrivalBins * kLongStayBin;
    if (id >= kRegular) return StayCategory{static_cast<DayType>(id - kRegular), std::nullopt, kLongStayBin};
    const int per_day = kArrivalBins * kLongStayBin;
    return StayCategory{static_cast<DayType>(id / per_day), (id % per_day) / kLongStayBin, id % kLongStayBin};
}

/// Audit table: id,day_type,arrival_bin,duration_bin (arrival empty for long stays).
inline std::string dump_categories() {
    std::string out = "id,day_type,arrival_bin,duration_bin\n";
    for (int id = 0; id < kNumCategories; ++id) {
        const auto c = decode(id);
        out += std::to_string(id) + ',' + to_string(c.day_type) + ',' +
               (c.arrival_bin ? std::to_string(*c.arrival_bin) : std::string()) + ',' +
               std::to_string(c.duration_bin) + '\n';
    }
    return out;
}

}  // namespace area2vec
