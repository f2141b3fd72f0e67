#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "area2vec/calendar.hpp"
#include "area2vec/common.hpp"
#include "area2vec/io.hpp"

namespace area2vec {

/// One GPS fix: WGS84 degrees and epoch seconds (UTC).
struct GpsPoint {
    double lat = 0.0;
    double lon = 0.0;
    double t = 0.0;

    bool operator==(const GpsPoint&) const = default;
};

inline bool valid_coordinates(double lat, double lon) {
    return std::isfinite(lat) && std::isfinite(lon) && lat >= -90.0 && lat <= 90.0 && lon >= -180.0 &&
           lon <= 180.0;
}

inline bool valid(const GpsPoint& p) { return valid_coordinates(p.lat, p.lon) && std::isfinite(p.t) && p.t >= 0.0; }

/// A user's fixes in strictly increasing time order.
struct Trajectory {
    std::string user_id;
    std::vector<GpsPoint> points;

    bool is_strictly_increasing() const {
        for (std::size_t i = 1; i < points.size(); ++i)
            if (!(points[i].t > points[i - 1].t)) return false;
        return true;
    }
};

using TrajectorySet = std::map<std::string, Trajectory>;

/// An episode where a user remained in one place.
struct Stay {
    double lat = 0.0;
    double lon = 0.0;
    double arrival = 0.0;       // epoch seconds UTC
    double duration_min = 0.0;  // > 0
    std::optional<std::size_t> area_id;

    double departure() const { return arrival + duration_min * 60.0; }

    bool operator==(const Stay&) const = default;
};

/// True iff no stay starts before the previous one has ended.
inline bool validate_stay_sequence(const std::vector<Stay>& stays) {
    for (std::size_t i = 1; i < stays.size(); ++i)
        if (stays[i].arrival < stays[i - 1].departure()) return false;
    return true;
}

struct ParseStats {
    std::size_t rows = 0;        // data rows seen
    std::size_t accepted = 0;    // points kept
    std::size_t rejects = 0;     // unparseable or out-of-range rows
    std::size_t duplicates = 0;  // repeated (user, t) rows dropped
};

struct ParsedTrajectories {
    TrajectorySet trajectories;
    ParseStats stats;
};

inline constexpr std::string_view kTrajectoryHeader = "user_id,lat,lon,timestamp";

namespace detail {

inline std::optional<double> parse_timestamp(std::string_view s, int tz_offset_min) {
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
    const bool iso = s.size() >= 10 && s[4] == '-' && s[7] == '-';
    if (iso) return parse_iso8601(s, tz_offset_min);
    double v;
    if (io::parse_double(s, v)) return v;
    return std::nullopt;
}

}  // namespace detail

/// Parse the trajectory CSV format (header `user_id,lat,lon,timestamp`).
///
/// Timestamps are integer/decimal epoch seconds or ISO-8601. ISO values
/// without an explicit offset are read as local time at `tz_offset_min`.
/// Bad rows are counted in `stats.rejects`; a bad header throws ParseError.
/// Within a user, the first row seen for a given timestamp wins.
inline ParsedTrajectories parse_trajectories(std::string_view text, int tz_offset_min) {
    io::LineReader reader(text);
    std::string_view line;
    if (!reader.next(line)) throw ParseError("empty trajectory input: missing header");
    if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.remove_prefix(3);  // UTF-8 BOM
    {
        auto cols = io::split_csv(line);
        for (auto& c : cols) {
            while (!c.empty() && c.back() == ' ') c.pop_back();
            while (!c.empty() && c.front() == ' ') c.erase(c.begin());
        }
        if (cols != std::vector<std::string>{"user_id", "lat", "lon", "timestamp"})
            throw ParseError("malformed header: expected '" + std::string(kTrajectoryHeader) + "', got '" +
                             std::string(line) + "'");
    }

    ParsedTrajectories out;
    // Keep input order per user so that a stable sort keeps the first duplicate.
    std::map<std::string, std::vector<GpsPoint>> raw;
    while (reader.next(line)) {
        if (line.empty()) continue;
        ++out.stats.rows;
        const auto f = io::split_csv(line);
        GpsPoint p;
        std::optional<double> t;
        if (f.size() != 4 || f[0].empty() || !io::parse_double(f[1], p.lat) || !io::parse_double(f[2], p.lon) ||
            !(t = detail::parse_timestamp(f[3], tz_offset_min))) {
            ++out.stats.rejects;
            continue;
        }
        p.t = *t;
        if (!valid(p)) {
            ++out.stats.rejects;
            continue;
        }
        raw[f[0]].push_back(p);
    }

    for (auto& [user, pts] : raw) {
        std::stable_sort(pts.begin(), pts.end(), [](const GpsPoint& a, const GpsPoint& b) { return a.t < b.t; });
        Trajectory traj{user, {}};
        traj.points.reserve(pts.size());
        for (const auto& p : pts) {
            if (!traj.points.empty() && traj.points.back().t == p.t) {
                ++out.stats.duplicates;
                continue;
            }
            traj.points.push_back(p);
        }
        out.stats.accepted += traj.points.size();
        out.trajectories.emplace(user, std::move(traj));
    }
    return out;
}

inline ParsedTrajectories load_trajectories(const std::string& path, int tz_offset_min) {
    return parse_trajectories(io::read_file(path), tz_offset_min);
}

/// Serialize in the same CSV format with epoch-second timestamps.
inline std::string serialize_trajectories(const TrajectorySet& set) {
    std::string out(kTrajectoryHeader);
    out += '\n';
    for (const auto& [user, traj] : set) {
        const std::string uid = io::csv_field(user);
        for (const auto& p : traj.points) {
            out += uid;
            out += ',';
            out += io::fmt_double(p.lat);
            out += ',';
            out += io::fmt_double(p.lon);
            out += ',';
            out += io::fmt_double(p.t);
            out += '\n';
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Stays file: user_id,lat,lon,arrival_epoch,duration_min
// ---------------------------------------------------------------------------

using StaySet = std::map<std::string, std::vector<Stay>>;

inline constexpr std::string_view kStayHeader = "user_id,lat,lon,arrival_epoch,duration_min";

inline std::string serialize_stays(const StaySet& stays) {
    std::string out(kStayHeader);
    out += '\n';
    for (const auto& [user, seq] : stays) {
        const std::string uid = io::csv_field(user);
        for (const auto& s : seq) {
            out += uid + ',' + io::fmt_double(s.lat) + ',' + io::fmt_double(s.lon) + ',' + io::fmt_double(s.arrival) +
                   ',' + io::fmt_double(s.duration_min) + '\n';
        }
    }
    return out;
}

inline StaySet parse_stays(std::string_view text) {
    io::LineReader reader(text);
    std::string_view line;
    if (!reader.next(line) || line != kStayHeader)
        throw ParseError("malformed stays header: expected '" + std::string(kStayHeader) + "'");
    StaySet out;
    while (reader.next(line)) {
        if (line.empty()) continue;
        const auto f = io::split_csv(line);
        Stay s;
        if (f.size() != 5 || !io::parse_double(f[1], s.lat) || !io::parse_double(f[2], s.lon) ||
            !io::parse_double(f[3], s.arrival) || !io::parse_double(f[4], s.duration_min) ||
            !valid_coordinates(s.lat, s.lon) || !(s.duration_min > 0.0))
            throw ParseError("bad stay row at line " + std::to_string(reader.lineno()));
        out[f[0]].push_back(s);
    }
    for (auto& [user, seq] : out) {
        std::stable_sort(seq.begin(), seq.end(), [](const Stay& a, const Stay& b) { return a.arrival < b.arrival; });
        if (!validate_stay_sequence(seq)) throw ParseError("overlapping stays for user " + user);
    }
    return out;
}

}  // namespace area2vec
