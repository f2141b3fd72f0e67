#pragma once

#include <cmath>
#include <vector>

#include "area2vec/geodata.hpp"

namespace area2vec {

inline constexpr double kEarthRadiusM = 6371000.0;

/// Great-circle distance on a 6,371 km sphere.
inline double haversine_m(double lat1, double lon1, double lat2, double lon2) {
    constexpr double rad = M_PI / 180.0;
    const double dlat = (lat2 - lat1) * rad;
    const double dlon = (lon2 - lon1) * rad;
    const double s1 = std::sin(dlat / 2.0);
    const double s2 = std::sin(dlon / 2.0);
    const double a = s1 * s1 + std::cos(lat1 * rad) * std::cos(lat2 * rad) * s2 * s2;
    return 2.0 * kEarthRadiusM * std::asin(std::sqrt(std::min(1.0, a)));
}

inline double haversine_m(const GpsPoint& a, const GpsPoint& b) { return haversine_m(a.lat, a.lon, b.lat, b.lon); }

struct StayParams {
    double dist_threshold_m = 50.0;
    double time_threshold_min = 30.0;
    /// A silence longer than this between consecutive fixes ends a candidate.
    double max_gap_min = 360.0;

    void validate() const {
        if (!(dist_threshold_m > 0.0)) throw Error("stay params: dist_threshold_m must be > 0");
        if (!(time_threshold_min > 0.0)) throw Error("stay params: time_threshold_min must be > 0");
        if (!(max_gap_min > 0.0)) throw Error("stay params: max_gap_min must be > 0");
    }
};

/// Roam-radius stay detector.
///
/// From each start point the candidate grows while the next fix lies within
/// `dist_threshold_m` of the centroid of the fixes collected so far and the
/// time gap does not exceed `max_gap_min`. A candidate spanning at least
/// `time_threshold_min` becomes a stay and scanning resumes after it;
/// otherwise scanning resumes at the following point.
inline std::vector<Stay> extract_stays(const Trajectory& traj, const StayParams& params) {
    params.validate();
    const auto& pts = traj.points;
    const double min_span_s = params.time_threshold_min * 60.0;
    const double max_gap_s = params.max_gap_min * 60.0;

    std::vector<Stay> stays;
    std::size_t i = 0;
    while (i < pts.size()) {
        double sum_lat = pts[i].lat, sum_lon = pts[i].lon;
        std::size_t j = i + 1;
        for (; j < pts.size(); ++j) {
            if (pts[j].t - pts[j - 1].t > max_gap_s) break;
            const double n = static_cast<double>(j - i);
            if (haversine_m(sum_lat / n, sum_lon / n, pts[j].lat, pts[j].lon) > params.dist_threshold_m) break;
            sum_lat += pts[j].lat;
            sum_lon += pts[j].lon;
        }
        const std::size_t last = j - 1;
        const double span = pts[last].t - pts[i].t;
        if (span >= min_span_s) {
            const double n = static_cast<double>(j - i);
            stays.push_back(Stay{sum_lat / n, sum_lon / n, pts[i].t, span / 60.0, std::nullopt});
            i = j;
        } else {
            ++i;
        }
    }
    return stays;
}

inline StaySet extract_all_stays(const TrajectorySet& trajectories, const StayParams& params) {
    StaySet out;
    for (const auto& [user, traj] : trajectories) {
        auto stays = extract_stays(traj, params);
        if (!stays.empty()) out.emplace(user, std::move(stays));
    }
    return out;
}

}  // namespace area2vec
