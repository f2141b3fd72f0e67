#pragma once

#include <array>
#include <cmath>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "area2vec/calendar.hpp"
#include "area2vec/cluster.hpp"
#include "area2vec/encoding.hpp"
#include "area2vec/geodata.hpp"
#include "area2vec/io.hpp"
#include "area2vec/mesh.hpp"

namespace area2vec {

inline constexpr int kTimeBins = 48;  // 30-minute bins per day
inline constexpr double kBinMinutes = 30.0;

struct OccupiedBin {
    int day_offset = 0;
    int bin = 0;

    bool operator==(const OccupiedBin&) const = default;
    auto operator<=>(const OccupiedBin&) const = default;
};

/// Every 30-minute bin touched by [start, start + duration], both ends
/// included; bins past midnight roll over into the following day(s).
inline std::vector<OccupiedBin> occupied_bins(double arrival_minute_of_day, double duration_min) {
    if (!(duration_min > 0.0)) throw Error("occupied_bins: duration must be > 0");
    const auto first = static_cast<long>(std::floor(arrival_minute_of_day / kBinMinutes));
    const auto last = static_cast<long>(std::floor((arrival_minute_of_day + duration_min) / kBinMinutes));
    std::vector<OccupiedBin> out;
    out.reserve(static_cast<std::size_t>(last - first + 1));
    for (long b = first; b <= last; ++b)
        out.push_back({static_cast<int>(b / kTimeBins), static_cast<int>(b % kTimeBins)});
    return out;
}

using ProfileMatrix = std::array<std::array<std::array<double, kDurationBins>, kTimeBins>, 2>;

/// People per area per day, by day type, half-hour bin and duration layer.
struct ClusterProfile {
    std::size_t cluster_id = 0;
    std::size_t n_areas = 0;
    DayTypeCounts day_counts;
    ProfileMatrix matrix{};

    double total() const {
        double s = 0.0;
        for (const auto& day : matrix)
            for (const auto& bin : day)
                for (double v : bin) s += v;
        return s;
    }

    /// Sum over duration layers of bins [first_bin, last_bin] for one day type.
    double mass(DayType t, int first_bin, int last_bin) const {
        double s = 0.0;
        for (int b = first_bin; b <= last_bin; ++b)
            for (double v : matrix[static_cast<int>(t)][b]) s += v;
        return s;
    }
};

/// Per-cluster stacked-bar profiles over `period`.
///
/// Each stay adds one person to every bin it occupies, in the layer of its
/// duration bin, under the day type of the calendar day the bin falls on.
/// Bins on days outside `period` are ignored. Counts are then divided by the
/// number of areas in the cluster and by the day count of the day type.
inline std::vector<ClusterProfile> build_profiles(const StaySet& stays, const Clustering& clustering,
                                                  int tz_offset_min, const HolidayCalendar& holidays,
                                                  const DateRange& period) {
    const DayTypeCounts days = count_day_types(period, holidays);
    if (days.weekdays == 0 || days.weekend_days == 0)
        throw Error("build_profiles: period " + format_date(period.first) + ".." + format_date(period.last) +
                    " needs at least one weekday and one weekend day");

    std::vector<ClusterProfile> profiles(clustering.k);
    for (std::size_t c = 0; c < clustering.k; ++c) {
        profiles[c].cluster_id = c;
        profiles[c].day_counts = days;
    }
    for (auto cl : clustering.assignments) ++profiles.at(cl).n_areas;

    for (const auto& [user, seq] : stays) {
        for (const auto& s : seq) {
            if (!s.area_id) continue;
            if (*s.area_id >= clustering.assignments.size())
                throw Error("build_profiles: stay references area " + std::to_string(*s.area_id) +
                            " missing from clustering");
            auto& m = profiles[clustering.assignments[*s.area_id]].matrix;
            const LocalTime lt = to_local(s.arrival, tz_offset_min);
            const int layer = duration_bin(s.duration_min);
            for (const auto& ob : occupied_bins(lt.minute_of_day, s.duration_min)) {
                const DayNumber d = lt.day + ob.day_offset;
                if (!period.contains(d)) continue;
                m[static_cast<int>(holidays.day_type(d))][ob.bin][layer] += 1.0;
            }
        }
    }
    for (auto& p : profiles) {
        if (p.n_areas == 0) continue;
        for (int t = 0; t < 2; ++t) {
            const double norm = static_cast<double>(p.n_areas) * days[static_cast<DayType>(t)];
            for (auto& bin : p.matrix[t])
                for (double& v : bin) v /= norm;
        }
    }
    return profiles;
}

inline nlohmann::json profile_to_json(const ClusterProfile& p) {
    nlohmann::json m = nlohmann::json::array();
    for (const auto& day : p.matrix) {
        nlohmann::json bins = nlohmann::json::array();
        for (const auto& bin : day) bins.push_back(bin);
        m.push_back(std::move(bins));
    }
    return {{"cluster_id", p.cluster_id},
            {"n_areas", p.n_areas},
            {"day_counts", {{"weekday", p.day_counts.weekdays}, {"weekend", p.day_counts.weekend_days}}},
            {"matrix", std::move(m)}};
}

inline ClusterProfile profile_from_json(const nlohmann::json& j) {
    ClusterProfile p;
    p.cluster_id = j.at("cluster_id").get<std::size_t>();
    p.n_areas = j.at("n_areas").get<std::size_t>();
    p.day_counts.weekdays = j.at("day_counts").at("weekday").get<int>();
    p.day_counts.weekend_days = j.at("day_counts").at("weekend").get<int>();
    const auto& m = j.at("matrix");
    for (int t = 0; t < 2; ++t)
        for (int b = 0; b < kTimeBins; ++b)
            for (int l = 0; l < kDurationBins; ++l) p.matrix[t][b][l] = m.at(t).at(b).at(l).get<double>();
    return p;
}

inline nlohmann::json profiles_to_json(const std::vector<ClusterProfile>& profiles) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& p : profiles) arr.push_back(profile_to_json(p));
    return arr;
}

// ---------------------------------------------------------------------------
// SVG stacked bars
// ---------------------------------------------------------------------------

inline constexpr std::array<const char*, kDurationBins> kLayerColors = {
    "#4e79a7", "#59a14f", "#edc948", "#f28e2b", "#e15759", "#b07aa1", "#76b7b2"};

/// Largest stacked bar over all clusters and both day types.
inline double shared_y_max(const std::vector<ClusterProfile>& profiles) {
    double mx = 0.0;
    for (const auto& p : profiles)
        for (const auto& day : p.matrix)
            for (const auto& bin : day) {
                double s = 0.0;
                for (double v : bin) s += v;
                mx = std::max(mx, s);
            }
    return mx;
}

/// One panel: 48 bars, layers stacked bottom-up in duration order.
inline std::string render_profile_panel_svg(const ClusterProfile& p, DayType type, double y_max) {
    constexpr double W = 760, H = 360, left = 60, right = 150, top = 40, bottom = 50;
    constexpr double pw = W - left - right, ph = H - top - bottom;
    const double ymax = y_max > 0.0 ? y_max : 1.0;
    const double slot = pw / kTimeBins;
    auto f = [](double v) { return io::fmt_fixed(v, 2); };

    std::string s;
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + f(W) + "\" height=\"" + f(H) +
         "\" viewBox=\"0 0 " + f(W) + " " + f(H) + "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    s += "<rect class=\"background\" x=\"0\" y=\"0\" width=\"" + f(W) + "\" height=\"" + f(H) +
         "\" fill=\"#ffffff\"/>\n";
    s += "<text x=\"" + f(left) + "\" y=\"24\" font-size=\"14\">cluster " + std::to_string(p.cluster_id) + " (" +
         to_string(type) + ", " + std::to_string(p.n_areas) + " areas)</text>\n";

    // axes
    s += "<line class=\"axis\" x1=\"" + f(left) + "\" y1=\"" + f(top + ph) + "\" x2=\"" + f(left + pw) + "\" y2=\"" +
         f(top + ph) + "\" stroke=\"#000000\"/>\n";
    s += "<line class=\"axis\" x1=\"" + f(left) + "\" y1=\"" + f(top) + "\" x2=\"" + f(left) + "\" y2=\"" +
         f(top + ph) + "\" stroke=\"#000000\"/>\n";
    for (int h = 0; h <= 24; h += 3) {
        const double x = left + h * 2 * slot;
        s += "<line class=\"tick\" x1=\"" + f(x) + "\" y1=\"" + f(top + ph) + "\" x2=\"" + f(x) + "\" y2=\"" +
             f(top + ph + 4) + "\" stroke=\"#000000\"/>\n";
        s += "<text x=\"" + f(x) + "\" y=\"" + f(top + ph + 16) + "\" text-anchor=\"middle\">" + std::to_string(h) +
             ":00</text>\n";
    }
    for (int i = 0; i <= 4; ++i) {
        const double y = top + ph - ph * i / 4.0;
        s += "<line class=\"tick\" x1=\"" + f(left - 4) + "\" y1=\"" + f(y) + "\" x2=\"" + f(left) + "\" y2=\"" +
             f(y) + "\" stroke=\"#000000\"/>\n";
        s += "<text x=\"" + f(left - 6) + "\" y=\"" + f(y + 4) + "\" text-anchor=\"end\">" +
             io::fmt_fixed(ymax * i / 4.0, 2) + "</text>\n";
    }
    s += "<text x=\"" + f(left + pw / 2) + "\" y=\"" + f(H - 10) +
         "\" text-anchor=\"middle\">time of day (30-minute bins)</text>\n";
    s += "<text x=\"14\" y=\"" + f(top + ph / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 14 " +
         f(top + ph / 2) + ")\">people per area per day</text>\n";

    // legend
    for (int l = 0; l < kDurationBins; ++l) {
        const double y = top + 18.0 * (kDurationBins - 1 - l);
        s += "<rect class=\"legend\" x=\"" + f(left + pw + 16) + "\" y=\"" + f(y) + "\" width=\"12\" height=\"12\" fill=\"" +
             kLayerColors[l] + "\"/>\n";
        s += "<text x=\"" + f(left + pw + 34) + "\" y=\"" + f(y + 10) + "\">" + kDurationLabels[l] + "</text>\n";
    }

    // bars
    const auto& day = p.matrix[static_cast<int>(type)];
    for (int b = 0; b < kTimeBins; ++b) {
        double base = 0.0;
        for (int l = 0; l < kDurationBins; ++l) {
            const double v = day[b][l];
            if (!(v > 0.0)) continue;
            const double y0 = top + ph - ph * base / ymax;
            const double y1 = top + ph - ph * (base + v) / ymax;
            s += "<rect class=\"bar\" x=\"" + f(left + b * slot + 0.1 * slot) + "\" y=\"" + f(y1) + "\" width=\"" +
                 f(0.8 * slot) + "\" height=\"" + f(y0 - y1) + "\" fill=\"" + kLayerColors[l] + "\"/>\n";
            base += v;
        }
    }
    s += "</svg>\n";
    return s;
}

/// Writes cluster_<id>_<weekday|weekend>.svg into `out_dir`; returns the paths.
inline std::vector<std::filesystem::path> render_profile_svg(const std::vector<ClusterProfile>& profiles,
                                                             const std::filesystem::path& out_dir) {
    const double ymax = shared_y_max(profiles);
    std::vector<std::filesystem::path> written;
    for (const auto& p : profiles) {
        for (DayType t : {DayType::Weekday, DayType::Weekend}) {
            auto path = out_dir / ("cluster_" + std::to_string(p.cluster_id) + "_" + to_string(t) + ".svg");
            io::write_file(path, render_profile_panel_svg(p, t, ymax));
            written.push_back(std::move(path));
        }
    }
    return written;
}

// ---------------------------------------------------------------------------
// GeoJSON
// ---------------------------------------------------------------------------

/// Closed counter-clockwise ring [lon, lat] of a cell.
inline nlohmann::json cell_polygon(const Grid& grid, std::size_t cell) {
    const auto rc = grid.coord(cell);
    const double s = grid.cell_south(rc.row), n = grid.cell_south(rc.row + 1);
    const double w = grid.cell_west(rc.col), e = grid.cell_west(rc.col + 1);
    return {{"type", "Polygon"},
            {"coordinates", nlohmann::json::array({nlohmann::json::array({{w, s}, {e, s}, {e, n}, {w, n}, {w, s}})})}};
}

/// One Polygon feature per retained area, colored by cluster.
inline nlohmann::json render_geojson(const Grid& grid, const AreaVocabulary& vocab, const Clustering& clustering) {
    if (clustering.assignments.size() != vocab.size())
        throw Error("render_geojson: clustering covers " + std::to_string(clustering.assignments.size()) +
                    " areas but vocabulary has " + std::to_string(vocab.size()));
    nlohmann::json features = nlohmann::json::array();
    for (std::size_t a = 0; a < vocab.size(); ++a) {
        const auto cell = vocab.cell(a);
        const auto [lat, lon] = grid.center(cell);
        features.push_back({{"type", "Feature"},
                            {"geometry", cell_polygon(grid, cell)},
                            {"properties",
                             {{"area_id", a},
                              {"cluster_id", clustering.assignments[a]},
                              {"stay_count", vocab.stay_count(a)},
                              {"center_lat", lat},
                              {"center_lon", lon}}}});
    }
    return {{"type", "FeatureCollection"}, {"features", std::move(features)}};
}

}  // namespace area2vec
