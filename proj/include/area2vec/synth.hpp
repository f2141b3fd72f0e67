#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "area2vec/calendar.hpp"
#include "area2vec/common.hpp"
#include "area2vec/geodata.hpp"
#include "area2vec/mesh.hpp"

namespace area2vec::synth {

enum class ZoneFunction : int { Residential = 0, Office = 1, Shopping = 2, Entertainment = 3 };
inline constexpr int kNumFunctions = 4;

inline const char* to_string(ZoneFunction f) {
    switch (f) {
        case ZoneFunction::Residential: return "residential";
        case ZoneFunction::Office: return "office";
        case ZoneFunction::Shopping: return "shopping";
        case ZoneFunction::Entertainment: return "entertainment";
    }
    return "?";
}

inline std::optional<ZoneFunction> function_from_string(std::string_view s) {
    for (int i = 0; i < kNumFunctions; ++i)
        if (s == to_string(static_cast<ZoneFunction>(i))) return static_cast<ZoneFunction>(i);
    return std::nullopt;
}

/// Rectangle in meters north/east of the city bounding box's southwest corner.
struct RectM {
    double south = 0.0;
    double west = 0.0;
    double north = 0.0;
    double east = 0.0;

    bool contains(double north_m, double east_m) const {
        return north_m >= south && north_m <= north && east_m >= west && east_m <= east;
    }
    bool overlaps(const RectM& o) const { return south < o.north && o.south < north && west < o.east && o.west < east; }
};

/// One kind of visit a zone receives. `activity` selects which behavior
/// modifier scales it, so a zone can host visits of several kinds.
struct VisitTemplate {
    ZoneFunction activity = ZoneFunction::Shopping;
    std::array<double, 2> rate{};        // expected visits per agent per day, by DayType
    double arrival_from_min = 0.0;       // local minute of day, window start
    double arrival_to_min = 0.0;         // window end (exclusive)
    double duration_from_min = 30.0;
    double duration_to_min = 60.0;
};

struct ZoneSpec {
    ZoneFunction function = ZoneFunction::Residential;
    RectM rect;
    std::vector<VisitTemplate> schedule;
};

struct ScenarioConfig {
    BoundingBox bbox;
    double cell_m = 50.0;
    std::vector<ZoneSpec> zones;
    int n_agents = 500;
    DateRange period;
    int tz_offset_min = 540;
    HolidayCalendar holidays;
    double gps_noise_m = 10.0;
    double sample_interval_s = 300.0;
    std::uint64_t seed = 7;
    /// Multipliers on visit rates, by activity.
    std::array<double, kNumFunctions> visit_rate_modifier{1.0, 1.0, 1.0, 1.0};
    /// Multipliers on visit durations, by activity.
    std::array<double, kNumFunctions> duration_modifier{1.0, 1.0, 1.0, 1.0};
    /// Minimum silence between consecutive visits of one agent.
    double travel_gap_min = 15.0;

    double width_m() const {
        return (bbox.east - bbox.west) * meters_per_degree_lon(0.5 * (bbox.south + bbox.north));
    }
    double height_m() const { return (bbox.north - bbox.south) * kMetersPerDegreeLat; }

    void validate() const {
        if (n_agents < 1) throw Error("scenario: n_agents must be >= 1");
        if (!(gps_noise_m >= 0.0)) throw Error("scenario: gps_noise_m must be >= 0");
        if (!(sample_interval_s > 0.0)) throw Error("scenario: sample_interval_s must be > 0");
        if (period.last < period.first) throw Error("scenario: empty period");
        if (zones.empty()) throw Error("scenario: no zones");
        const double w = width_m(), h = height_m();
        for (std::size_t i = 0; i < zones.size(); ++i) {
            const auto& r = zones[i].rect;
            if (!(r.south < r.north && r.west < r.east) || r.south < 0 || r.west < 0 || r.north > h + 1e-6 ||
                r.east > w + 1e-6)
                throw Error("scenario: zone " + std::to_string(i) + " rectangle is empty or outside the city");
            for (std::size_t j = 0; j < i; ++j)
                if (r.overlaps(zones[j].rect))
                    throw Error("scenario: zones " + std::to_string(j) + " and " + std::to_string(i) + " overlap");
            for (const auto& t : zones[i].schedule) {
                if (t.rate[0] < 0 || t.rate[1] < 0) throw Error("scenario: negative visit rate");
                if (!(t.arrival_from_min >= 0 && t.arrival_from_min < t.arrival_to_min && t.arrival_to_min <= 1440))
                    throw Error("scenario: bad arrival window");
                if (!(t.duration_from_min > 0 && t.duration_from_min <= t.duration_to_min))
                    throw Error("scenario: bad duration window");
            }
        }
        for (double m : visit_rate_modifier)
            if (m < 0) throw Error("scenario: negative visit-rate modifier");
        for (double m : duration_modifier)
            if (!(m > 0)) throw Error("scenario: duration modifiers must be > 0");
    }
};

/// Default city: a 900 m x 1100 m district with one zone per function.
///
/// Schedules follow the qualitative cluster descriptions: offices get long
/// weekday stays from about 8:00; entertainment gets 2-6 hour stays from the
/// evening, plus some daytime dining; residences get 12 h+ stays from the
/// evening; shopping gets short daytime stays, busier on weekends, with
/// lunch and dinner peaks. All magnitudes are synthetic.
inline ScenarioConfig default_scenario() {
    ScenarioConfig s;
    s.bbox = bbox_from_origin(38.2600, 140.8650, 900.0, 1100.0);
    s.period = DateRange{*parse_date("2023-06-05"), *parse_date("2023-07-02")};  // 4 weeks, no holidays
    s.holidays = HolidayCalendar::japan();
    using F = ZoneFunction;
    const double H = 60.0;
    s.zones = {
        {F::Residential,
         {600, 100, 800, 350},
         {{F::Residential, {0.72, 0.80}, 17 * H, 22 * H, 720, 900}}},
        {F::Office,
         {600, 700, 800, 950},
         {{F::Office, {1.50, 0.10}, 7.5 * H, 9 * H, 420, 660}}},
        {F::Shopping,
         {100, 100, 350, 400},
         {{F::Shopping, {0.18, 0.32}, 11.5 * H, 13 * H, 30, 90},
          {F::Shopping, {0.18, 0.36}, 10 * H, 17.5 * H, 30, 119},
          {F::Shopping, {0.14, 0.22}, 17.5 * H, 19.5 * H, 40, 110}}},
        {F::Entertainment,
         {100, 650, 300, 900},
         {{F::Entertainment, {0.42, 0.60}, 19.5 * H, 23 * H, 120, 330},
          {F::Shopping, {0.05, 0.08}, 11.5 * H, 13.5 * H, 30, 80}}},
    };
    return s;
}

/// Default city under stay-at-home conditions: half the office visits,
/// 80% fewer entertainment visits, and longer residential stays.
inline ScenarioConfig pandemic_scenario() {
    ScenarioConfig s = default_scenario();
    s.visit_rate_modifier[static_cast<int>(ZoneFunction::Office)] = 0.5;
    s.visit_rate_modifier[static_cast<int>(ZoneFunction::Entertainment)] = 0.2;
    s.duration_modifier[static_cast<int>(ZoneFunction::Residential)] = 1.25;
    return s;
}

struct ScheduledVisit {
    std::size_t zone = 0;
    ZoneFunction activity = ZoneFunction::Residential;
    double arrival = 0.0;   // epoch seconds
    double duration_s = 0.0;
    double north_m = 0.0;   // noiseless position
    double east_m = 0.0;

    double departure() const { return arrival + duration_s; }
};

struct SynthOutput {
    TrajectorySet trajectories;
    std::map<std::string, std::vector<ScheduledVisit>> visits;
    Grid grid;
    std::vector<std::optional<ZoneFunction>> ground_truth;  // per grid cell
};

inline std::string agent_id(int i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "agent_%05d", i);
    return buf;
}

/// Ground truth: each cell whose interior intersects a zone rectangle.
inline std::vector<std::optional<ZoneFunction>> ground_truth_cells(const ScenarioConfig& cfg, const Grid& grid) {
    std::vector<std::optional<ZoneFunction>> gt(grid.n_cells());
    for (const auto& z : cfg.zones) {
        const auto r0 = static_cast<std::size_t>(std::max(0.0, std::floor(z.rect.south / cfg.cell_m)));
        const auto r1 = static_cast<std::size_t>(std::ceil(z.rect.north / cfg.cell_m));
        const auto c0 = static_cast<std::size_t>(std::max(0.0, std::floor(z.rect.west / cfg.cell_m)));
        const auto c1 = static_cast<std::size_t>(std::ceil(z.rect.east / cfg.cell_m));
        for (std::size_t r = r0; r < std::min(r1, grid.n_rows); ++r)
            for (std::size_t c = c0; c < std::min(c1, grid.n_cols); ++c) {
                auto& slot = gt[grid.index({r, c})];
                if (slot && *slot != z.function) throw Error("synth: cell shared by zones of different function");
                slot = z.function;
            }
    }
    return gt;
}

inline std::vector<ScheduledVisit> schedule_agent(const ScenarioConfig& cfg, Rng& rng) {
    std::vector<ScheduledVisit> candidates;
    for (DayNumber day = cfg.period.first; day <= cfg.period.last; ++day) {
        const int type = static_cast<int>(cfg.holidays.day_type(day));
        for (std::size_t zi = 0; zi < cfg.zones.size(); ++zi) {
            const auto& zone = cfg.zones[zi];
            for (const auto& t : zone.schedule) {
                const int act = static_cast<int>(t.activity);
                const unsigned n = rng.poisson(t.rate[type] * cfg.visit_rate_modifier[act]);
                for (unsigned v = 0; v < n; ++v) {
                    ScheduledVisit sv;
                    sv.zone = zi;
                    sv.activity = t.activity;
                    const double arr_s = std::round(rng.uniform(t.arrival_from_min, t.arrival_to_min) * 60.0);
                    sv.arrival = static_cast<double>(day) * 86400.0 + arr_s - cfg.tz_offset_min * 60.0;
                    sv.duration_s =
                        std::round(rng.uniform(t.duration_from_min, t.duration_to_min) * cfg.duration_modifier[act] * 60.0);
                    sv.north_m = rng.uniform(zone.rect.south, zone.rect.north);
                    sv.east_m = rng.uniform(zone.rect.west, zone.rect.east);
                    candidates.push_back(sv);
                }
            }
        }
    }
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const ScheduledVisit& a, const ScheduledVisit& b) { return a.arrival < b.arrival; });
    std::vector<ScheduledVisit> kept;
    for (const auto& c : candidates)
        if (kept.empty() || c.arrival >= kept.back().departure() + cfg.travel_gap_min * 60.0) kept.push_back(c);
    return kept;
}

/// Fixes every `sample_interval_s` from arrival, plus one at departure,
/// each displaced by isotropic Gaussian noise.
inline std::vector<GpsPoint> emit_points(const ScenarioConfig& cfg, const ScheduledVisit& v, Rng& rng) {
    const double mlon = meters_per_degree_lon(0.5 * (cfg.bbox.south + cfg.bbox.north));
    std::vector<GpsPoint> pts;
    auto emit = [&](double t) {
        const double dn = cfg.gps_noise_m > 0 ? rng.normal() * cfg.gps_noise_m : 0.0;
        const double de = cfg.gps_noise_m > 0 ? rng.normal() * cfg.gps_noise_m : 0.0;
        pts.push_back({cfg.bbox.south + (v.north_m + dn) / kMetersPerDegreeLat, cfg.bbox.west + (v.east_m + de) / mlon, t});
    };
    const double end = v.departure();
    double t = v.arrival;
    for (; t < end; t += cfg.sample_interval_s) emit(t);
    emit(end);
    return pts;
}

/// Deterministic given the config; each agent draws from its own stream.
inline SynthOutput generate(const ScenarioConfig& cfg) {
    cfg.validate();
    SynthOutput out;
    out.grid = build_grid(cfg.bbox, cfg.cell_m);
    out.ground_truth = ground_truth_cells(cfg, out.grid);
    for (int a = 0; a < cfg.n_agents; ++a) {
        Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(a)));
        auto visits = schedule_agent(cfg, rng);
        Trajectory traj{agent_id(a), {}};
        for (const auto& v : visits) {
            auto pts = emit_points(cfg, v, rng);
            traj.points.insert(traj.points.end(), pts.begin(), pts.end());
        }
        if (!traj.points.empty()) out.trajectories.emplace(traj.user_id, std::move(traj));
        out.visits.emplace(agent_id(a), std::move(visits));
    }
    return out;
}

inline std::string serialize_ground_truth(const Grid& grid, const std::vector<std::optional<ZoneFunction>>& gt) {
    std::string out = "row,col,function\n";
    for (std::size_t cell = 0; cell < gt.size(); ++cell) {
        if (!gt[cell]) continue;
        const auto rc = grid.coord(cell);
        out += std::to_string(rc.row) + ',' + std::to_string(rc.col) + ',' + to_string(*gt[cell]) + '\n';
    }
    return out;
}

}  // namespace area2vec::synth
