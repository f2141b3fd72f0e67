#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "area2vec/geodata.hpp"
#include "area2vec/io.hpp"
#include "area2vec/staydetect.hpp"

namespace area2vec {

struct BoundingBox {
    double south = 0.0;
    double west = 0.0;
    double north = 0.0;
    double east = 0.0;

    bool contains(double lat, double lon) const { return lat >= south && lat <= north && lon >= west && lon <= east; }
};

inline constexpr double kMetersPerDegreeLat = kEarthRadiusM * M_PI / 180.0;

inline double meters_per_degree_lon(double lat) { return kMetersPerDegreeLat * std::cos(lat * M_PI / 180.0); }

/// Bounding box of `height_m` x `width_m` whose southwest corner is (lat, lon),
/// using the same local equirectangular scale that Grid uses.
inline BoundingBox bbox_from_origin(double lat, double lon, double height_m, double width_m) {
    const double north = lat + height_m / kMetersPerDegreeLat;
    const double center = 0.5 * (lat + north);
    return BoundingBox{lat, lon, north, lon + width_m / meters_per_degree_lon(center)};
}

struct CellCoord {
    std::size_t row = 0;
    std::size_t col = 0;

    bool operator==(const CellCoord&) const = default;
};

namespace detail {

// Nudge a floor()ed cell index so that cells are exactly [edge(k), edge(k + 1))
// in degrees, the same edges Grid::cell_south/cell_west report.
template <class Edge>
double snap(double k, double v, Edge edge) {
    if (v >= edge(k + 1)) return k + 1;
    if (v < edge(k)) return k - 1;
    return k;
}

}  // namespace detail

/// Square cells of `cell_m` meters laid over a bounding box from its
/// southwest corner. Meter/degree conversion uses the equirectangular scale
/// at the box's center latitude.
struct Grid {
    BoundingBox bbox;
    double origin_lat = 0.0;
    double origin_lon = 0.0;
    double cell_m = 50.0;
    std::size_t n_rows = 0;
    std::size_t n_cols = 0;
    double meters_per_deg_lat = kMetersPerDegreeLat;
    double meters_per_deg_lon = kMetersPerDegreeLat;

    std::size_t n_cells() const { return n_rows * n_cols; }

    std::size_t index(CellCoord c) const { return c.row * n_cols + c.col; }
    CellCoord coord(std::size_t index) const { return {index / n_cols, index % n_cols}; }

    double cell_south(std::size_t row) const { return origin_lat + row * cell_m / meters_per_deg_lat; }
    double cell_west(std::size_t col) const { return origin_lon + col * cell_m / meters_per_deg_lon; }

    /// (lat, lon) of a cell center.
    std::pair<double, double> center(std::size_t index) const {
        const auto c = coord(index);
        return {origin_lat + (c.row + 0.5) * cell_m / meters_per_deg_lat,
                origin_lon + (c.col + 0.5) * cell_m / meters_per_deg_lon};
    }

    /// Cell whose half-open extent contains the coordinate; none outside the box.
    std::optional<std::size_t> locate(double lat, double lon) const {
        if (!bbox.contains(lat, lon)) return std::nullopt;
        const auto r = detail::snap(std::floor((lat - origin_lat) * meters_per_deg_lat / cell_m), lat,
                                    [this](double k) { return origin_lat + k * cell_m / meters_per_deg_lat; });
        const auto c = detail::snap(std::floor((lon - origin_lon) * meters_per_deg_lon / cell_m), lon,
                                    [this](double k) { return origin_lon + k * cell_m / meters_per_deg_lon; });
        if (r < 0 || c < 0 || r >= static_cast<double>(n_rows) || c >= static_cast<double>(n_cols))
            return std::nullopt;
        return index({static_cast<std::size_t>(r), static_cast<std::size_t>(c)});
    }
};

namespace detail {

// ceil() that ignores floating noise from the degree round trip, so a box
// built as exactly 900 m is not counted as 900.0000001 m.
inline std::size_t cell_count(double extent_m, double cell_m) {
    const double q = extent_m / cell_m;
    return static_cast<std::size_t>(std::ceil(q - 1e-9 * std::max(1.0, q)));
}

}  // namespace detail

inline Grid build_grid(const BoundingBox& bbox, double cell_m) {
    if (!(cell_m > 0.0) || !std::isfinite(cell_m)) throw Error("build_grid: cell size must be > 0");
    if (!valid_coordinates(bbox.south, bbox.west) || !valid_coordinates(bbox.north, bbox.east))
        throw Error("build_grid: bounding box has invalid coordinates");
    if (!(bbox.north > bbox.south) || !(bbox.east > bbox.west))
        throw Error("build_grid: degenerate bounding box");
    Grid g;
    g.bbox = bbox;
    g.origin_lat = bbox.south;
    g.origin_lon = bbox.west;
    g.cell_m = cell_m;
    g.meters_per_deg_lat = kMetersPerDegreeLat;
    g.meters_per_deg_lon = meters_per_degree_lon(0.5 * (bbox.south + bbox.north));
    const double height_m = (bbox.north - bbox.south) * g.meters_per_deg_lat;
    const double width_m = (bbox.east - bbox.west) * g.meters_per_deg_lon;
    g.n_rows = std::max<std::size_t>(1, detail::cell_count(height_m, cell_m));
    g.n_cols = std::max<std::size_t>(1, detail::cell_count(width_m, cell_m));
    return g;
}

inline std::optional<std::size_t> assign_area(const Grid& grid, const Stay& stay) {
    return grid.locate(stay.lat, stay.lon);
}

/// Grid cells kept for modeling, renumbered densely as area ids.
struct AreaVocabulary {
    std::vector<std::size_t> retained;        // cell index of each area id, ascending
    std::vector<std::size_t> stay_counts;     // per grid cell
    std::vector<std::optional<std::size_t>> area_of_cell;
    std::size_t in_bbox_stays = 0;

    std::size_t size() const { return retained.size(); }
    std::optional<std::size_t> area_id(std::size_t cell) const { return area_of_cell.at(cell); }
    std::size_t cell(std::size_t area_id) const { return retained.at(area_id); }
    std::size_t stay_count(std::size_t area_id) const { return stay_counts[retained.at(area_id)]; }
};

/// Count stays per cell, keep cells with at least `min_stays`, and set
/// `area_id` on every stay in a kept cell (others are reset to none).
inline AreaVocabulary build_vocabulary(const Grid& grid, StaySet& stays, std::size_t min_stays) {
    if (min_stays < 1) throw Error("build_vocabulary: min_stays must be >= 1");
    AreaVocabulary v;
    v.stay_counts.assign(grid.n_cells(), 0);
    v.area_of_cell.assign(grid.n_cells(), std::nullopt);
    for (const auto& [user, seq] : stays) {
        for (const auto& s : seq) {
            if (auto c = assign_area(grid, s)) {
                ++v.stay_counts[*c];
                ++v.in_bbox_stays;
            }
        }
    }
    for (std::size_t c = 0; c < grid.n_cells(); ++c) {
        if (v.stay_counts[c] >= min_stays) {
            v.area_of_cell[c] = v.retained.size();
            v.retained.push_back(c);
        }
    }
    if (v.retained.empty())
        throw Error("no areas meet threshold (min_stays = " + std::to_string(min_stays) + ")");
    for (auto& [user, seq] : stays) {
        for (auto& s : seq) {
            const auto c = assign_area(grid, s);
            s.area_id = c ? v.area_of_cell[*c] : std::nullopt;
        }
    }
    return v;
}

inline std::string serialize_vocabulary(const Grid& grid, const AreaVocabulary& v) {
    std::string out = "area_id,row,col,center_lat,center_lon,stay_count\n";
    for (std::size_t a = 0; a < v.size(); ++a) {
        const auto cell = v.retained[a];
        const auto rc = grid.coord(cell);
        const auto [lat, lon] = grid.center(cell);
        out += std::to_string(a) + ',' + std::to_string(rc.row) + ',' + std::to_string(rc.col) + ',' +
               io::fmt_double(lat) + ',' + io::fmt_double(lon) + ',' + std::to_string(v.stay_counts[cell]) + '\n';
    }
    return out;
}

}  // namespace area2vec
