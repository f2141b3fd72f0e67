#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "area2vec/cluster.hpp"
#include "area2vec/mesh.hpp"
#include "area2vec/profile.hpp"

namespace area2vec {

/// Minimum-cost perfect matching on a square cost matrix (Hungarian method,
/// O(n^3) potentials formulation). Returns row -> column.
inline std::vector<std::size_t> hungarian(const Matrix& cost) {
    const std::size_t n = cost.rows();
    if (cost.cols() != n) throw Error("hungarian: cost matrix must be square");
    if (n == 0) return {};
    constexpr double inf = std::numeric_limits<double>::infinity();
    // 1-based arrays; p[j] = row matched to column j.
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
    for (std::size_t i = 1; i <= n; ++i) {
        p[0] = i;
        std::size_t j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = p[j0];
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<std::size_t> row_to_col(n);
    for (std::size_t j = 1; j <= n; ++j) row_to_col[p[j] - 1] = j - 1;
    return row_to_col;
}

/// Everything one period's run produces that the comparison needs.
struct PeriodResult {
    std::string label;
    Grid grid;
    AreaVocabulary vocabulary;
    Matrix uas;
    Clustering clustering;
    std::vector<ClusterProfile> profiles;
};

struct Alignment {
    std::vector<std::size_t> b_to_a;  // b's cluster label -> a's cluster label
    double cost = 0.0;
};

/// Profile flattened and scaled to unit total mass (all zeros stays zero).
inline std::vector<double> normalized_profile(const ClusterProfile& p) {
    std::vector<double> v;
    v.reserve(2 * kTimeBins * kDurationBins);
    for (const auto& day : p.matrix)
        for (const auto& bin : day)
            for (double x : bin) v.push_back(x);
    double total = 0.0;
    for (double x : v) total += x;
    if (total > 0.0)
        for (double& x : v) x /= total;
    return v;
}

inline double profile_l1(const ClusterProfile& a, const ClusterProfile& b) {
    const auto va = normalized_profile(a), vb = normalized_profile(b);
    double s = 0.0;
    for (std::size_t i = 0; i < va.size(); ++i) s += std::abs(va[i] - vb[i]);
    return s;
}

inline Matrix alignment_costs(const std::vector<ClusterProfile>& a, const std::vector<ClusterProfile>& b) {
    Matrix cost(b.size(), a.size());
    for (std::size_t i = 0; i < b.size(); ++i)
        for (std::size_t j = 0; j < a.size(); ++j) cost(i, j) = profile_l1(b[i], a[j]);
    return cost;
}

/// Relabel b's clusters to best match a's, by L1 distance between profiles.
inline Alignment align_clusters(const std::vector<ClusterProfile>& a, const std::vector<ClusterProfile>& b) {
    if (a.size() != b.size())
        throw Error("align_clusters: cluster counts differ (" + std::to_string(a.size()) + " vs " +
                    std::to_string(b.size()) + ")");
    const Matrix cost = alignment_costs(a, b);
    Alignment out{hungarian(cost), 0.0};
    for (std::size_t i = 0; i < out.b_to_a.size(); ++i) out.cost += cost(i, out.b_to_a[i]);
    return out;
}

inline Alignment align_clusters(const PeriodResult& a, const PeriodResult& b) {
    if (a.clustering.k != b.clustering.k)
        throw Error("align_clusters: k differs between periods (" + std::to_string(a.clustering.k) + " vs " +
                    std::to_string(b.clustering.k) + ")");
    return align_clusters(a.profiles, b.profiles);
}

struct AreaTransition {
    std::size_t cell = 0;
    std::optional<std::size_t> from_cluster;  // a's label
    std::optional<std::size_t> to_cluster;    // b's label mapped into a's labels
};

struct TransitionReport {
    std::size_t k = 0;
    Matrix counts;  // k x k: from (a) -> to (aligned b)
    std::vector<std::size_t> common_cells;
    std::vector<std::size_t> dropped_cells;    // retained in a only
    std::vector<std::size_t> appearing_cells;  // retained in b only
    std::vector<AreaTransition> areas;         // every cell retained in either period

    double total() const {
        double s = 0.0;
        for (double v : counts.data()) s += v;
        return s;
    }
};

inline bool same_grid(const Grid& a, const Grid& b) {
    return a.n_rows == b.n_rows && a.n_cols == b.n_cols && a.cell_m == b.cell_m && a.origin_lat == b.origin_lat &&
           a.origin_lon == b.origin_lon;
}

inline TransitionReport transition_report(const PeriodResult& a, const PeriodResult& b, const Alignment& alignment) {
    if (!same_grid(a.grid, b.grid)) throw Error("transition_report: periods use different grids");
    if (alignment.b_to_a.size() != b.clustering.k) throw Error("transition_report: alignment does not match b");
    TransitionReport r;
    r.k = a.clustering.k;
    r.counts = Matrix(r.k, r.k);
    const std::size_t n_cells = a.grid.n_cells();
    for (std::size_t cell = 0; cell < n_cells; ++cell) {
        const auto ia = a.vocabulary.area_id(cell);
        const auto ib = b.vocabulary.area_id(cell);
        if (!ia && !ib) continue;
        AreaTransition t{cell, std::nullopt, std::nullopt};
        if (ia) t.from_cluster = a.clustering.assignments.at(*ia);
        if (ib) t.to_cluster = alignment.b_to_a.at(b.clustering.assignments.at(*ib));
        if (ia && ib) {
            r.common_cells.push_back(cell);
            r.counts(*t.from_cluster, *t.to_cluster) += 1.0;
        } else if (ia) {
            r.dropped_cells.push_back(cell);
        } else {
            r.appearing_cells.push_back(cell);
        }
        r.areas.push_back(t);
    }
    return r;
}

inline std::string serialize_transitions(const TransitionReport& r) {
    std::string out = "from_cluster,to_cluster,count\n";
    for (std::size_t i = 0; i < r.k; ++i)
        for (std::size_t j = 0; j < r.k; ++j)
            out += std::to_string(i) + ',' + std::to_string(j) + ',' +
                   std::to_string(static_cast<long long>(r.counts(i, j))) + '\n';
    return out;
}

/// Per-area diff map: from_cluster/to_cluster are null where the area was
/// not retained in that period.
inline nlohmann::json transition_geojson(const Grid& grid, const TransitionReport& r) {
    nlohmann::json features = nlohmann::json::array();
    for (const auto& t : r.areas) {
        const auto rc = grid.coord(t.cell);
        const char* status = t.from_cluster && t.to_cluster ? "common" : (t.from_cluster ? "dropped" : "appeared");
        features.push_back({{"type", "Feature"},
                            {"geometry", cell_polygon(grid, t.cell)},
                            {"properties",
                             {{"row", rc.row},
                              {"col", rc.col},
                              {"status", status},
                              {"from_cluster", t.from_cluster ? nlohmann::json(*t.from_cluster) : nlohmann::json()},
                              {"to_cluster", t.to_cluster ? nlohmann::json(*t.to_cluster) : nlohmann::json()},
                              {"changed", t.from_cluster != t.to_cluster}}}});
    }
    return {{"type", "FeatureCollection"}, {"features", std::move(features)}};
}

}  // namespace area2vec
