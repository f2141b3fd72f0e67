#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "area2vec/common.hpp"
#include "area2vec/io.hpp"

namespace area2vec {

struct Clustering {
    std::size_t k = 0;
    std::vector<std::size_t> assignments;  // point -> cluster
    Matrix centroids;                      // k x dim
    double inertia = 0.0;
    std::uint64_t seed = 0;
    int iterations = 0;
};

inline std::size_t count_distinct_rows(const Matrix& points) {
    std::vector<std::vector<double>> rows;
    rows.reserve(points.rows());
    for (std::size_t i = 0; i < points.rows(); ++i)
        rows.emplace_back(points.row(i), points.row(i) + points.cols());
    std::sort(rows.begin(), rows.end());
    return static_cast<std::size_t>(std::unique(rows.begin(), rows.end()) - rows.begin());
}

/// D^2 seeding. Returns the indices of the chosen points; the first is
/// uniform, each later one is drawn with probability proportional to its
/// squared distance to the nearest already-chosen point.
inline std::vector<std::size_t> kmeans_pp_seed_indices(const Matrix& points, std::size_t k, Rng& rng) {
    const std::size_t n = points.rows(), dim = points.cols();
    if (k < 1) throw Error("kmeans: k must be >= 1");
    if (k > count_distinct_rows(points))
        throw Error("kmeans: k = " + std::to_string(k) + " exceeds the number of distinct points (" +
                    std::to_string(count_distinct_rows(points)) + ")");

    std::vector<std::size_t> chosen;
    chosen.push_back(rng.below(n));
    std::vector<double> d2(n);
    for (std::size_t i = 0; i < n; ++i) d2[i] = squared_distance(points.row(i), points.row(chosen[0]), dim);

    while (chosen.size() < k) {
        double total = 0.0;
        for (double v : d2) total += v;
        const double r = rng.uniform() * total;
        double cum = 0.0;
        std::size_t next = n;
        for (std::size_t i = 0; i < n; ++i) {
            if (d2[i] <= 0.0) continue;
            cum += d2[i];
            next = i;
            if (r < cum) break;
        }
        chosen.push_back(next);
        for (std::size_t i = 0; i < n; ++i)
            d2[i] = std::min(d2[i], squared_distance(points.row(i), points.row(next), dim));
    }
    return chosen;
}

inline Matrix kmeans_pp_seed(const Matrix& points, std::size_t k, std::uint64_t seed) {
    Rng rng(seed);
    const auto idx = kmeans_pp_seed_indices(points, k, rng);
    Matrix c(k, points.cols());
    for (std::size_t j = 0; j < k; ++j) std::copy_n(points.row(idx[j]), points.cols(), c.row(j));
    return c;
}

namespace detail {

/// Nearest centroid, ties to the lowest index. Returns total squared distance.
inline double assign_nearest(const Matrix& points, const Matrix& centroids, std::vector<std::size_t>& labels,
                             std::vector<double>* dist = nullptr) {
    const std::size_t dim = points.cols();
    double inertia = 0.0;
    labels.resize(points.rows());
    if (dist) dist->resize(points.rows());
    for (std::size_t i = 0; i < points.rows(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t arg = 0;
        for (std::size_t c = 0; c < centroids.rows(); ++c) {
            const double d = squared_distance(points.row(i), centroids.row(c), dim);
            if (d < best) {
                best = d;
                arg = c;
            }
        }
        labels[i] = arg;
        if (dist) (*dist)[i] = best;
        inertia += best;
    }
    return inertia;
}

}  // namespace detail

struct KMeansOptions {
    int max_iter = 300;
    double tol = 1e-6;
    /// Called with the inertia measured at every assignment step.
    std::function<void(int iteration, double inertia)> on_iteration;
};

/// Lloyd iterations from k-means++ seeds. An emptied cluster takes over the
/// point farthest from its centroid.
inline Clustering kmeans_fit(const Matrix& points, std::size_t k, std::uint64_t seed, const KMeansOptions& opt = {}) {
    const std::size_t n = points.rows(), dim = points.cols();
    Clustering out;
    out.k = k;
    out.seed = seed;
    out.centroids = kmeans_pp_seed(points, k, seed);

    std::vector<std::size_t> labels, prev;
    std::vector<double> dist;
    std::vector<std::size_t> counts(k);
    bool settled = false;  // centroids moved less than tol; one last assignment
    for (int it = 0;; ++it) {
        double inertia = detail::assign_nearest(points, out.centroids, labels, &dist);

        std::fill(counts.begin(), counts.end(), 0);
        for (auto l : labels) ++counts[l];
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] != 0) continue;
            std::size_t far = 0;
            for (std::size_t i = 1; i < n; ++i)
                if (dist[i] > dist[far] && counts[labels[i]] > 1) far = i;
            if (counts[labels[far]] <= 1) continue;  // nothing can be moved
            --counts[labels[far]];
            labels[far] = c;
            counts[c] = 1;
            std::copy_n(points.row(far), dim, out.centroids.row(c));
            inertia -= dist[far];
            dist[far] = 0.0;
        }
        if (opt.on_iteration) opt.on_iteration(it, inertia);
        out.inertia = inertia;
        out.iterations = it + 1;

        if (settled || labels == prev || it + 1 >= opt.max_iter) break;
        prev = labels;

        Matrix next(k, dim);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t d = 0; d < dim; ++d) next(labels[i], d) += points(i, d);
        double shift = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] == 0) {
                std::copy_n(out.centroids.row(c), dim, next.row(c));
                continue;
            }
            for (std::size_t d = 0; d < dim; ++d) next(c, d) /= static_cast<double>(counts[c]);
            shift = std::max(shift, std::sqrt(squared_distance(next.row(c), out.centroids.row(c), dim)));
        }
        out.centroids = std::move(next);
        settled = shift < opt.tol;
    }
    out.assignments = std::move(labels);
    return out;
}

/// Best (lowest inertia) of `restarts` independently seeded fits.
inline Clustering kmeans_best_of(const Matrix& points, std::size_t k, std::uint64_t seed, int restarts,
                                 const KMeansOptions& opt = {}) {
    if (restarts < 1) throw Error("kmeans: restarts must be >= 1");
    Clustering best;
    for (int r = 0; r < restarts; ++r) {
        Clustering c = kmeans_fit(points, k, derive_seed(seed, static_cast<std::uint64_t>(r)), opt);
        if (r == 0 || c.inertia < best.inertia) best = std::move(c);
    }
    best.seed = seed;
    return best;
}

inline std::string serialize_assignments(const Clustering& c) {
    std::string out = "area_id,cluster_id\n";
    for (std::size_t a = 0; a < c.assignments.size(); ++a)
        out += std::to_string(a) + ',' + std::to_string(c.assignments[a]) + '\n';
    return out;
}

inline nlohmann::json clustering_sidecar(const Clustering& c) {
    nlohmann::json centroids = nlohmann::json::array();
    for (std::size_t r = 0; r < c.centroids.rows(); ++r)
        centroids.push_back(std::vector<double>(c.centroids.row(r), c.centroids.row(r) + c.centroids.cols()));
    return {{"k", c.k}, {"seed", c.seed}, {"inertia", c.inertia}, {"centroids", centroids}};
}

}  // namespace area2vec
