#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "area2vec/cluster.hpp"
#include "oracles.hpp"

using namespace area2vec;

namespace {

Matrix from_rows(const std::vector<std::vector<double>>& rows) {
    Matrix m(rows.size(), rows[0].size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t d = 0; d < rows[i].size(); ++d) m(i, d) = rows[i][d];
    return m;
}

Matrix random_points(Rng& rng, std::size_t n, std::size_t dim) {
    Matrix m(n, dim);
    for (double& x : m.data()) x = rng.uniform(-1, 1);
    return m;
}

// A few well separated blobs.
Matrix blobs(Rng& rng, std::size_t per_blob, std::size_t n_blobs, std::size_t dim) {
    Matrix m(per_blob * n_blobs, dim);
    for (std::size_t b = 0; b < n_blobs; ++b) {
        std::vector<double> center(dim);
        for (double& c : center) c = rng.uniform(-10, 10);
        for (std::size_t i = 0; i < per_blob; ++i)
            for (std::size_t d = 0; d < dim; ++d) m(b * per_blob + i, d) = center[d] + rng.uniform(-0.5, 0.5);
    }
    return m;
}

}  // namespace

TEST(KMeans, SingleClusterIsTheMean) {
    const auto pts = from_rows({{0, 0}, {2, 0}, {4, 6}});
    const auto c = kmeans_fit(pts, 1, 3);
    EXPECT_EQ(c.assignments, (std::vector<std::size_t>{0, 0, 0}));
    EXPECT_NEAR(c.centroids(0, 0), 2.0, 1e-12);
    EXPECT_NEAR(c.centroids(0, 1), 2.0, 1e-12);
    EXPECT_NEAR(c.inertia, oracle::sse(pts, c.assignments), 1e-12);
}

TEST(KMeans, TwoPointsTwoClusters) {
    const auto pts = from_rows({{0, 0}, {10, 10}});
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto c = kmeans_fit(pts, 2, seed);
        EXPECT_NE(c.assignments[0], c.assignments[1]);
        EXPECT_EQ(c.inertia, 0.0);
    }
}

TEST(KMeans, SeedingFollowsSquaredDistance) {
    // first pick uniform, second proportional to squared distance
    const auto pts = from_rows({{0.0}, {1.0}, {3.0}});
    const double d2[3][3] = {{0, 1, 9}, {1, 0, 4}, {9, 4, 0}};
    std::map<std::pair<std::size_t, std::size_t>, int> seen;
    const int runs = 10000;
    for (int r = 0; r < runs; ++r) {
        Rng rng(derive_seed(99, static_cast<std::uint64_t>(r)));
        const auto idx = kmeans_pp_seed_indices(pts, 2, rng);
        ++seen[{idx[0], idx[1]}];
    }
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) {
            const double p = (1.0 / 3.0) * d2[i][j] / (d2[i][0] + d2[i][1] + d2[i][2]);
            const double expected = p * runs, sigma = std::sqrt(runs * p * (1 - p));
            EXPECT_NEAR(seen[std::make_pair(i, j)], expected, 3 * sigma + 1e-9) << i << "," << j;
        }
}

TEST(KMeans, IdenticalPoints) {
    const auto pts = from_rows({{1, 1}, {1, 1}, {1, 1}});
    const auto c = kmeans_fit(pts, 1, 0);
    EXPECT_EQ(c.inertia, 0.0);
    EXPECT_THROW(kmeans_fit(pts, 2, 0), Error);
}

TEST(KMeans, OneClusterPerPoint) {
    Rng rng(4);
    const auto pts = random_points(rng, 7, 3);
    const auto c = kmeans_best_of(pts, 7, 1, 3);
    EXPECT_EQ(c.inertia, 0.0);
    std::vector<std::size_t> sorted = c.assignments;
    std::sort(sorted.begin(), sorted.end());
    EXPECT_EQ(sorted, (std::vector<std::size_t>{0, 1, 2, 3, 4, 5, 6}));
}

TEST(KMeans, KBeyondDistinctPointsThrows) {
    const auto pts = from_rows({{0, 0}, {1, 1}, {0, 0}});
    EXPECT_THROW(kmeans_fit(pts, 3, 0), Error);
    EXPECT_THROW(kmeans_fit(pts, 0, 0), Error);
    EXPECT_THROW(kmeans_best_of(pts, 2, 0, 0), Error);
}

TEST(KMeans, BestOfRestartsFindsOptimalTwoSplit) {
    Rng rng(8);
    for (int inst = 0; inst < 20; ++inst) {
        const auto pts = random_points(rng, 3 + rng.below(6), 2 + rng.below(3));
        const double best = oracle::best_two_partition(pts);
        const auto c = kmeans_best_of(pts, 2, static_cast<std::uint64_t>(inst), 20);
        EXPECT_NEAR(c.inertia, best, 1e-12 * std::max(1.0, best)) << "instance " << inst;
        EXPECT_NEAR(oracle::sse(pts, c.assignments), c.inertia, 1e-12 * std::max(1.0, best));
    }
}

TEST(KMeans, InertiaNeverIncreases) {
    Rng rng(12);
    for (int inst = 0; inst < 100; ++inst) {
        const auto pts = random_points(rng, 20 + rng.below(60), 2 + rng.below(4));
        std::vector<double> trace;
        KMeansOptions opt;
        opt.on_iteration = [&](int, double inertia) { trace.push_back(inertia); };
        kmeans_fit(pts, 2 + rng.below(5), static_cast<std::uint64_t>(inst), opt);
        for (std::size_t i = 1; i < trace.size(); ++i)
            EXPECT_LE(trace[i], trace[i - 1] * (1 + 1e-12)) << "instance " << inst << " step " << i;
    }
}

TEST(KMeans, ResultIsAFixedPoint) {
    Rng rng(13);
    for (int inst = 0; inst < 30; ++inst) {
        const auto pts = blobs(rng, 10, 4, 3);
        const auto c = kmeans_best_of(pts, 4, static_cast<std::uint64_t>(inst), 5);
        // every point sits with its nearest centroid
        for (std::size_t i = 0; i < pts.rows(); ++i) {
            double nearest = std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < 4; ++j)
                nearest = std::min(nearest, squared_distance(pts.row(i), c.centroids.row(j), 3));
            EXPECT_LE(squared_distance(pts.row(i), c.centroids.row(c.assignments[i]), 3), nearest + 1e-12);
        }
        // and every centroid is the mean of its members
        for (std::size_t j = 0; j < 4; ++j) {
            std::vector<double> mean(3, 0.0);
            double n = 0;
            for (std::size_t i = 0; i < pts.rows(); ++i)
                if (c.assignments[i] == j) {
                    for (std::size_t d = 0; d < 3; ++d) mean[d] += pts(i, d);
                    n += 1;
                }
            ASSERT_GT(n, 0);
            for (std::size_t d = 0; d < 3; ++d) EXPECT_NEAR(c.centroids(j, d), mean[d] / n, 1e-6);
        }
        EXPECT_NEAR(c.inertia, oracle::sse(pts, c.assignments), 1e-9);
    }
}

TEST(KMeans, DeterministicForSeed) {
    Rng rng(21);
    const auto pts = random_points(rng, 50, 4);
    const auto a = kmeans_best_of(pts, 4, 5, 10), b = kmeans_best_of(pts, 4, 5, 10);
    EXPECT_EQ(a.assignments, b.assignments);
    EXPECT_EQ(a.centroids, b.centroids);
    EXPECT_EQ(a.inertia, b.inertia);
}

TEST(KMeans, RotationKeepsThePartition) {
    Rng rng(22);
    const auto pts = blobs(rng, 12, 3, 2);
    const double t = 0.7;
    Matrix rot(pts.rows(), 2);
    for (std::size_t i = 0; i < pts.rows(); ++i) {
        rot(i, 0) = std::cos(t) * pts(i, 0) - std::sin(t) * pts(i, 1);
        rot(i, 1) = std::sin(t) * pts(i, 0) + std::cos(t) * pts(i, 1);
    }
    const auto a = kmeans_best_of(pts, 3, 1, 10), b = kmeans_best_of(rot, 3, 1, 10);
    EXPECT_EQ(oracle::ari_pairs(a.assignments, b.assignments), 1.0);
    EXPECT_NEAR(a.inertia, b.inertia, 1e-9);
}

TEST(KMeans, RecoversSeparatedBlobs) {
    Rng rng(23);
    const auto pts = blobs(rng, 15, 4, 4);
    std::vector<std::size_t> truth(pts.rows());
    for (std::size_t i = 0; i < truth.size(); ++i) truth[i] = i / 15;
    EXPECT_EQ(oracle::ari_pairs(kmeans_best_of(pts, 4, 2, 10).assignments, truth), 1.0);
}

TEST(ClusterFiles, CsvAndSidecar) {
    const auto pts = from_rows({{0, 0}, {0, 1}, {10, 10}});
    const auto c = kmeans_best_of(pts, 2, 7, 4);
    const std::string csv = serialize_assignments(c);
    EXPECT_EQ(csv.rfind("area_id,cluster_id\n0,", 0), 0u);
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
    const auto j = clustering_sidecar(c);
    EXPECT_EQ(j.at("k"), 2);
    EXPECT_EQ(j.at("seed"), 7);
    EXPECT_EQ(j.at("centroids").size(), 2u);
    EXPECT_DOUBLE_EQ(j.at("inertia").get<double>(), 0.5);
}
