#pragma once

#include <map>
#include <vector>

#include "area2vec/compare.hpp"

namespace area2vec {

/// Adjusted Rand Index between two labelings of the same items.
inline double adjusted_rand_index(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
    if (a.size() != b.size()) throw Error("adjusted_rand_index: label vectors differ in length");
    const double n = static_cast<double>(a.size());
    std::map<std::pair<std::size_t, std::size_t>, double> joint;
    std::map<std::size_t, double> ca, cb;
    for (std::size_t i = 0; i < a.size(); ++i) {
        joint[{a[i], b[i]}] += 1;
        ca[a[i]] += 1;
        cb[b[i]] += 1;
    }
    auto c2 = [](double x) { return x * (x - 1) / 2; };
    double sum_ij = 0, sum_a = 0, sum_b = 0;
    for (const auto& [k, v] : joint) sum_ij += c2(v);
    for (const auto& [k, v] : ca) sum_a += c2(v);
    for (const auto& [k, v] : cb) sum_b += c2(v);
    const double expected = sum_a * sum_b / c2(n);
    const double max_index = 0.5 * (sum_a + sum_b);
    if (max_index == expected) return 1.0;  // both labelings trivial
    return (sum_ij - expected) / (max_index - expected);
}

/// Fraction of items whose predicted label matches the truth under the best
/// one-to-one relabeling of predicted labels.
inline double best_permutation_accuracy(const std::vector<std::size_t>& truth, const std::vector<std::size_t>& predicted) {
    if (truth.size() != predicted.size()) throw Error("best_permutation_accuracy: length mismatch");
    if (truth.empty()) return 1.0;
    std::size_t k = 0;
    for (auto v : truth) k = std::max(k, v + 1);
    for (auto v : predicted) k = std::max(k, v + 1);
    Matrix cost(k, k);
    for (std::size_t i = 0; i < truth.size(); ++i) cost(predicted[i], truth[i]) -= 1.0;
    const auto match = hungarian(cost);
    double hits = 0;
    for (std::size_t p = 0; p < k; ++p) hits -= cost(p, match[p]);
    return hits / static_cast<double>(truth.size());
}

}  // namespace area2vec
