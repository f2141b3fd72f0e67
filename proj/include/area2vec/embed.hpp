#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "area2vec/common.hpp"
#include "area2vec/encoding.hpp"
#include "area2vec/mesh.hpp"

namespace area2vec {

/// Smallest integer d with d^4 >= n_categories, i.e. the fourth root rounded up.
inline int default_dim(int n_categories) {
    if (n_categories < 1) throw Error("default_dim: need at least one category");
    int d = 1;
    while (static_cast<std::int64_t>(d) * d * d * d < n_categories) ++d;
    return d;
}

struct ModelConfig {
    std::size_t n_areas = 0;
    int n_categories = kNumCategories;
    int dim = 4;
    double learning_rate = 0.025;
    int epochs = 20;
    std::uint64_t seed = 1;
    /// Linear decay to a floor of 1e-4 * learning_rate over all updates.
    bool lr_decay = true;

    void validate() const {
        if (n_areas < 1) throw Error("model config: n_areas must be >= 1");
        if (n_categories < 1) throw Error("model config: n_categories must be >= 1");
        if (dim < 1) throw Error("model config: dim must be >= 1");
        if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
            throw Error("model config: learning_rate must be > 0");
        if (epochs < 1) throw Error("model config: epochs must be >= 1");
    }
};

/// Area -> hidden -> category network. Rows of `w` are the area embeddings.
struct AreaModel {
    Matrix w;      // n_areas x dim
    Matrix w_out;  // dim x n_categories
    std::uint64_t seed = 0;

    std::size_t n_areas() const { return w.rows(); }
    std::size_t dim() const { return w.cols(); }
    std::size_t n_categories() const { return w_out.cols(); }

    bool operator==(const AreaModel&) const = default;
};

struct TrainingPair {
    std::size_t area_id = 0;
    int category_id = 0;

    bool operator==(const TrainingPair&) const = default;
};

/// W entries uniform in (-0.5/D, 0.5/D); W_out zero, so the initial
/// prediction is uniform over categories.
inline AreaModel init_model(const ModelConfig& cfg) {
    cfg.validate();
    AreaModel m;
    m.seed = cfg.seed;
    m.w = Matrix(cfg.n_areas, static_cast<std::size_t>(cfg.dim));
    m.w_out = Matrix(static_cast<std::size_t>(cfg.dim), static_cast<std::size_t>(cfg.n_categories), 0.0);
    Rng rng(derive_seed(cfg.seed, 0));
    const double half = 0.5 / cfg.dim;
    for (double& x : m.w.data()) x = rng.uniform(-half, half);
    return m;
}

namespace detail {

inline void logits(const AreaModel& m, const double* h, std::vector<double>& z) {
    const std::size_t dim = m.dim(), cats = m.n_categories();
    z.assign(cats, 0.0);
    for (std::size_t d = 0; d < dim; ++d) {
        const double hd = h[d];
        const double* row = m.w_out.row(d);
        for (std::size_t j = 0; j < cats; ++j) z[j] += hd * row[j];
    }
}

inline void softmax_inplace(std::vector<double>& z) {
    const double mx = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (double& v : z) {
        v = std::exp(v - mx);
        sum += v;
    }
    for (double& v : z) v /= sum;
}

}  // namespace detail

/// Predicted category distribution for one area.
inline std::vector<double> forward(const AreaModel& model, std::size_t area_id) {
    if (area_id >= model.n_areas()) throw Error("forward: area id out of range");
    std::vector<double> p;
    detail::logits(model, model.w.row(area_id), p);
    detail::softmax_inplace(p);
    return p;
}

struct LossAndGrads {
    double loss = 0.0;
    Matrix grad_w;      // same shape as w; rows of untouched areas stay zero
    Matrix grad_w_out;  // same shape as w_out
};

/// Mean softmax cross-entropy over a batch and its exact gradients.
inline LossAndGrads loss_and_grads(const AreaModel& model, const std::vector<TrainingPair>& batch) {
    if (batch.empty()) throw Error("loss_and_grads: empty batch");
    const std::size_t dim = model.dim(), cats = model.n_categories();
    LossAndGrads out{0.0, Matrix(model.n_areas(), dim), Matrix(dim, cats)};
    const double inv_n = 1.0 / static_cast<double>(batch.size());
    std::vector<double> p;
    for (const auto& pair : batch) {
        if (pair.area_id >= model.n_areas() || pair.category_id < 0 ||
            static_cast<std::size_t>(pair.category_id) >= cats)
            throw Error("loss_and_grads: training pair out of range");
        const double* h = model.w.row(pair.area_id);
        detail::logits(model, h, p);
        detail::softmax_inplace(p);
        out.loss -= std::log(p[pair.category_id]) * inv_n;
        p[pair.category_id] -= 1.0;  // dL/dz
        double* gh = out.grad_w.row(pair.area_id);
        for (std::size_t d = 0; d < dim; ++d) {
            const double* wo = model.w_out.row(d);
            double* gwo = out.grad_w_out.row(d);
            double acc = 0.0;
            for (std::size_t j = 0; j < cats; ++j) {
                acc += wo[j] * p[j];
                gwo[j] += h[d] * p[j] * inv_n;
            }
            gh[d] += acc * inv_n;
        }
    }
    return out;
}

inline double mean_loss(const AreaModel& model, const std::vector<TrainingPair>& pairs) {
    double total = 0.0;
    std::vector<double> p;
    for (const auto& pair : pairs) {
        detail::logits(model, model.w.row(pair.area_id), p);
        detail::softmax_inplace(p);
        total -= std::log(p[pair.category_id]);
    }
    return total / static_cast<double>(pairs.size());
}

namespace detail {

inline void check_finite(const AreaModel& m, int epoch) {
    auto scan = [&](const Matrix& mat, const char* name) {
        for (std::size_t r = 0; r < mat.rows(); ++r)
            for (std::size_t c = 0; c < mat.cols(); ++c)
                if (!std::isfinite(mat(r, c)))
                    throw Error(std::string("training diverged: non-finite ") + name + "(" + std::to_string(r) +
                                "," + std::to_string(c) + ") after epoch " + std::to_string(epoch) +
                                "; lower learning_rate");
    };
    scan(m.w, "W");
    scan(m.w_out, "W_out");
}

}  // namespace detail

/// Per-example SGD over `pairs`, continuing from `model`. Shuffle order is
/// drawn from the config seed, so identical inputs give identical weights.
inline AreaModel train(AreaModel model, const std::vector<TrainingPair>& pairs, const ModelConfig& cfg) {
    cfg.validate();
    if (pairs.empty()) throw Error("train: no training pairs");
    if (model.n_areas() != cfg.n_areas || model.dim() != static_cast<std::size_t>(cfg.dim) ||
        model.n_categories() != static_cast<std::size_t>(cfg.n_categories))
        throw Error("train: model shape does not match config");
    for (const auto& pr : pairs)
        if (pr.area_id >= cfg.n_areas || pr.category_id < 0 || pr.category_id >= cfg.n_categories)
            throw Error("train: training pair out of range");

    const std::size_t dim = model.dim(), cats = model.n_categories();
    const double total_updates = static_cast<double>(pairs.size()) * cfg.epochs;
    const double lr_floor = cfg.learning_rate * 1e-4;
    Rng rng(derive_seed(cfg.seed, 1));
    std::vector<std::size_t> order(pairs.size());
    std::vector<double> p, gh(dim);
    std::uint64_t step = 0;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        shuffle(order, rng);
        for (std::size_t idx : order) {
            const auto& pr = pairs[idx];
            const double lr = cfg.lr_decay
                                  ? std::max(lr_floor, cfg.learning_rate * (1.0 - static_cast<double>(step) / total_updates))
                                  : cfg.learning_rate;
            ++step;
            double* h = model.w.row(pr.area_id);
            detail::logits(model, h, p);
            detail::softmax_inplace(p);
            p[static_cast<std::size_t>(pr.category_id)] -= 1.0;
            for (std::size_t d = 0; d < dim; ++d) {
                double* wo = model.w_out.row(d);
                double acc = 0.0;
                const double step_d = lr * h[d];
                for (std::size_t j = 0; j < cats; ++j) {
                    acc += wo[j] * p[j];
                    wo[j] -= step_d * p[j];
                }
                gh[d] = acc;
            }
            for (std::size_t d = 0; d < dim; ++d) h[d] -= lr * gh[d];
        }
        detail::check_finite(model, epoch);
    }
    return model;
}

inline AreaModel train(const std::vector<TrainingPair>& pairs, const ModelConfig& cfg) {
    if (pairs.empty()) throw Error("train: no training pairs");
    return train(init_model(cfg), pairs, cfg);
}

/// Rows of W scaled to unit Euclidean length.
inline Matrix normalize_embeddings(const AreaModel& model) {
    Matrix out = model.w;
    for (std::size_t r = 0; r < out.rows(); ++r) {
        double* row = out.row(r);
        double norm = 0.0;
        for (std::size_t d = 0; d < out.cols(); ++d) norm += row[d] * row[d];
        norm = std::sqrt(norm);
        if (!(norm > 0.0) || !std::isfinite(norm))
            throw Error("normalize_embeddings: area " + std::to_string(r) + " has a zero-norm embedding");
        for (std::size_t d = 0; d < out.cols(); ++d) row[d] /= norm;
    }
    return out;
}

struct TrainingSet {
    std::vector<TrainingPair> pairs;
    std::size_t skipped = 0;  // stays outside retained areas
};

/// One (area, category) pair per stay that lies in a retained area.
inline TrainingSet build_training_pairs(const StaySet& stays, int tz_offset_min, const HolidayCalendar& holidays) {
    TrainingSet out;
    for (const auto& [user, seq] : stays) {
        for (const auto& s : seq) {
            if (!s.area_id) {
                ++out.skipped;
                continue;
            }
            out.pairs.push_back({*s.area_id, encode(classify_stay(s, tz_offset_min, holidays))});
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Model file (JSON). Doubles are written in shortest round-trip form.
// ---------------------------------------------------------------------------

inline nlohmann::json model_to_json(const AreaModel& m) {
    return nlohmann::json{{"format", "area2vec-model"},
                          {"version", 1},
                          {"n_areas", m.n_areas()},
                          {"n_categories", m.n_categories()},
                          {"dim", m.dim()},
                          {"seed", m.seed},
                          {"W", m.w.data()},
                          {"W_out", m.w_out.data()}};
}

inline AreaModel model_from_json(const nlohmann::json& j) {
    if (j.value("format", "") != "area2vec-model") throw ParseError("not an area2vec model file");
    const auto n = j.at("n_areas").get<std::size_t>();
    const auto c = j.at("n_categories").get<std::size_t>();
    const auto d = j.at("dim").get<std::size_t>();
    AreaModel m;
    m.seed = j.at("seed").get<std::uint64_t>();
    m.w = Matrix(n, d);
    m.w_out = Matrix(d, c);
    m.w.data() = j.at("W").get<std::vector<double>>();
    m.w_out.data() = j.at("W_out").get<std::vector<double>>();
    if (m.w.data().size() != n * d || m.w_out.data().size() != d * c)
        throw ParseError("model file: matrix sizes do not match declared shape");
    return m;
}

}  // namespace area2vec
