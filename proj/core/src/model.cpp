#include "eals/model.hpp"

#include "eals/error.hpp"
#include "eals/random.hpp"

#include <algorithm>
#include <cmath>

namespace eals {

void RowMatrix::append_row(std::span<const double> values) {
    if (values.size() != cols_) throw InvalidInput("row width mismatch");
    data_.insert(data_.end(), values.begin(), values.end());
    ++rows_;
}

FactorModel init_model(std::size_t num_users, std::size_t num_items, std::size_t factors, std::uint64_t seed,
                       double scale) {
    if (factors < 1) throw InvalidInput("factor count must be >= 1");
    if (!(scale > 0.0)) throw InvalidInput("init scale must be positive");
    FactorModel model;
    model.factors = factors;
    model.P = RowMatrix(num_users, factors);
    model.Q = RowMatrix(num_items, factors);
    model.Sp = RowMatrix(factors, factors);
    model.Sq = RowMatrix(factors, factors);
    Rng rng(seed);
    for (auto& v : model.P.values()) v = scale * rng.uniform();
    for (auto& v : model.Q.values()) v = scale * rng.uniform();
    recompute_user_cache(model);
    return model;
}

FactorModel init_model(const InteractionDataset& train, const ConfidenceWeights& weights, std::size_t factors,
                       std::uint64_t seed, double scale) {
    auto model = init_model(train.num_users(), train.num_items(), factors, seed, scale);
    prepare_model(model, train, weights);
    return model;
}

void prepare_model(FactorModel& model, const InteractionDataset& train, const ConfidenceWeights& weights,
                   int threads) {
    if (model.num_users() != train.num_users() || model.num_items() != train.num_items()) {
        throw InvalidInput("model dimensions do not match the training data");
    }
    if (weights.size() != train.num_items()) throw InvalidInput("confidence vector length mismatch");
    recompute_caches(model, weights, threads);
    refresh_prediction_cache(model, train);
}

double predict(const FactorModel& model, UserIndex u, ItemIndex i) {
    if (u >= model.num_users() || i >= model.num_items()) throw InvalidInput("predict: id out of range");
    const auto p = model.P.row(u);
    const auto q = model.Q.row(i);
    double s = 0.0;
    for (std::size_t f = 0; f < model.factors; ++f) s += p[f] * q[f];
    return s;
}

RankedList recommend_topk(const FactorModel& model, UserIndex u, std::size_t k, const InteractionDataset* exclude) {
    if (u >= model.num_users()) throw InvalidInput("recommend: user out of range");
    if (k < 1) throw InvalidInput("recommend: k must be >= 1");

    std::vector<char> skip;
    if (exclude != nullptr && u < exclude->num_users()) {
        skip.assign(model.num_items(), 0);
        for (const auto& e : exclude->user_row(u)) {
            if (e.id < skip.size()) skip[e.id] = 1;
        }
    }
    RankedList all;
    all.reserve(model.num_items());
    const auto p = model.P.row(u);
    for (ItemIndex i = 0; i < model.num_items(); ++i) {
        if (!skip.empty() && skip[i]) continue;
        const auto q = model.Q.row(i);
        double s = 0.0;
        for (std::size_t f = 0; f < model.factors; ++f) s += p[f] * q[f];
        all.push_back({i, s});
    }
    const auto keep = std::min(k, all.size());
    std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(keep), all.end(),
                      [](const ScoredItem& a, const ScoredItem& b) {
                          return a.score != b.score ? a.score > b.score : a.item < b.item;
                      });
    all.resize(keep);
    return all;
}

namespace {

// S = sum_r coef_r x_r x_r^T over the rows of X; row k of S is owned by one
// thread and accumulated over r in ascending order.
void weighted_gram(const RowMatrix& X, const std::vector<double>* coef, RowMatrix& S, int threads) {
    const auto K = static_cast<std::ptrdiff_t>(X.cols());
    const auto n = X.rows();
    S = RowMatrix(X.cols(), X.cols());
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads) if (threads > 1)
    for (std::ptrdiff_t k = 0; k < K; ++k) {
        double* out = &S(static_cast<std::size_t>(k), 0);
        for (std::size_t r = 0; r < n; ++r) {
            const auto x = X.row(r);
            const double a = coef != nullptr ? (*coef)[r] * x[k] : x[k];
            if (a == 0.0) continue;
            for (std::ptrdiff_t f = k; f < K; ++f) out[f] += a * x[f];
        }
    }
    for (std::size_t k = 0; k < X.cols(); ++k) {
        for (std::size_t f = 0; f < k; ++f) S(k, f) = S(f, k);
    }
}

}  // namespace

void recompute_user_cache(FactorModel& model, int threads) { weighted_gram(model.P, nullptr, model.Sp, threads); }

void recompute_item_cache(FactorModel& model, const ConfidenceWeights& weights, int threads) {
    if (weights.size() != model.num_items()) throw InvalidInput("confidence vector length mismatch");
    weighted_gram(model.Q, &weights.c, model.Sq, threads);
}

void recompute_caches(FactorModel& model, const ConfidenceWeights& weights, int threads) {
    recompute_user_cache(model, threads);
    recompute_item_cache(model, weights, threads);
}

void refresh_prediction_cache(FactorModel& model, const InteractionDataset& train) {
    model.pred.assign(train.nnz(), 0.0);
    for (UserIndex u = 0; u < train.num_users(); ++u) {
        for (const auto& e : train.user_row(u)) model.pred[e.slot] = predict(model, u, e.id);
    }
}

namespace {

double gram_error(const RowMatrix& X, const std::vector<double>* coef, const RowMatrix& S) {
    const auto K = X.cols();
    if (S.rows() != K || S.cols() != K) return INFINITY;
    double worst = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
        for (std::size_t f = 0; f < K; ++f) {
            long double exact = 0.0L;
            for (std::size_t r = 0; r < X.rows(); ++r) {
                const long double w = coef != nullptr ? (*coef)[r] : 1.0;
                exact += w * X(r, k) * X(r, f);
            }
            worst = std::max(worst, static_cast<double>(std::fabs(exact - S(k, f))));
        }
    }
    return worst;
}

}  // namespace

double user_cache_error(const FactorModel& model) { return gram_error(model.P, nullptr, model.Sp); }

double item_cache_error(const FactorModel& model, const ConfidenceWeights& weights) {
    return gram_error(model.Q, &weights.c, model.Sq);
}

double prediction_cache_error(const FactorModel& model, const InteractionDataset& train) {
    if (model.pred.size() != train.nnz()) return INFINITY;
    double worst = 0.0;
    for (Slot s = 0; s < train.nnz(); ++s) {
        worst = std::max(worst, std::fabs(model.pred[s] - predict(model, train.user_of(s), train.item_of(s))));
    }
    return worst;
}

}  // namespace eals
