#pragma once

#include "eals/dataset.hpp"
#include "eals/weighting.hpp"

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace eals {

/// Dense row-major matrix of doubles whose row count can grow.
class RowMatrix {
public:
    RowMatrix() = default;
    RowMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    std::span<double> values() noexcept { return data_; }
    std::span<const double> values() const noexcept { return data_; }

    void append_row(std::span<const double> values);
    void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

    friend bool operator==(const RowMatrix&, const RowMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/**
 * Latent factors plus the two Gram caches and the observed-cell prediction
 * cache.
 *
 *   Sp   = P^T P
 *   Sq   = sum_i c_i q_i q_i^T
 *   pred = p_u . q_i for every observed cell, indexed by dataset slot
 */
struct FactorModel {
    std::size_t factors = 0;
    RowMatrix P;
    RowMatrix Q;
    RowMatrix Sp;
    RowMatrix Sq;
    std::vector<double> pred;

    std::size_t num_users() const noexcept { return P.rows(); }
    std::size_t num_items() const noexcept { return Q.rows(); }

    friend bool operator==(const FactorModel&, const FactorModel&) = default;
};

struct ScoredItem {
    ItemIndex item;
    double score;

    friend bool operator==(const ScoredItem&, const ScoredItem&) = default;
};

/// Descending score, ties by ascending item id.
using RankedList = std::vector<ScoredItem>;

/// Uniform [0, scale) entries, P row by row then Q. Sp is consistent; Sq
/// and the prediction cache stay empty until `prepare_model`.
FactorModel init_model(std::size_t num_users, std::size_t num_items, std::size_t factors, std::uint64_t seed,
                       double scale = 0.01);

/// init_model sized to `train`, followed by prepare_model.
FactorModel init_model(const InteractionDataset& train, const ConfidenceWeights& weights, std::size_t factors,
                       std::uint64_t seed, double scale = 0.01);

/// Rebuilds both caches and the prediction cache.
void prepare_model(FactorModel& model, const InteractionDataset& train, const ConfidenceWeights& weights,
                   int threads = 1);

double predict(const FactorModel& model, UserIndex u, ItemIndex i);

/// Top-k items for u. With `exclude` set, items in that dataset's row u
/// are skipped.
RankedList recommend_topk(const FactorModel& model, UserIndex u, std::size_t k,
                          const InteractionDataset* exclude = nullptr);

/// Sp from P and Sq from (Q, c). Each entry is summed over rows in
/// ascending order and mirrored, so results do not depend on `threads`.
void recompute_caches(FactorModel& model, const ConfidenceWeights& weights, int threads = 1);
void recompute_user_cache(FactorModel& model, int threads = 1);
void recompute_item_cache(FactorModel& model, const ConfidenceWeights& weights, int threads = 1);

void refresh_prediction_cache(FactorModel& model, const InteractionDataset& train);

/// Max-norm distance of each cache from its definition.
double user_cache_error(const FactorModel& model);
double item_cache_error(const FactorModel& model, const ConfidenceWeights& weights);
double prediction_cache_error(const FactorModel& model, const InteractionDataset& train);

/// Model snapshot: `M N K`, then M rows of P and N rows of Q at 17
/// significant digits.
void write_model_snapshot(std::ostream& out, const FactorModel& model);
/// Reads factors only; caches are left empty.
FactorModel read_model_snapshot(std::istream& in);

}  // namespace eals
