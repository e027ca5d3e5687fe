#pragma once

#include "eals/dataset.hpp"
#include "eals/model.hpp"
#include "eals/weighting.hpp"

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace eals {

struct TrainConfig {
    std::size_t factors = 64;
    double lambda = 0.01;
    int max_iters = 500;
    /// Stop once |L_t - L_{t-1}| / L_{t-1} drops below this.
    double rel_tol = 1e-5;
    std::uint64_t seed = 42;
    int threads = 1;
    double init_scale = 0.01;

    /// Throws InvalidInput on a non-positive factor count, lambda, thread
    /// count or init scale, or a negative iteration budget or tolerance.
    void validate() const;
};

struct TraceRecord {
    int iter;
    double objective;
    double seconds;
};

using TrainTrace = std::vector<TraceRecord>;

/// `{"iter":n,"objective":x,"seconds":s}` per line.
void write_trace_jsonl(std::ostream& out, const TrainTrace& trace);

// Coordinate updates. Each sets one factor to the exact minimizer of the
// weighted loss with everything else fixed, keeps the prediction cache of
// the touched row (or column) in sync, and returns the new value.
//
// The user update needs a current Sq, the item update a current Sp; neither
// touches the caches. A zero denominator (possible only with lambda = 0)
// yields 0; a negative one throws NumericalError.

double update_user_factor(FactorModel& model, const InteractionDataset& train, const ConfidenceWeights& weights,
                          double lambda, UserIndex u, std::size_t f);
double update_item_factor(FactorModel& model, const InteractionDataset& train, const ConfidenceWeights& weights,
                          double lambda, ItemIndex i, std::size_t f);

/// All factors of one row, ascending.
void update_user(FactorModel& model, const InteractionDataset& train, const ConfidenceWeights& weights,
                 double lambda, UserIndex u);
void update_item(FactorModel& model, const InteractionDataset& train, const ConfidenceWeights& weights,
                 double lambda, ItemIndex i);

/// Reference solvers that walk every item (or user) and recompute each
/// partial prediction from the factors. Unobserved cells get weight c_i and
/// target 0. Throw NumericalError on a non-positive denominator.
double naive_user_factor(const FactorModel& model, const InteractionDataset& train, const ConfidenceWeights& weights,
                         double lambda, UserIndex u, std::size_t f);
double naive_item_factor(const FactorModel& model, const InteractionDataset& train, const ConfidenceWeights& weights,
                         double lambda, ItemIndex i, std::size_t f);

/**
 * One pass of the fast learner: every user then every item, factors
 * ascending. Expects consistent caches on entry and leaves them consistent:
 * Sp is rebuilt between the phases and Sq after the item phase.
 *
 * Users (items) are split across `threads` workers; each worker owns whole
 * rows of P (Q) and the matching prediction-cache entries, so the result is
 * bit-identical for any thread count.
 */
void sweep(FactorModel& model, const InteractionDataset& train, const ConfidenceWeights& weights, double lambda,
           int threads = 1);

/// Weighted loss in O(|R| + M K^2) from Sq and the prediction cache.
double objective_fast(const FactorModel& model, const InteractionDataset& train, const ConfidenceWeights& weights,
                      double lambda);

/// Same loss by direct O(M N K) evaluation of every cell.
double objective_naive(const FactorModel& model, const InteractionDataset& train, const ConfidenceWeights& weights,
                       double lambda);

struct TrainResult {
    FactorModel model;
    TrainTrace trace;
};

/// Random init, then sweeps until the relative objective change falls below
/// `rel_tol` or `max_iters` sweeps have run.
TrainResult train(const InteractionDataset& train, const ConfidenceWeights& weights, const TrainConfig& config);

/// Continues from an existing, prepared model.
TrainTrace train_from(FactorModel& model, const InteractionDataset& train, const ConfidenceWeights& weights,
                      const TrainConfig& config);

}  // namespace eals
