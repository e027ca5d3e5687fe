#pragma once

#include "eals/dataset.hpp"
#include "eals/model.hpp"
#include "eals/trainer.hpp"
#include "eals/weighting.hpp"

#include <cstdint>

namespace eals {

// ---------------------------------------------------------------------------
// Vector-wise ALS with a uniform missing weight w0.
// ---------------------------------------------------------------------------

struct AlsConfig {
    std::size_t factors = 64;
    double lambda = 0.01;
    double w0 = 1.0;
    int max_iters = 500;
    double rel_tol = 1e-5;
    std::uint64_t seed = 42;
    int threads = 1;
    double init_scale = 0.01;

    void validate() const;
};

/**
 * Ridge solve for p_u with Q fixed:
 *
 *   (Sq + sum_{i in R_u} (w_ui - c_i) q_i q_i^T + lambda I) p_u = sum_{i in R_u} w_ui r_ui q_i
 *
 * where Sq = sum_i c_i q_i q_i^T must be current (w0 Q^T Q under uniform
 * weights). The system is solved by Cholesky; NumericalError if it is not
 * positive definite. The prediction cache is not touched.
 */
void als_update_user(FactorModel& model, const InteractionDataset& train, const ConfidenceWeights& weights,
                     double lambda, UserIndex u);
/// Item counterpart, with c_i Sp in place of Sq.
void als_update_item(FactorModel& model, const InteractionDataset& train, const ConfidenceWeights& weights,
                     double lambda, ItemIndex i);

/// Solve every user, rebuild Sp, solve every item, then rebuild Sq and the
/// prediction cache.
void als_sweep(FactorModel& model, const InteractionDataset& train, const ConfidenceWeights& weights, double lambda,
               int threads = 1);

TrainResult als_train(const InteractionDataset& train, const AlsConfig& config);

/// Continues ALS on a prepared model under arbitrary item weights.
TrainTrace als_train_from(FactorModel& model, const InteractionDataset& train, const ConfidenceWeights& weights,
                          double lambda, int max_iters, double rel_tol, int threads = 1);

// ---------------------------------------------------------------------------
// BPR with uniform negative sampling.
// ---------------------------------------------------------------------------

struct BprConfig {
    std::size_t factors = 64;
    double lambda = 0.01;
    double learning_rate = 0.05;
    int epochs = 50;
    /// 0 means one sample per training interaction.
    std::size_t samples_per_epoch = 0;
    std::uint64_t seed = 42;
    double init_scale = 0.01;

    void validate() const;
};

/// Gradient multiplier 1 / (1 + exp(r_ui - r_uj)).
double bpr_sigma(double score_pos, double score_neg);

/// One ascent step on ln sigmoid(r_ui - r_uj) - lambda/2 |theta|^2 for the
/// triple; returns the multiplier used.
double bpr_step(FactorModel& model, UserIndex u, ItemIndex pos, ItemIndex neg, double learning_rate, double lambda);

/// The trace's `objective` is the mean sampled -ln sigmoid(r_ui - r_uj) of
/// each epoch. The returned model has Sp = P^T P, Sq = Q^T Q and a fresh
/// prediction cache.
TrainResult bpr_train(const InteractionDataset& train, const BprConfig& config);

}  // namespace eals
