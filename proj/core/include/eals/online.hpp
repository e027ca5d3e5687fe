#pragma once

#include "eals/dataset.hpp"
#include "eals/model.hpp"
#include "eals/weighting.hpp"

#include <cstdint>
#include <shared_mutex>
#include <string>

namespace eals {

struct OnlineConfig {
    /// Weight of a streamed interaction.
    double w_new = 4.0;
    /// Local update passes per event; 0 records the event without learning.
    int online_iters = 1;
    std::uint64_t seed = 7;
    double lambda = 0.01;
    /// New rows are drawn uniformly from [-init_scale, init_scale); 0 starts
    /// them at zero.
    double init_scale = 0.01;
    /// Full cache rebuild after this many ingests (0 disables).
    std::size_t recompute_every = 100000;

    void validate() const;
};

enum class IngestAction { insert, reweight };

/**
 * Records (u, i) in `train`. An unseen cell is inserted with r = 1 and
 * weight `w_new`; a seen one keeps a single entry whose weight becomes
 * max(old, w_new) and whose timestamp becomes `t`.
 */
IngestAction repeat_interaction_policy(InteractionDataset& train, UserIndex u, ItemIndex i, double w_new,
                                       std::int64_t t, Slot* slot = nullptr);

struct IngestResult {
    UserIndex user;
    ItemIndex item;
    IngestAction action;
    bool new_user;
    bool new_item;
};

/**
 * Single-writer incremental refresher.
 *
 * Each ingest re-solves only p_u and q_i (user first), maintains Sp and Sq by
 * rank-one corrections and patches the prediction cache of row u and column
 * i. Its cost depends on K, |R_u| and |R_i| only.
 *
 * Readers calling `predict` / `recommend` concurrently with `ingest` see a
 * whole row either before or after an update: an ingest holds the exclusive
 * lock for its O(K^2 + (|R_u| + |R_i|) K) duration and readers share it.
 */
class OnlineUpdater {
public:
    /// Takes a trained model; caches are rebuilt so they match `weights`.
    OnlineUpdater(FactorModel model, InteractionDataset train, ConfidenceWeights weights, OnlineConfig config);

    IngestResult ingest(UserIndex u, ItemIndex i, std::int64_t t);
    /// Unknown keys get fresh dense ids.
    IngestResult ingest(const std::string& user_key, const std::string& item_key, std::int64_t t);

    /// Appends rows (random init, zero item confidence) until id `u` / `i`
    /// exists. Rows are seeded from (seed, id) so the result does not depend
    /// on arrival order.
    /// Keys come from `keys` when given, otherwise `#<id>`.
    void ensure_user(UserIndex u, const IdMap* keys = nullptr);
    void ensure_item(ItemIndex i, const IdMap* keys = nullptr);

    double predict(UserIndex u, ItemIndex i) const;
    RankedList recommend(UserIndex u, std::size_t k, bool exclude_train = false) const;

    /// Rebuilds Sp and Sq from scratch.
    void recompute_caches();

    const FactorModel& model() const noexcept { return model_; }
    const InteractionDataset& train() const noexcept { return train_; }
    const ConfidenceWeights& weights() const noexcept { return weights_; }
    const OnlineConfig& config() const noexcept { return config_; }
    std::size_t ingest_count() const noexcept { return ingests_; }

private:
    void init_row(std::span<double> row, std::uint64_t salt, std::uint32_t id) const;
    void append_user(const std::string& key);
    void append_item(const std::string& key);
    IngestResult ingest_locked(UserIndex u, ItemIndex i, std::int64_t t, bool new_user, bool new_item);

    FactorModel model_;
    InteractionDataset train_;
    ConfidenceWeights weights_;
    OnlineConfig config_;
    std::size_t ingests_ = 0;
    mutable std::shared_mutex mutex_;
};

/// Sum over row u of the weighted loss (unobserved cells weighted by c_i)
/// plus lambda * |p_u|^2.
double user_local_objective(const FactorModel& model, const InteractionDataset& train,
                            const ConfidenceWeights& weights, double lambda, UserIndex u);

}  // namespace eals
