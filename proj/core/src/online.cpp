#include "eals/online.hpp"

#include "eals/error.hpp"
#include "eals/random.hpp"
#include "eals/trainer.hpp"

#include <algorithm>
#include <mutex>
#include <vector>

namespace eals {

void OnlineConfig::validate() const {
    if (!(w_new > 0.0)) throw InvalidInput("w_new must be > 0");
    if (online_iters < 0) throw InvalidInput("online_iters must be >= 0");
    if (!(lambda > 0.0)) throw InvalidInput("lambda must be > 0");
    if (!(init_scale >= 0.0)) throw InvalidInput("init_scale must be >= 0");
}

IngestAction repeat_interaction_policy(InteractionDataset& train, UserIndex u, ItemIndex i, double w_new,
                                       std::int64_t t, Slot* slot) {
    if (auto s = train.find(u, i)) {
        train.set_weight(*s, std::max(train.weight(*s), w_new));
        train.set_timestamp(*s, t);
        if (slot != nullptr) *slot = *s;
        return IngestAction::reweight;
    }
    const auto s = train.insert({u, i, t, train.nnz(), 1.0, w_new});
    if (slot != nullptr) *slot = s;
    return IngestAction::insert;
}

namespace {

constexpr std::uint64_t user_salt = 0x75736572ULL;
constexpr std::uint64_t item_salt = 0x6974656dULL;

// S += coef * (b b^T - a a^T), element by element, kept symmetric.
void rank_one_swap(RowMatrix& S, std::span<const double> a, std::span<const double> b, double coef) {
    const auto K = a.size();
    for (std::size_t k = 0; k < K; ++k) {
        for (std::size_t f = k; f < K; ++f) {
            const double v = S(k, f) - coef * a[k] * a[f] + coef * b[k] * b[f];
            S(k, f) = v;
            S(f, k) = v;
        }
    }
}

}  // namespace

OnlineUpdater::OnlineUpdater(FactorModel model, InteractionDataset train, ConfidenceWeights weights,
                             OnlineConfig config)
    : model_(std::move(model)), train_(std::move(train)), weights_(std::move(weights)), config_(config) {
    config_.validate();
    prepare_model(model_, train_, weights_);
}

void OnlineUpdater::init_row(std::span<double> row, std::uint64_t salt, std::uint32_t id) const {
    Rng rng(mix_seed(config_.seed ^ mix_seed(salt + id)));
    for (auto& v : row) v = config_.init_scale * (2.0 * rng.uniform() - 1.0);
}

void OnlineUpdater::append_user(const std::string& key) {
    const auto u = train_.add_user(key);
    std::vector<double> row(model_.factors);
    init_row(row, user_salt, u);
    model_.P.append_row(row);
    std::vector<double> zero(model_.factors, 0.0);
    rank_one_swap(model_.Sp, zero, row, 1.0);
}

void OnlineUpdater::append_item(const std::string& key) {
    const auto i = train_.add_item(key);
    std::vector<double> row(model_.factors);
    init_row(row, item_salt, i);
    model_.Q.append_row(row);
    // Unseen in training: zero frequency, zero confidence, no Sq change.
    weights_.c.push_back(0.0);
}

void OnlineUpdater::ensure_user(UserIndex u, const IdMap* keys) {
    std::unique_lock lock(mutex_);
    while (train_.num_users() <= u) {
        const auto id = static_cast<std::uint32_t>(train_.num_users());
        append_user(keys != nullptr && id < keys->size() ? keys->key(id) : "#" + std::to_string(id));
    }
}

void OnlineUpdater::ensure_item(ItemIndex i, const IdMap* keys) {
    std::unique_lock lock(mutex_);
    while (train_.num_items() <= i) {
        const auto id = static_cast<std::uint32_t>(train_.num_items());
        append_item(keys != nullptr && id < keys->size() ? keys->key(id) : "#" + std::to_string(id));
    }
}

IngestResult OnlineUpdater::ingest(UserIndex u, ItemIndex i, std::int64_t t) {
    const bool new_user = u >= train_.num_users();
    const bool new_item = i >= train_.num_items();
    ensure_user(u);
    ensure_item(i);
    std::unique_lock lock(mutex_);
    return ingest_locked(u, i, t, new_user, new_item);
}

IngestResult OnlineUpdater::ingest(const std::string& user_key, const std::string& item_key, std::int64_t t) {
    std::unique_lock lock(mutex_);
    auto u = train_.users().find(user_key);
    auto i = train_.items().find(item_key);
    const bool new_user = !u, new_item = !i;
    if (new_user) {
        append_user(user_key);
        u = static_cast<UserIndex>(train_.num_users() - 1);
    }
    if (new_item) {
        append_item(item_key);
        i = static_cast<ItemIndex>(train_.num_items() - 1);
    }
    return ingest_locked(*u, *i, t, new_user, new_item);
}

IngestResult OnlineUpdater::ingest_locked(UserIndex u, ItemIndex i, std::int64_t t, bool new_user, bool new_item) {
    Slot slot = 0;
    const auto action = repeat_interaction_policy(train_, u, i, config_.w_new, t, &slot);
    if (action == IngestAction::insert) model_.pred.push_back(eals::predict(model_, u, i));

    const auto K = model_.factors;
    std::vector<double> before(K);
    for (int pass = 0; pass < config_.online_iters; ++pass) {
        auto p = model_.P.row(u);
        std::copy(p.begin(), p.end(), before.begin());
        update_user(model_, train_, weights_, config_.lambda, u);
        rank_one_swap(model_.Sp, before, p, 1.0);

        auto q = model_.Q.row(i);
        std::copy(q.begin(), q.end(), before.begin());
        update_item(model_, train_, weights_, config_.lambda, i);
        if (weights_.c[i] != 0.0) rank_one_swap(model_.Sq, before, q, weights_.c[i]);
    }

    ++ingests_;
    if (config_.recompute_every > 0 && ingests_ % config_.recompute_every == 0) {
        eals::recompute_caches(model_, weights_);
    }
    return {u, i, action, new_user, new_item};
}

double OnlineUpdater::predict(UserIndex u, ItemIndex i) const {
    std::shared_lock lock(mutex_);
    return eals::predict(model_, u, i);
}

RankedList OnlineUpdater::recommend(UserIndex u, std::size_t k, bool exclude_train) const {
    std::shared_lock lock(mutex_);
    return recommend_topk(model_, u, k, exclude_train ? &train_ : nullptr);
}

void OnlineUpdater::recompute_caches() {
    std::unique_lock lock(mutex_);
    eals::recompute_caches(model_, weights_);
}

double user_local_objective(const FactorModel& model, const InteractionDataset& train,
                            const ConfidenceWeights& weights, double lambda, UserIndex u) {
    std::vector<double> w(weights.c.begin(), weights.c.end()), r(train.num_items(), 0.0);
    for (const auto& e : train.user_row(u)) {
        w[e.id] = train.weight(e.slot);
        r[e.id] = train.rating(e.slot);
    }
    double loss = 0.0;
    for (ItemIndex i = 0; i < train.num_items(); ++i) {
        const double err = r[i] - predict(model, u, i);
        loss += w[i] * err * err;
    }
    double norm = 0.0;
    for (double v : model.P.row(u)) norm += v * v;
    return loss + lambda * norm;
}

}  // namespace eals
