#include "eals/synthetic.hpp"

#include "eals/error.hpp"
#include "eals/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>
#include <vector>

namespace eals {

namespace {

// Cumulative-weight sampler; binary search on a uniform draw.
class Sampler {
public:
    Sampler() = default;
    explicit Sampler(std::vector<std::uint32_t> ids, const std::vector<double>& weight) : ids_(std::move(ids)) {
        cumulative_.reserve(ids_.size());
        double total = 0.0;
        for (auto id : ids_) cumulative_.push_back(total += weight[id]);
    }

    bool empty() const { return ids_.empty(); }

    std::uint32_t draw(Rng& rng) const {
        const double x = rng.uniform() * cumulative_.back();
        auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), x);
        if (it == cumulative_.end()) --it;
        return ids_[static_cast<std::size_t>(it - cumulative_.begin())];
    }

    std::uint32_t draw_uniform(Rng& rng) const { return ids_[rng.below(ids_.size())]; }

private:
    std::vector<std::uint32_t> ids_;
    std::vector<double> cumulative_;
};

std::vector<double> power_law(std::size_t n, double exponent, Rng& rng) {
    std::vector<std::uint32_t> rank(n);
    std::iota(rank.begin(), rank.end(), 0u);
    for (std::size_t k = n; k > 1; --k) std::swap(rank[k - 1], rank[rng.below(k)]);
    std::vector<double> w(n);
    for (std::size_t k = 0; k < n; ++k) w[k] = std::pow(static_cast<double>(rank[k]) + 1.0, -exponent);
    return w;
}

}  // namespace

RawInteractions generate_synthetic(const SyntheticConfig& cfg) {
    if (cfg.users == 0 || cfg.items == 0) throw InvalidInput("synthetic data needs users and items");
    if (cfg.clusters == 0) throw InvalidInput("synthetic data needs at least one cluster");
    if (!(cfg.affinity >= 0.0 && cfg.affinity <= 1.0)) throw InvalidInput("affinity must lie in [0, 1]");
    if (!(cfg.exploration >= 0.0 && cfg.exploration <= 1.0)) throw InvalidInput("exploration must lie in [0, 1]");
    if (!(cfg.item_lifetime >= 0.0)) throw InvalidInput("item lifetime must be >= 0");
    if (cfg.time_span < 1) throw InvalidInput("time span must be positive");

    Rng rng(mix_seed(cfg.seed));
    const auto activity = power_law(cfg.users, cfg.exponent, rng);
    const auto popularity = power_law(cfg.items, cfg.exponent, rng);

    std::vector<std::uint32_t> user_cluster(cfg.users), item_cluster(cfg.items);
    for (auto& c : user_cluster) c = static_cast<std::uint32_t>(rng.below(cfg.clusters));
    for (auto& c : item_cluster) c = static_cast<std::uint32_t>(rng.below(cfg.clusters));

    std::vector<std::uint32_t> all_users(cfg.users), all_items(cfg.items);
    std::iota(all_users.begin(), all_users.end(), 0u);
    std::iota(all_items.begin(), all_items.end(), 0u);
    std::vector<std::vector<std::uint32_t>> members(cfg.clusters);
    for (std::uint32_t i = 0; i < cfg.items; ++i) members[item_cluster[i]].push_back(i);

    // Release times: some items predate the log so the catalogue is never empty.
    const bool drifting = cfg.item_lifetime > 0.0;
    const auto periods = drifting ? std::max<std::size_t>(1, cfg.periods) : 1;
    std::vector<double> release(cfg.items, 0.0);
    if (drifting) {
        for (auto& r : release) r = -cfg.item_lifetime + (1.0 + cfg.item_lifetime) * rng.uniform();
    }

    const Sampler user_sampler(all_users, activity);
    std::vector<Sampler> global_items(periods);
    std::vector<std::vector<Sampler>> cluster_items(periods, std::vector<Sampler>(cfg.clusters));
    std::vector<double> appeal(cfg.items);
    for (std::size_t b = 0; b < periods; ++b) {
        const double now = (static_cast<double>(b) + 0.5) / static_cast<double>(periods);
        for (std::size_t i = 0; i < cfg.items; ++i) {
            const double age = now - release[i];
            appeal[i] = !drifting ? popularity[i] : age < 0.0 ? 0.0 : popularity[i] * std::exp(-age / cfg.item_lifetime);
        }
        auto live = [&](const std::vector<std::uint32_t>& ids) {
            std::vector<std::uint32_t> out;
            for (auto i : ids) {
                if (appeal[i] > 0.0) out.push_back(i);
            }
            return out;
        };
        global_items[b] = Sampler(live(all_items), appeal);
        for (std::size_t c = 0; c < cfg.clusters; ++c) cluster_items[b][c] = Sampler(live(members[c]), appeal);
    }

    std::vector<double> arrival(cfg.users);
    for (auto& a : arrival) a = rng.uniform();

    const auto cap = std::max<std::size_t>(1, cfg.items / 2);
    const auto target = std::min(cfg.interactions, cfg.users * cap);
    std::vector<std::size_t> degree(cfg.users, 0);
    std::unordered_set<std::uint64_t> seen;
    seen.reserve(target * 2);

    RawInteractions out;
    out.reserve(target);
    const std::size_t max_attempts = 100 * target + 1000;
    for (std::size_t attempt = 0; out.size() < target && attempt < max_attempts; ++attempt) {
        const auto u = user_sampler.draw(rng);
        if (degree[u] >= cap) continue;
        const double when = arrival[u] + (1.0 - arrival[u]) * rng.uniform();
        const auto period = std::min(periods - 1, static_cast<std::size_t>(when * static_cast<double>(periods)));
        const auto& local_items = cluster_items[period][user_cluster[u]];
        const auto& any_items = global_items[period];
        if (any_items.empty()) continue;
        const bool local = !local_items.empty() && rng.uniform() < cfg.affinity;
        const double tenure = (when - arrival[u]) / (1.0 - arrival[u]);
        const bool explore = rng.uniform() < cfg.exploration * tenure;
        const auto& pool = local ? local_items : any_items;
        const auto i = explore ? pool.draw_uniform(rng) : pool.draw(rng);
        if (!seen.insert((std::uint64_t{u} << 32) | i).second) continue;
        ++degree[u];
        const auto t = static_cast<std::int64_t>(when * static_cast<double>(cfg.time_span));
        out.push_back({"u" + std::to_string(u), "i" + std::to_string(i), t});
    }
    return out;
}

}  // namespace eals
