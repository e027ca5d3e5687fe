#include "eals/dataset.hpp"
#include "eals/error.hpp"
#include "eals/synthetic.hpp"
#include "eals/weighting.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <set>

namespace eals {
namespace {

TEST(Synthetic, DeterministicDistinctPairs) {
    SyntheticConfig cfg;
    cfg.users = 300;
    cfg.items = 200;
    cfg.interactions = 5000;
    const auto a = generate_synthetic(cfg);
    EXPECT_EQ(a, generate_synthetic(cfg));
    ASSERT_EQ(a.size(), 5000u);
    std::set<std::pair<std::string, std::string>> pairs;
    for (const auto& r : a) {
        EXPECT_TRUE(pairs.insert({r.user, r.item}).second);
        EXPECT_GE(r.timestamp, 0);
        EXPECT_LT(r.timestamp, cfg.time_span);
        EXPECT_EQ(r.user[0], 'u');
        EXPECT_EQ(r.item[0], 'i');
    }
    cfg.seed = 2;
    EXPECT_NE(a, generate_synthetic(cfg));
}

TEST(Synthetic, PopularityIsSkewed) {
    SyntheticConfig cfg;
    cfg.users = 2000;
    cfg.items = 1000;
    cfg.interactions = 40000;
    const auto data = build_dataset(generate_synthetic(cfg));
    auto f = item_popularity(data).f;
    std::sort(f.rbegin(), f.rend());
    double head = 0.0;
    for (std::size_t i = 0; i < f.size() / 10; ++i) head += f[i];
    EXPECT_GT(head, 0.3);
}

TEST(Synthetic, PerUserCapLimitsOutput) {
    SyntheticConfig cfg;
    cfg.users = 3;
    cfg.items = 4;
    cfg.interactions = 100;
    EXPECT_EQ(generate_synthetic(cfg).size(), 6u);
}

// Mean share of the training log held by the items of the latest 10% of
// interactions.
double late_item_share(double exploration) {
    SyntheticConfig cfg;
    cfg.users = 1500;
    cfg.items = 1000;
    cfg.interactions = 30000;
    cfg.exploration = exploration;
    const auto split = split_chronological(build_dataset(generate_synthetic(cfg)), 0.1);
    const auto f = item_popularity(split.train).f;
    double total = 0.0;
    for (const auto& e : split.test) total += e.item < f.size() ? f[e.item] : 0.0;
    return total / static_cast<double>(split.test.size());
}

TEST(Synthetic, ExplorationFlattensLatePicks) { EXPECT_LT(late_item_share(0.8), late_item_share(0.0)); }

TEST(Synthetic, RejectsBadConfig) {
    SyntheticConfig cfg;
    cfg.items = 0;
    EXPECT_THROW(generate_synthetic(cfg), InvalidInput);
    cfg = {};
    cfg.affinity = 1.5;
    EXPECT_THROW(generate_synthetic(cfg), InvalidInput);
    cfg = {};
    cfg.exploration = -0.1;
    EXPECT_THROW(generate_synthetic(cfg), InvalidInput);
    cfg = {};
    cfg.item_lifetime = -1.0;
    EXPECT_THROW(generate_synthetic(cfg), InvalidInput);
}

}  // namespace
}  // namespace eals
