#pragma once

#include "eals/ingest.hpp"

#include <cstdint>

namespace eals {

/**
 * Seeded generator for implicit-feedback logs with skewed popularity.
 *
 * User activity and item popularity follow power laws, weight proportional
 * to rank^-exponent over a random ranking. Users and items belong to latent
 * clusters; with probability `affinity` an interaction picks an item of the
 * user's own cluster (by popularity within the cluster), otherwise any item
 * by global popularity. Each user arrives at a random time and interacts
 * uniformly between arrival and `time_span`, so late users show up only at
 * the end of the stream. As a user's tenure grows, more of their picks
 * ignore popularity and land uniformly on live items of the chosen pool.
 *
 * Produces exactly `interactions` distinct pairs unless the per-user cap
 * (half the catalogue) makes that impossible.
 */
struct SyntheticConfig {
    std::size_t users = 1000;
    std::size_t items = 1000;
    std::size_t interactions = 20000;
    std::uint64_t seed = 1;
    double exponent = 1.0;
    std::size_t clusters = 16;
    double affinity = 0.8;
    std::int64_t time_span = 1'000'000;
    /// Items are released at uniform times and their appeal decays
    /// exponentially with this mean lifetime (fraction of the span);
    /// 0 keeps popularity static.
    double item_lifetime = 0.3;
    /// Number of periods the time-varying appeal is discretized into.
    std::size_t periods = 20;
    /// Probability, scaled by the user's tenure in [0, 1), that an
    /// interaction ignores popularity and picks a live item uniformly.
    double exploration = 0.5;
};

RawInteractions generate_synthetic(const SyntheticConfig& config);

}  // namespace eals
