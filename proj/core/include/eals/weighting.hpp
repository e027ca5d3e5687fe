#pragma once

#include "eals/dataset.hpp"

#include <iosfwd>
#include <vector>

namespace eals {

/// Item frequencies |R_i| / |R|; sums to one.
struct PopularityVector {
    std::vector<double> f;
};

/**
 * Missing-data confidence per item, c_i = c0 * f_i^alpha / sum_j f_j^alpha.
 *
 * Items with f_i = 0 get c_i = 0 for every alpha, including alpha = 0.
 * `observed_default` is the weight given to observed cells when the dataset
 * does not carry its own.
 */
struct ConfidenceWeights {
    std::vector<double> c;
    double c0 = 0.0;
    double alpha = 0.0;
    double observed_default = 1.0;

    double operator[](ItemIndex i) const { return c[i]; }
    std::size_t size() const noexcept { return c.size(); }
};

PopularityVector item_popularity(const InteractionDataset& train);

ConfidenceWeights confidence_vector(const PopularityVector& popularity, double c0, double alpha);

/// Every item gets the same missing weight w0.
ConfidenceWeights uniform_confidence(std::size_t num_items, double w0);

/// `i c_i` per line, 17 significant digits.
void write_confidence(std::ostream& out, const ConfidenceWeights& weights);

}  // namespace eals
