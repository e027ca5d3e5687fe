#include "eals/weighting.hpp"

#include "eals/error.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>

namespace eals {

PopularityVector item_popularity(const InteractionDataset& train) {
    if (train.nnz() == 0) throw InvalidInput("popularity of an empty dataset");
    PopularityVector out;
    out.f.resize(train.num_items());
    std::size_t total = 0;
    for (ItemIndex i = 0; i < train.num_items(); ++i) total += train.item_row(i).size();
    for (ItemIndex i = 0; i < train.num_items(); ++i) {
        out.f[i] = static_cast<double>(train.item_row(i).size()) / static_cast<double>(total);
    }
    return out;
}

ConfidenceWeights confidence_vector(const PopularityVector& popularity, double c0, double alpha) {
    if (!(c0 > 0.0)) throw InvalidInput("c0 must be positive");
    if (!(alpha >= 0.0)) throw InvalidInput("alpha must be non-negative");

    ConfidenceWeights out;
    out.c0 = c0;
    out.alpha = alpha;
    out.c.resize(popularity.f.size());
    double z = 0.0;
    for (std::size_t i = 0; i < popularity.f.size(); ++i) {
        const double f = popularity.f[i];
        if (f < 0.0) throw InvalidInput("negative item frequency");
        // 0^alpha is taken as 0 even at alpha = 0.
        out.c[i] = f > 0.0 ? std::pow(f, alpha) : 0.0;
        z += out.c[i];
    }
    if (!(z > 0.0)) throw InvalidInput("all item frequencies are zero");
    for (auto& ci : out.c) ci = c0 * ci / z;
    return out;
}

ConfidenceWeights uniform_confidence(std::size_t num_items, double w0) {
    if (!(w0 > 0.0)) throw InvalidInput("w0 must be positive");
    ConfidenceWeights out;
    out.c.assign(num_items, w0);
    out.c0 = w0 * static_cast<double>(num_items);
    out.alpha = 0.0;
    return out;
}

void write_confidence(std::ostream& out, const ConfidenceWeights& weights) {
    out << std::setprecision(17);
    for (std::size_t i = 0; i < weights.size(); ++i) out << i << ' ' << weights.c[i] << '\n';
}

}  // namespace eals
