#include "eals/baselines.hpp"

#include "eals/error.hpp"
#include "eals/random.hpp"

#include <chrono>
#include <cmath>
#include <vector>

namespace eals {

void BprConfig::validate() const {
    if (factors < 1) throw InvalidInput("factors must be >= 1");
    if (!(lambda >= 0.0)) throw InvalidInput("lambda must be >= 0");
    if (!(learning_rate > 0.0)) throw InvalidInput("learning_rate must be > 0");
    if (epochs < 0) throw InvalidInput("epochs must be >= 0");
    if (!(init_scale > 0.0)) throw InvalidInput("init_scale must be > 0");
}

double bpr_sigma(double score_pos, double score_neg) { return 1.0 / (1.0 + std::exp(score_pos - score_neg)); }

double bpr_step(FactorModel& model, UserIndex u, ItemIndex pos, ItemIndex neg, double learning_rate,
                double lambda) {
    auto p = model.P.row(u);
    auto qi = model.Q.row(pos);
    auto qj = model.Q.row(neg);
    double x_pos = 0.0, x_neg = 0.0;
    for (std::size_t f = 0; f < model.factors; ++f) {
        x_pos += p[f] * qi[f];
        x_neg += p[f] * qj[f];
    }
    const double sigma = bpr_sigma(x_pos, x_neg);
    for (std::size_t f = 0; f < model.factors; ++f) {
        const double pf = p[f], qif = qi[f], qjf = qj[f];
        p[f] += learning_rate * (sigma * (qif - qjf) - lambda * pf);
        qi[f] += learning_rate * (sigma * pf - lambda * qif);
        qj[f] += learning_rate * (-sigma * pf - lambda * qjf);
    }
    return sigma;
}

TrainResult bpr_train(const InteractionDataset& train, const BprConfig& config) {
    config.validate();
    if (train.nnz() == 0) throw InvalidInput("BPR needs at least one interaction");
    auto model = init_model(train.num_users(), train.num_items(), config.factors, config.seed, config.init_scale);
    Rng rng(mix_seed(config.seed));
    const auto samples = config.samples_per_epoch > 0 ? config.samples_per_epoch : train.nnz();

    using clock = std::chrono::steady_clock;
    TrainTrace trace;
    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        const auto start = clock::now();
        double loss = 0.0;
        std::size_t used = 0;
        for (std::size_t n = 0; n < samples; ++n) {
            const auto s = static_cast<Slot>(rng.below(train.nnz()));
            const auto u = train.user_of(s);
            const auto pos = train.item_of(s);
            if (train.user_row(u).size() >= train.num_items()) continue;
            ItemIndex neg;
            do {
                neg = static_cast<ItemIndex>(rng.below(train.num_items()));
            } while (train.find(u, neg).has_value());
            const double sigma = bpr_step(model, u, pos, neg, config.learning_rate, config.lambda);
            // sigma = 1 - sigmoid(x), so -ln sigmoid(x) = -ln(1 - sigma).
            loss += -std::log1p(-sigma);
            ++used;
        }
        const double seconds = std::chrono::duration<double>(clock::now() - start).count();
        trace.push_back({epoch, used > 0 ? loss / static_cast<double>(used) : 0.0, seconds});
    }
    recompute_caches(model, uniform_confidence(train.num_items(), 1.0));
    refresh_prediction_cache(model, train);
    return {std::move(model), std::move(trace)};
}

}  // namespace eals
