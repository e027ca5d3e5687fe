#include "eals/trainer.hpp"

#include "eals/error.hpp"

#include <chrono>
#include <cmath>
#include <iomanip>
#include <ostream>

namespace eals {

void TrainConfig::validate() const {
    if (factors < 1) throw InvalidInput("factors must be >= 1");
    if (!(lambda > 0.0)) throw InvalidInput("lambda must be > 0");
    if (max_iters < 0) throw InvalidInput("max_iters must be >= 0");
    if (!(rel_tol >= 0.0)) throw InvalidInput("rel_tol must be >= 0");
    if (threads < 1) throw InvalidInput("threads must be >= 1");
    if (!(init_scale > 0.0)) throw InvalidInput("init_scale must be > 0");
}

void write_trace_jsonl(std::ostream& out, const TrainTrace& trace) {
    const auto old = out.precision(17);
    for (const auto& r : trace) {
        out << "{\"iter\":" << r.iter << ",\"objective\":" << r.objective << ",\"seconds\":" << r.seconds << "}\n";
    }
    out.precision(old);
}

namespace {

double solve(double numerator, double denominator) {
    if (denominator > 0.0) return numerator / denominator;
    if (denominator == 0.0) return 0.0;
    throw NumericalError("negative curvature in coordinate update");
}

}  // namespace

double update_user_factor(FactorModel& model, const InteractionDataset& train, const ConfidenceWeights& weights,
                          double lambda, UserIndex u, std::size_t f) {
    const auto K = model.factors;
    auto p = model.P.row(u);
    const double old = p[f];
    const auto row = train.user_row(u);

    double numer = 0.0, denom = 0.0;
    for (const auto& e : row) {
        const double q = model.Q(e.id, f);
        const double w = train.weight(e.slot);
        const double wc = w - weights.c[e.id];
        const double partial = model.pred[e.slot] - old * q;
        numer += (w * train.rating(e.slot) - wc * partial) * q;
        denom += wc * q * q;
    }
    const auto sq = model.Sq.row(f);
    for (std::size_t k = 0; k < K; ++k) {
        if (k != f) numer -= p[k] * sq[k];
    }
    denom += sq[f] + lambda;

    const double fresh = solve(numer, denom);
    for (const auto& e : row) {
        const double q = model.Q(e.id, f);
        model.pred[e.slot] = (model.pred[e.slot] - old * q) + fresh * q;
    }
    p[f] = fresh;
    return fresh;
}

double update_item_factor(FactorModel& model, const InteractionDataset& train, const ConfidenceWeights& weights,
                          double lambda, ItemIndex i, std::size_t f) {
    const auto K = model.factors;
    auto q = model.Q.row(i);
    const double old = q[f];
    const double ci = weights.c[i];
    const auto col = train.item_row(i);

    double numer = 0.0, denom = 0.0;
    for (const auto& e : col) {
        const double p = model.P(e.id, f);
        const double w = train.weight(e.slot);
        const double wc = w - ci;
        const double partial = model.pred[e.slot] - p * old;
        numer += (w * train.rating(e.slot) - wc * partial) * p;
        denom += wc * p * p;
    }
    const auto sp = model.Sp.row(f);
    double cross = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
        if (k != f) cross += q[k] * sp[k];
    }
    numer -= ci * cross;
    denom += ci * sp[f] + lambda;

    const double fresh = solve(numer, denom);
    for (const auto& e : col) {
        const double p = model.P(e.id, f);
        model.pred[e.slot] = (model.pred[e.slot] - p * old) + p * fresh;
    }
    q[f] = fresh;
    return fresh;
}

void update_user(FactorModel& model, const InteractionDataset& train, const ConfidenceWeights& weights,
                 double lambda, UserIndex u) {
    for (std::size_t f = 0; f < model.factors; ++f) update_user_factor(model, train, weights, lambda, u, f);
}

void update_item(FactorModel& model, const InteractionDataset& train, const ConfidenceWeights& weights,
                 double lambda, ItemIndex i) {
    for (std::size_t f = 0; f < model.factors; ++f) update_item_factor(model, train, weights, lambda, i, f);
}

namespace {

// Dense weight/target of every cell in one row or column.
struct DenseLine {
    std::vector<double> weight;
    std::vector<double> target;
};

DenseLine user_line(const InteractionDataset& train, const ConfidenceWeights& weights, UserIndex u) {
    DenseLine line{weights.c, std::vector<double>(train.num_items(), 0.0)};
    for (const auto& e : train.user_row(u)) {
        line.weight[e.id] = train.weight(e.slot);
        line.target[e.id] = train.rating(e.slot);
    }
    return line;
}

DenseLine item_line(const InteractionDataset& train, const ConfidenceWeights& weights, ItemIndex i) {
    DenseLine line{std::vector<double>(train.num_users(), weights.c[i]), std::vector<double>(train.num_users(), 0.0)};
    for (const auto& e : train.item_row(i)) {
        line.weight[e.id] = train.weight(e.slot);
        line.target[e.id] = train.rating(e.slot);
    }
    return line;
}

double dot_without(std::span<const double> a, std::span<const double> b, std::size_t skip) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        if (k != skip) s += a[k] * b[k];
    }
    return s;
}

double naive_solve(double numer, double denom) {
    if (!(denom > 0.0)) throw NumericalError("singular coordinate update (zero denominator)");
    return numer / denom;
}

}  // namespace

double naive_user_factor(const FactorModel& model, const InteractionDataset& train, const ConfidenceWeights& weights,
                         double lambda, UserIndex u, std::size_t f) {
    const auto line = user_line(train, weights, u);
    const auto p = model.P.row(u);
    double numer = 0.0, denom = lambda;
    for (ItemIndex i = 0; i < train.num_items(); ++i) {
        const auto q = model.Q.row(i);
        const double partial = dot_without(p, q, f);
        numer += (line.target[i] - partial) * line.weight[i] * q[f];
        denom += line.weight[i] * q[f] * q[f];
    }
    return naive_solve(numer, denom);
}

double naive_item_factor(const FactorModel& model, const InteractionDataset& train, const ConfidenceWeights& weights,
                         double lambda, ItemIndex i, std::size_t f) {
    const auto line = item_line(train, weights, i);
    const auto q = model.Q.row(i);
    double numer = 0.0, denom = lambda;
    for (UserIndex u = 0; u < train.num_users(); ++u) {
        const auto p = model.P.row(u);
        const double partial = dot_without(p, q, f);
        numer += (line.target[u] - partial) * line.weight[u] * p[f];
        denom += line.weight[u] * p[f] * p[f];
    }
    return naive_solve(numer, denom);
}

void sweep(FactorModel& model, const InteractionDataset& train, const ConfidenceWeights& weights, double lambda,
           int threads) {
    const auto M = static_cast<std::ptrdiff_t>(train.num_users());
    const auto N = static_cast<std::ptrdiff_t>(train.num_items());
#pragma omp parallel for schedule(dynamic, 64) num_threads(threads) if (threads > 1)
    for (std::ptrdiff_t u = 0; u < M; ++u) {
        update_user(model, train, weights, lambda, static_cast<UserIndex>(u));
    }
    recompute_user_cache(model, threads);
#pragma omp parallel for schedule(dynamic, 64) num_threads(threads) if (threads > 1)
    for (std::ptrdiff_t i = 0; i < N; ++i) {
        update_item(model, train, weights, lambda, static_cast<ItemIndex>(i));
    }
    recompute_item_cache(model, weights, threads);
}

namespace {

double squared_norm(const RowMatrix& m) {
    double s = 0.0;
    for (double v : m.values()) s += v * v;
    return s;
}

}  // namespace

double objective_fast(const FactorModel& model, const InteractionDataset& train, const ConfidenceWeights& weights,
                      double lambda) {
    const auto K = model.factors;
    double observed = 0.0;
    for (UserIndex u = 0; u < train.num_users(); ++u) {
        for (const auto& e : train.user_row(u)) {
            const double r = model.pred[e.slot];
            const double err = train.rating(e.slot) - r;
            observed += train.weight(e.slot) * err * err - weights.c[e.id] * r * r;
        }
    }
    double missing = 0.0;
    for (UserIndex u = 0; u < train.num_users(); ++u) {
        const auto p = model.P.row(u);
        for (std::size_t k = 0; k < K; ++k) {
            const auto s = model.Sq.row(k);
            double row = 0.0;
            for (std::size_t f = 0; f < K; ++f) row += s[f] * p[f];
            missing += p[k] * row;
        }
    }
    return observed + missing + lambda * (squared_norm(model.P) + squared_norm(model.Q));
}

double objective_naive(const FactorModel& model, const InteractionDataset& train, const ConfidenceWeights& weights,
                       double lambda) {
    double loss = 0.0;
    for (UserIndex u = 0; u < train.num_users(); ++u) {
        const auto line = user_line(train, weights, u);
        const auto p = model.P.row(u);
        for (ItemIndex i = 0; i < train.num_items(); ++i) {
            const auto q = model.Q.row(i);
            double r = 0.0;
            for (std::size_t k = 0; k < model.factors; ++k) r += p[k] * q[k];
            const double err = line.target[i] - r;
            loss += line.weight[i] * err * err;
        }
    }
    return loss + lambda * (squared_norm(model.P) + squared_norm(model.Q));
}

TrainTrace train_from(FactorModel& model, const InteractionDataset& train, const ConfidenceWeights& weights,
                      const TrainConfig& config) {
    config.validate();
    using clock = std::chrono::steady_clock;
    TrainTrace trace;
    double previous = objective_fast(model, train, weights, config.lambda);
    for (int it = 1; it <= config.max_iters; ++it) {
        const auto start = clock::now();
        sweep(model, train, weights, config.lambda, config.threads);
        const double seconds = std::chrono::duration<double>(clock::now() - start).count();
        const double current = objective_fast(model, train, weights, config.lambda);
        trace.push_back({it, current, seconds});
        if (previous > 0.0 && std::fabs(current - previous) / previous < config.rel_tol) break;
        previous = current;
    }
    return trace;
}

TrainResult train(const InteractionDataset& data, const ConfidenceWeights& weights, const TrainConfig& config) {
    config.validate();
    if (weights.size() != data.num_items()) throw InvalidInput("confidence vector length mismatch");
    auto model = init_model(data.num_users(), data.num_items(), config.factors, config.seed, config.init_scale);
    prepare_model(model, data, weights, config.threads);
    auto trace = train_from(model, data, weights, config);
    return {std::move(model), std::move(trace)};
}

}  // namespace eals
