#include "eals/baselines.hpp"

#include "eals/error.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <chrono>
#include <cmath>

namespace eals {

void AlsConfig::validate() const {
    if (factors < 1) throw InvalidInput("factors must be >= 1");
    if (!(lambda > 0.0)) throw InvalidInput("lambda must be > 0");
    if (!(w0 > 0.0)) throw InvalidInput("w0 must be > 0");
    if (max_iters < 0) throw InvalidInput("max_iters must be >= 0");
    if (!(rel_tol >= 0.0)) throw InvalidInput("rel_tol must be >= 0");
    if (threads < 1) throw InvalidInput("threads must be >= 1");
    if (!(init_scale > 0.0)) throw InvalidInput("init_scale must be > 0");
}

namespace {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using ConstRow = Eigen::Map<const Vector>;

Eigen::Map<const Matrix> view(const RowMatrix& m) {
    return Eigen::Map<const Matrix>(m.values().data(), static_cast<Eigen::Index>(m.rows()),
                                    static_cast<Eigen::Index>(m.cols()));
}

ConstRow row_view(const RowMatrix& m, std::size_t r) {
    return ConstRow(m.row(r).data(), static_cast<Eigen::Index>(m.cols()));
}

void solve_into(Matrix& A, const Vector& b, std::span<double> out) {
    Eigen::LLT<Matrix, Eigen::Lower> llt(A);
    if (llt.info() != Eigen::Success) throw NumericalError("ALS system is not positive definite");
    const Vector x = llt.solve(b);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = x(static_cast<Eigen::Index>(k));
}

}  // namespace

void als_update_user(FactorModel& model, const InteractionDataset& train, const ConfidenceWeights& weights,
                     double lambda, UserIndex u) {
    const auto K = static_cast<Eigen::Index>(model.factors);
    Matrix A = view(model.Sq);
    Vector b = Vector::Zero(K);
    for (const auto& e : train.user_row(u)) {
        const auto q = row_view(model.Q, e.id);
        const double w = train.weight(e.slot);
        A.selfadjointView<Eigen::Lower>().rankUpdate(q, w - weights.c[e.id]);
        b.noalias() += (w * train.rating(e.slot)) * q;
    }
    A.diagonal().array() += lambda;
    solve_into(A, b, model.P.row(u));
}

void als_update_item(FactorModel& model, const InteractionDataset& train, const ConfidenceWeights& weights,
                     double lambda, ItemIndex i) {
    const auto K = static_cast<Eigen::Index>(model.factors);
    const double ci = weights.c[i];
    Matrix A = ci * view(model.Sp);
    Vector b = Vector::Zero(K);
    for (const auto& e : train.item_row(i)) {
        const auto p = row_view(model.P, e.id);
        const double w = train.weight(e.slot);
        A.selfadjointView<Eigen::Lower>().rankUpdate(p, w - ci);
        b.noalias() += (w * train.rating(e.slot)) * p;
    }
    A.diagonal().array() += lambda;
    solve_into(A, b, model.Q.row(i));
}

void als_sweep(FactorModel& model, const InteractionDataset& train, const ConfidenceWeights& weights, double lambda,
               int threads) {
    const auto M = static_cast<std::ptrdiff_t>(train.num_users());
    const auto N = static_cast<std::ptrdiff_t>(train.num_items());
#pragma omp parallel for schedule(dynamic, 16) num_threads(threads) if (threads > 1)
    for (std::ptrdiff_t u = 0; u < M; ++u) {
        als_update_user(model, train, weights, lambda, static_cast<UserIndex>(u));
    }
    recompute_user_cache(model, threads);
#pragma omp parallel for schedule(dynamic, 16) num_threads(threads) if (threads > 1)
    for (std::ptrdiff_t i = 0; i < N; ++i) {
        als_update_item(model, train, weights, lambda, static_cast<ItemIndex>(i));
    }
    recompute_item_cache(model, weights, threads);
    refresh_prediction_cache(model, train);
}

TrainTrace als_train_from(FactorModel& model, const InteractionDataset& train, const ConfidenceWeights& weights,
                          double lambda, int max_iters, double rel_tol, int threads) {
    using clock = std::chrono::steady_clock;
    TrainTrace trace;
    double previous = objective_fast(model, train, weights, lambda);
    for (int it = 1; it <= max_iters; ++it) {
        const auto start = clock::now();
        als_sweep(model, train, weights, lambda, threads);
        const double seconds = std::chrono::duration<double>(clock::now() - start).count();
        const double current = objective_fast(model, train, weights, lambda);
        trace.push_back({it, current, seconds});
        if (previous > 0.0 && std::fabs(current - previous) / previous < rel_tol) break;
        previous = current;
    }
    return trace;
}

TrainResult als_train(const InteractionDataset& train, const AlsConfig& config) {
    config.validate();
    const auto weights = uniform_confidence(train.num_items(), config.w0);
    auto model = init_model(train.num_users(), train.num_items(), config.factors, config.seed, config.init_scale);
    prepare_model(model, train, weights, config.threads);
    auto trace = als_train_from(model, train, weights, config.lambda, config.max_iters, config.rel_tol,
                                config.threads);
    return {std::move(model), std::move(trace)};
}

}  // namespace eals
