#include "eals/baselines.hpp"
#include "eals/dataset.hpp"
#include "eals/online.hpp"
#include "eals/synthetic.hpp"
#include "eals/trainer.hpp"
#include "eals/weighting.hpp"

#include <benchmark/benchmark.h>

namespace {

const eals::InteractionDataset& bench_data() {
    static const auto data = [] {
        eals::SyntheticConfig cfg;
        cfg.users = 5000;
        cfg.items = 5000;
        cfg.interactions = 100000;
        cfg.seed = 42;
        return eals::build_dataset(eals::generate_synthetic(cfg));
    }();
    return data;
}

void BM_EalsSweep(benchmark::State& state) {
    const auto& data = bench_data();
    const auto weights = eals::confidence_vector(eals::item_popularity(data), 512.0, 0.5);
    auto model = eals::init_model(data, weights, static_cast<std::size_t>(state.range(0)), 42);
    for (auto _ : state) eals::sweep(model, data, weights, 0.01);
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(data.nnz()));
}

void BM_AlsSweep(benchmark::State& state) {
    const auto& data = bench_data();
    const auto weights = eals::uniform_confidence(data.num_items(), 512.0 / static_cast<double>(data.num_items()));
    auto model = eals::init_model(data, weights, static_cast<std::size_t>(state.range(0)), 42);
    for (auto _ : state) eals::als_sweep(model, data, weights, 0.01);
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(data.nnz()));
}

void BM_OnlineIngest(benchmark::State& state) {
    const auto& data = bench_data();
    const auto weights = eals::confidence_vector(eals::item_popularity(data), 512.0, 0.5);
    auto model = eals::init_model(data, weights, static_cast<std::size_t>(state.range(0)), 42);
    eals::OnlineUpdater updater(std::move(model), data, weights, {});
    std::uint32_t n = 0;
    for (auto _ : state) {
        const auto u = static_cast<eals::UserIndex>((n * 7919u) % data.num_users());
        const auto i = static_cast<eals::ItemIndex>((n * 104729u) % data.num_items());
        updater.ingest(u, i, 2'000'000 + n);
        ++n;
    }
}

}  // namespace

BENCHMARK(BM_EalsSweep)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AlsSweep)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_OnlineIngest)->Arg(32)->Arg(128)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
