#include <benchmark/benchmark.h>

#include <vector>

#include "fwmqkd/field_reconstruction.hpp"
#include "fwmqkd/spectral_model.hpp"

using namespace fwmqkd;

static void BM_GridSearchCell(benchmark::State& state) {
    const reconstruction::GridSearch search{reconstruction::GridSpec{}};
    const auto obs = reconstruction::simulate_ratios({0.6, 0.8, 0.4}, search.grid().xi);
    for (auto _ : state) benchmark::DoNotOptimize(search.reconstruct(obs));
}
BENCHMARK(BM_GridSearchCell);

static void BM_ReconstructMap(benchmark::State& state) {
    const spectral::ModelParams p;
    const reconstruction::GridSpec g;
    std::vector<reconstruction::RatioObservation> data;
    for (double t = 0.0; t <= 500.0; t += 50.0) {
        for (double l = 490.0; l <= 550.0; l += 6.0) {
            auto obs = reconstruction::simulate_ratios(spectral::field_components(t, l, p), g.xi);
            obs.delay_fs = t;
            obs.lambda_nm = l;
            data.push_back(obs);
        }
    }
    const auto threads = static_cast<unsigned>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(reconstruction::reconstruct_map(data, g, threads));
    state.SetItemsProcessed(state.iterations() * static_cast<long>(data.size()));
}
BENCHMARK(BM_ReconstructMap)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);
