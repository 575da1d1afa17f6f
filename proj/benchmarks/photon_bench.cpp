#include <benchmark/benchmark.h>

#include "fwmqkd/photon_statistics.hpp"

using namespace fwmqkd;

static void BM_DrawPhotonCounts(benchmark::State& state) {
    photon::AttenuationConfig cfg;
    cfg.g2_target = 1.2;
    std::uint64_t k = 0;
    for (auto _ : state) {
        CounterRng rng(cfg.seed, k++);
        benchmark::DoNotOptimize(photon::draw_photon_counts(0.7, 0.3, cfg, rng));
    }
}
BENCHMARK(BM_DrawPhotonCounts);

static void BM_ContrastAccumulator(benchmark::State& state) {
    for (auto _ : state) {
        photon::ContrastAccumulator acc;
        for (int k = 0; k < 10000; ++k) acc.add(k % 3, k % 2);
        benchmark::DoNotOptimize(acc.stats());
    }
    state.SetItemsProcessed(state.iterations() * 10000);
}
BENCHMARK(BM_ContrastAccumulator);
