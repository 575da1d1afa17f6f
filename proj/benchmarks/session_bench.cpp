#include <benchmark/benchmark.h>

#include "fwmqkd/bb84_session.hpp"

using namespace fwmqkd::qkd;

static void BM_Session(benchmark::State& state) {
    SessionConfig cfg;
    cfg.cycles = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(run_session(cfg));
    state.SetItemsProcessed(state.iterations() * state.range(0) * 56);
}
BENCHMARK(BM_Session)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);
