#include <benchmark/benchmark.h>

#include "diversigraph/permscore.hpp"
#include "diversigraph/synth.hpp"

namespace {

void BM_perm_loglik(benchmark::State& state) {
    auto bg = dvg::gen_blocks(static_cast<size_t>(state.range(0)), 2, 0.1, 0.01, 3);
    auto sigma = dvg::Permutation::identity(bg.graph.node_count());
    for (auto _ : state) benchmark::DoNotOptimize(dvg::perm_loglik(bg.graph, sigma));
    state.SetItemsProcessed(state.iterations() *
                            static_cast<int64_t>(bg.graph.edge_count()));
}
BENCHMARK(BM_perm_loglik)->Arg(500)->Arg(2000);

void BM_critical_value_1000(benchmark::State& state) {
    auto bg = dvg::gen_blocks(static_cast<size_t>(state.range(0)), 2, 0.1, 0.01, 3);
    auto sigma = dvg::Permutation::identity(bg.graph.node_count());
    dvg::CriticalValueParams params;
    params.reps = 1000;
    params.threads = 2;
    for (auto _ : state)
        benchmark::DoNotOptimize(dvg::critical_value(bg.graph, sigma, params));
}
BENCHMARK(BM_critical_value_1000)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

}  // namespace
