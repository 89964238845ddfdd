#include <benchmark/benchmark.h>

#include "diversigraph/community.hpp"
#include "diversigraph/synth.hpp"

namespace {

// the heap-based agglomeration has to stay usable at moderate-subgraph scale
void BM_cnm_ordering(benchmark::State& state) {
    size_t n = static_cast<size_t>(state.range(0));
    double p_in = 40.0 / static_cast<double>(n);  // keep mean degree flat
    auto bg = dvg::gen_blocks(n, 8, p_in, p_in / 20.0, 5);
    for (auto _ : state) {
        auto [perm, dendro] = dvg::cnm_ordering(bg.graph);
        benchmark::DoNotOptimize(perm.rank.data());
    }
    state.SetItemsProcessed(state.iterations() *
                            static_cast<int64_t>(bg.graph.edge_count()));
}
BENCHMARK(BM_cnm_ordering)->Arg(1000)->Arg(10000)->Arg(75000)->Unit(benchmark::kMillisecond);

void BM_spectral_dense(benchmark::State& state) {
    auto bg = dvg::gen_blocks(static_cast<size_t>(state.range(0)), 2, 0.1, 0.01, 7);
    for (auto _ : state) {
        auto [perms, result] = dvg::spectral_orderings(bg.graph);
        benchmark::DoNotOptimize(perms.data());
    }
}
BENCHMARK(BM_spectral_dense)->Arg(500)->Unit(benchmark::kMillisecond);

void BM_spectral_lanczos(benchmark::State& state) {
    size_t n = static_cast<size_t>(state.range(0));
    auto bg = dvg::gen_blocks(n, 2, 40.0 / static_cast<double>(n), 0.002, 7);
    dvg::SpectralOptions opts;
    opts.dense_threshold = 0;
    for (auto _ : state) {
        auto [perms, result] = dvg::spectral_orderings(bg.graph, opts);
        benchmark::DoNotOptimize(perms.data());
    }
}
BENCHMARK(BM_spectral_lanczos)->Arg(3000)->Unit(benchmark::kMillisecond);

}  // namespace
