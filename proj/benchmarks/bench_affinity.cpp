#include <benchmark/benchmark.h>

#include "diversigraph/affinity.hpp"
#include "diversigraph/synth.hpp"

namespace {

dvg::Audiences audiences(size_t outlets, size_t pool) {
    dvg::AudienceConfig cfg;
    cfg.seed = 4;
    cfg.n_outlets = outlets;
    cfg.pool_size = pool;
    cfg.rate = {{0.6, 0.12, 0.02}, {0.12, 0.6, 0.05}, {0.02, 0.05, 0.6}};
    return dvg::gen_audiences(cfg, 2);
}

void BM_affinity_matrix(benchmark::State& state) {
    auto aud = audiences(static_cast<size_t>(state.range(0)), 20000);
    for (auto _ : state) {
        auto a = dvg::affinity_matrix(aud.sets, 2);
        benchmark::DoNotOptimize(a.values.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0) * (state.range(0) - 1) / 2);
}
BENCHMARK(BM_affinity_matrix)->Arg(100)->Arg(186)->Unit(benchmark::kMillisecond);

void BM_spin_glass(benchmark::State& state) {
    auto aud = audiences(static_cast<size_t>(state.range(0)), 4000);
    auto raw = dvg::affinity_matrix(aud.sets, 2);
    std::vector<size_t> counts(aud.sets.size());
    for (size_t i = 0; i < counts.size(); ++i) counts[i] = aud.sets.followers[i].size();
    auto pruned = dvg::prune(dvg::scale_affinity(raw, counts), 0.3, 5);
    dvg::SpinGlassOptions opts;
    opts.seed = 2;
    for (auto _ : state) {
        auto part = dvg::detect_clusters(pruned, opts);
        benchmark::DoNotOptimize(part.community.data());
    }
}
BENCHMARK(BM_spin_glass)->Arg(100)->Arg(186)->Unit(benchmark::kMillisecond);

}  // namespace
