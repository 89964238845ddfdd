#include <benchmark/benchmark.h>

#include "diversigraph/graph.hpp"
#include "diversigraph/slantstats.hpp"
#include "diversigraph/synth.hpp"

namespace {

dvg::SynthPopulation population(size_t n) {
    dvg::SynthConfig cfg;
    cfg.seed = 1;
    cfg.n_accounts = n;
    cfg.mean_followees = 20;
    return dvg::gen_population(cfg, 2);
}

void BM_clustering_all(benchmark::State& state) {
    auto pop = population(static_cast<size_t>(state.range(0)));
    for (auto _ : state) {
        auto c = dvg::clustering_coefficients(pop.graph, 2);
        benchmark::DoNotOptimize(c.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_clustering_all)->Arg(2000)->Arg(20000);

void BM_giant_component(benchmark::State& state) {
    auto pop = population(static_cast<size_t>(state.range(0)));
    for (auto _ : state) {
        auto gc = dvg::giant_component(pop.graph);
        benchmark::DoNotOptimize(gc.data());
    }
}
BENCHMARK(BM_giant_component)->Arg(20000);

void BM_induce_core(benchmark::State& state) {
    auto pop = population(static_cast<size_t>(state.range(0)));
    auto ev = dvg::gen_events(pop, 2);
    auto counts = dvg::news_counts(pop.graph, ev.news);
    for (auto _ : state) {
        auto core = dvg::induce_core(pop.graph, counts, 0.9, 0.9);
        benchmark::DoNotOptimize(core.members.data());
    }
}
BENCHMARK(BM_induce_core)->Arg(20000);

void BM_account_summaries(benchmark::State& state) {
    auto pop = population(static_cast<size_t>(state.range(0)));
    auto ev = dvg::gen_events(pop, 2);
    for (auto _ : state) {
        auto s = dvg::account_summaries(pop.graph, ev.news, {.clustering = false, .threads = 2});
        benchmark::DoNotOptimize(s.data());
    }
}
BENCHMARK(BM_account_summaries)->Arg(20000);

}  // namespace
