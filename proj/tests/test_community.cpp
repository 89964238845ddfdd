#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "diversigraph/community.hpp"
#include "diversigraph/rng.hpp"
#include "diversigraph/synth.hpp"

using namespace dvg;

namespace {

FollowerGraph undirected(size_t n, std::initializer_list<std::pair<NodeId, NodeId>> edges) {
    GraphBuilder b;
    for (size_t i = 1; i <= n; ++i) b.add_node(static_cast<NodeId>(i));
    for (auto& [u, v] : edges) {
        b.add_edge(u, v);
        b.add_edge(v, u);
    }
    return b.build();
}

FollowerGraph path_graph(size_t n) {
    GraphBuilder b;
    for (size_t i = 1; i <= n; ++i) b.add_node(static_cast<NodeId>(i));
    for (size_t i = 1; i < n; ++i) {
        b.add_edge(static_cast<NodeId>(i), static_cast<NodeId>(i + 1));
        b.add_edge(static_cast<NodeId>(i + 1), static_cast<NodeId>(i));
    }
    return b.build();
}

// largest run of consecutive leaf positions occupied by one block
double block_contiguity(const Permutation& p, const std::vector<int>& block_of) {
    auto order = p.order();
    size_t same = 0, pairs = 0;
    for (size_t r = 1; r < order.size(); ++r) {
        ++pairs;
        if (block_of[order[r - 1]] == block_of[order[r]]) ++same;
    }
    return pairs ? static_cast<double>(same) / static_cast<double>(pairs) : 1.0;
}

}  // namespace

TEST_CASE("spectral: path graph Fiedler ordering is monotone") {
    auto g = path_graph(30);
    auto [perms, result] = spectral_orderings(g);
    REQUIRE(!perms.empty());
    // ranks along the path either ascend or descend
    const auto& r = perms[0].rank;
    bool ascending = true, descending = true;
    for (size_t i = 1; i < r.size(); ++i) {
        ascending &= r[i] > r[i - 1];
        descending &= r[i] < r[i - 1];
    }
    CHECK((ascending || descending));
    for (double resid : result.residuals) CHECK(resid <= 1e-6);
}

TEST_CASE("spectral: eigenpair residuals satisfy the tolerance") {
    SynthConfig cfg;
    cfg.seed = 5;
    cfg.n_accounts = 150;
    auto pop = gen_population(cfg);
    auto gc = giant_component(pop.graph);
    auto sub = pop.graph.induced(gc);
    if (sub.node_count() >= 6) {
        auto [perms, result] = spectral_orderings(sub);
        for (double resid : result.residuals) CHECK(resid <= 1e-6);
        for (const auto& p : perms) CHECK(p.is_bijection());
    }
}

TEST_CASE("spectral: two cliques joined by an edge split contiguously") {
    GraphBuilder b;
    for (NodeId i = 1; i <= 40; ++i) b.add_node(i);
    auto add_clique = [&](NodeId lo, NodeId hi) {
        for (NodeId i = lo; i <= hi; ++i)
            for (NodeId j = lo; j <= hi; ++j)
                if (i != j) b.add_edge(i, j);
    };
    add_clique(1, 20);
    add_clique(21, 40);
    b.add_edge(20, 21);
    b.add_edge(21, 20);
    auto g = b.build();
    auto [perms, result] = spectral_orderings(g);
    std::vector<int> block(40);
    for (size_t i = 0; i < 40; ++i) block[i] = g.id_of(static_cast<NodeIndex>(i)) <= 20 ? 0 : 1;
    CHECK(block_contiguity(perms[0], block) >= 0.95);  // one boundary crossing allowed
}

TEST_CASE("spectral: complete graph is degenerate but still answers") {
    GraphBuilder b;
    for (NodeId i = 1; i <= 12; ++i)
        for (NodeId j = 1; j <= 12; ++j)
            if (i != j) b.add_edge(i, j);
    auto g = b.build();
    auto [perms, result] = spectral_orderings(g);
    CHECK(result.degenerate);
    for (const auto& p : perms) CHECK(p.is_bijection());
}

TEST_CASE("spectral: disconnected input runs on the giant component") {
    GraphBuilder b;
    for (NodeId i = 1; i <= 12; ++i) b.add_node(i);
    for (NodeId i = 1; i < 8; ++i) {
        b.add_edge(i, i + 1);
        b.add_edge(i + 1, i);
    }
    b.add_edge(10, 11);
    b.add_edge(11, 10);
    auto g = b.build();
    auto [perms, result] = spectral_orderings(g);
    CHECK(result.used_giant_component);
    CHECK(result.component.size() == 8);
    for (const auto& p : perms) {
        CHECK(p.size() == 12);  // still covers the whole subgraph
        CHECK(p.is_bijection());
    }
}

TEST_CASE("spectral: Lanczos path agrees with the dense path") {
    auto bg = gen_blocks(260, 2, 0.15, 0.02, 99);
    SpectralOptions dense_opts;
    auto [dp, dres] = spectral_orderings(bg.graph, dense_opts);
    SpectralOptions lanczos_opts;
    lanczos_opts.dense_threshold = 0;  // force the iterative path
    auto [lp, lres] = spectral_orderings(bg.graph, lanczos_opts);
    REQUIRE(dres.eigenvalues.size() == lres.eigenvalues.size());
    for (size_t i = 0; i < dres.eigenvalues.size(); ++i)
        CHECK(lres.eigenvalues[i] == doctest::Approx(dres.eigenvalues[i]).epsilon(1e-6));
    for (double r : lres.residuals) CHECK(r <= 1e-6);
}

TEST_CASE("best_spectral_permutation is the argmax") {
    auto bg = gen_blocks(80, 2, 0.25, 0.02, 7);
    auto [perms, result] = spectral_orderings(bg.graph);
    REQUIRE(perms.size() >= 2);
    auto best = best_spectral_permutation(perms, bg.graph, &result);
    double best_ll = perm_loglik(bg.graph, best);
    for (const auto& p : perms) CHECK(best_ll >= perm_loglik(bg.graph, p));
    CHECK(result.chosen >= 0);
    CHECK(best_ll == perm_loglik(bg.graph, perms[static_cast<size_t>(result.chosen)]));
    // single candidate: itself
    auto solo = best_spectral_permutation({&perms[1], 1}, bg.graph);
    CHECK(solo.rank == perms[1].rank);
}

TEST_CASE("cnm: two triangles with a bridge stay contiguous") {
    auto g = undirected(6, {{1, 2}, {2, 3}, {1, 3}, {4, 5}, {5, 6}, {4, 6}, {3, 4}});
    auto [perm, dendro] = cnm_ordering(g);
    CHECK(perm.is_bijection());
    CHECK(dendro.merges.size() == 5);  // connected: n-1 merges
    std::vector<int> block{0, 0, 0, 1, 1, 1};
    CHECK(block_contiguity(perm, block) >= 0.75);  // exactly one boundary pair
    CHECK(dendro.best_modularity > 0.0);
    CHECK(dendro.communities_at_best == 2);
}

TEST_CASE("cnm: star graph collapses into one community") {
    auto g = undirected(6, {{1, 2}, {1, 3}, {1, 4}, {1, 5}, {1, 6}});
    auto [perm, dendro] = cnm_ordering(g);
    CHECK(perm.is_bijection());
    CHECK(dendro.merges.size() == 5);
    CHECK(dendro.leaf_order.size() == 6);
}

TEST_CASE("cnm: disconnected components concatenate by size") {
    auto g = undirected(7, {{1, 2}, {2, 3}, {3, 1}, {4, 5}});  // triangle, pair, isolated 6,7
    auto [perm, dendro] = cnm_ordering(g);
    CHECK(perm.is_bijection());
    auto order = dendro.leaf_order;
    REQUIRE(order.size() == 7);
    // triangle first (size 3), then the pair, then isolated nodes by id
    std::vector<NodeId> first3;
    for (size_t i = 0; i < 3; ++i) first3.push_back(g.id_of(order[i]));
    std::sort(first3.begin(), first3.end());
    CHECK(first3 == std::vector<NodeId>{1, 2, 3});
    CHECK(g.id_of(order[5]) == 6);
    CHECK(g.id_of(order[6]) == 7);
}

TEST_CASE("cnm: planted four-block graph is mostly contiguous") {
    auto bg = gen_blocks(200, 4, 0.25, 0.01, 17);
    auto [perm, dendro] = cnm_ordering(bg.graph);
    CHECK(perm.is_bijection());
    CHECK(block_contiguity(perm, bg.block_of) >= 0.90);
    CHECK(dendro.best_modularity > 0.0);
}

TEST_CASE("compare_orderings ranks structure above randomness on planted blocks") {
    for (uint64_t seed : {1ull, 2ull, 3ull}) {
        auto bg = gen_blocks(120, 2, 0.2, 0.01, seed);
        auto [sp_perms, sp_res] = spectral_orderings(bg.graph);
        auto spectral = best_spectral_permutation(sp_perms, bg.graph, &sp_res);
        auto [cnm, dendro] = cnm_ordering(bg.graph);

        // oracle: sort by planted block label, ids within
        std::vector<double> keys(bg.graph.node_count());
        for (size_t v = 0; v < keys.size(); ++v) keys[v] = bg.block_of[v];
        auto oracle_perm = slant_permutation(bg.graph, keys, Permutation::Source::external);

        // a uniformly random permutation
        DetRng rng(seed, 42);
        std::vector<int> ranks(bg.graph.node_count());
        for (size_t i = 0; i < ranks.size(); ++i) ranks[i] = static_cast<int>(i) + 1;
        for (size_t i = ranks.size(); i > 1; --i) std::swap(ranks[i - 1], ranks[rng.below(i)]);
        Permutation random_perm;
        random_perm.rank = ranks;

        CriticalValueParams params;
        params.reps = 200;
        params.seed = seed;
        std::vector<std::pair<std::string, Permutation>> entries{
            {"spectral", spectral},
            {"cnm", cnm},
            {"label_oracle", oracle_perm},
            {"random", random_perm},
        };
        auto report = compare_orderings(bg.graph, entries, params);
        REQUIRE(report.rows.size() == 4);
        // rows sorted by loglik descending
        for (size_t i = 1; i < report.rows.size(); ++i)
            CHECK(report.rows[i - 1].loglik >= report.rows[i].loglik);
        CHECK(report.rows.back().name == "random");
        double oracle_crit = 0;
        for (const auto& row : report.rows)
            if (row.name == "label_oracle") oracle_crit = row.critical_value;
        for (const auto& row : report.rows) {
            if (row.name == "random") {
                CHECK(row.loglik < oracle_crit);
                CHECK(!row.worse_than.empty());
            }
            if (row.name == "spectral" || row.name == "cnm")
                CHECK(row.loglik > oracle_crit);
        }
    }
}
