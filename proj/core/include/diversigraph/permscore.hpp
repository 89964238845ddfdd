#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "diversigraph/graph.hpp"

namespace dvg {

/// Node ordering over a subgraph: rank(v) in 1..n, bijective.
struct Permutation {
    enum class Source { outgoing_slant, incoming_slant, spectral, cnm, external };

    std::vector<int> rank;  // node index -> rank, 1-based
    Source source = Source::external;

    size_t size() const { return rank.size(); }
    bool is_bijection() const;
    static Permutation identity(size_t n, Source source = Source::external);
    static Permutation reversed(const Permutation& p);
    /// Nodes in rank order (position r-1 holds the node with rank r).
    std::vector<NodeIndex> order() const;
};

/// Diagonal-gradient score: 0 on the diagonal, 1 next to it, then linearly
/// decreasing with distance, 1 - (|i-j| - 1)/n. Strictly positive off the
/// diagonal. i, j are 1-based ranks.
double z_value(int i, int j, int n);

/// Log likelihood of the diagonal-gradient model under a permuted adjacency:
/// the sum of ln z over present arcs. The printed sum over all matrix cells
/// is -inf wherever an arc is absent, so the sum is restricted to arcs.
double perm_loglik(const FollowerGraph& p, const Permutation& sigma);
/// Arc-list form; throws on self-loops (z = 0 has no log).
double perm_loglik_arcs(std::span<const std::pair<NodeIndex, NodeIndex>> arcs,
                        const Permutation& sigma, size_t n);

/// Ascending sort by key, ties by external id. Every key must be finite.
Permutation slant_permutation(const FollowerGraph& subgraph, std::span<const double> keys,
                              Permutation::Source source);

struct CriticalValueParams {
    double frac = 0.05;   // fraction of nodes displaced per rep
    int reps = 1000;
    double q = 0.95;      // quantile of the reduction distribution
    uint64_t seed = 0;
    int threads = 1;
};

/// Bootstrap threshold: per rep, ceil(frac*n) nodes are sampled without
/// replacement and every arc incident to a sampled node has its contribution
/// replaced by the worst value achievable with the arc's other endpoint held
/// fixed (an upper bound on the loss; arcs with both endpoints sampled count
/// once, using the endpoint allowing the larger displacement). The critical
/// value is loglik(base) minus the q-quantile (type 1) of the per-rep
/// reductions. Deterministic in (seed, reps) for any thread count.
double critical_value(const FollowerGraph& p, const Permutation& base,
                      const CriticalValueParams& params,
                      std::vector<double>* reductions_out = nullptr);

/// (rank(u), rank(v)) pairs for all arcs; the scatter behind the permuted
/// adjacency figures.
std::vector<std::pair<int, int>> permuted_points(const FollowerGraph& p,
                                                 const Permutation& sigma);

}  // namespace dvg
