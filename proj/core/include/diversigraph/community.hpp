#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "diversigraph/graph.hpp"
#include "diversigraph/permscore.hpp"

namespace dvg {

struct SpectralOptions {
    int k = 5;                     // eigenpairs beyond the constant vector
    double tol = 1e-8;             // relative residual ||Lv - lv|| / ||v||
    size_t dense_threshold = 2048; // below this, solve the dense Laplacian
    size_t max_iter_factor = 10;   // iteration budget: factor * n
};

struct SpectralResult {
    std::vector<double> eigenvalues;               // smallest nonzero, ascending
    std::vector<std::vector<double>> eigenvectors; // aligned with eigenvalues
    std::vector<double> residuals;                 // ||Lv - lv|| / ||v|| per pair
    bool degenerate = false;                       // all returned eigenvalues equal
    bool used_giant_component = false;             // input was disconnected
    std::vector<NodeIndex> component;              // nodes the eigenproblem ran on
    int chosen = -1;                               // set by best_spectral_permutation
};

/// Orderings by ascending eigenvector component of the symmetrized Laplacian
/// (ties by external id), one per returned eigenpair. On disconnected input
/// the eigenproblem runs on the giant component; remaining components are
/// appended per component (size descending) in id order, so every returned
/// permutation still covers the whole subgraph. Throws when the eigensolver
/// misses the residual tolerance within its iteration budget.
std::pair<std::vector<Permutation>, SpectralResult>
spectral_orderings(const FollowerGraph& subgraph, const SpectralOptions& opts = {});

/// Highest-likelihood candidate; ties keep the lowest eigenvalue index.
Permutation best_spectral_permutation(std::span<const Permutation> candidates,
                                      const FollowerGraph& p, SpectralResult* result = nullptr);

struct Dendrogram {
    struct Merge {
        NodeIndex a = 0, b = 0;       // representatives: smallest member index
        double modularity_after = 0.0;
    };
    std::vector<Merge> merges;
    std::vector<NodeIndex> leaf_order;
    double best_modularity = 0.0;
    size_t communities_at_best = 0;
};

/// Greedy modularity agglomeration (heap-based) on the symmetrized,
/// unweighted subgraph; merges continue to one community per connected
/// component so the dendrogram is complete. The permutation reads leaves off
/// the final merge forest, subtrees ordered by smallest member id and
/// components by size descending.
std::pair<Permutation, Dendrogram> cnm_ordering(const FollowerGraph& subgraph);

struct OrderingReport {
    struct Row {
        std::string name;
        double loglik = 0.0;
        double critical_value = 0.0;
        std::vector<std::string> worse_than;  // rows whose critical value this one falls below
    };
    std::vector<Row> rows;  // sorted by loglik descending
};

OrderingReport compare_orderings(const FollowerGraph& p,
                                 std::span<const std::pair<std::string, Permutation>> perms,
                                 const CriticalValueParams& params);

}  // namespace dvg
