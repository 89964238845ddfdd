#include "diversigraph/permscore.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "diversigraph/rng.hpp"
#include "diversigraph/util.hpp"

namespace dvg {

bool Permutation::is_bijection() const {
    std::vector<uint8_t> seen(rank.size(), 0);
    for (int r : rank) {
        if (r < 1 || static_cast<size_t>(r) > rank.size()) return false;
        if (seen[static_cast<size_t>(r) - 1]) return false;
        seen[static_cast<size_t>(r) - 1] = 1;
    }
    return true;
}

Permutation Permutation::identity(size_t n, Source source) {
    Permutation p;
    p.source = source;
    p.rank.resize(n);
    for (size_t i = 0; i < n; ++i) p.rank[i] = static_cast<int>(i) + 1;
    return p;
}

Permutation Permutation::reversed(const Permutation& p) {
    Permutation r = p;
    int n = static_cast<int>(p.rank.size());
    for (int& v : r.rank) v = n + 1 - v;
    return r;
}

std::vector<NodeIndex> Permutation::order() const {
    std::vector<NodeIndex> o(rank.size());
    for (size_t v = 0; v < rank.size(); ++v) o[static_cast<size_t>(rank[v]) - 1] = static_cast<NodeIndex>(v);
    return o;
}

double z_value(int i, int j, int n) {
    if (i < 1 || j < 1 || i > n || j > n) throw std::out_of_range("rank outside 1..n");
    int d = std::abs(i - j);
    if (d == 0) return 0.0;
    if (d == 1) return 1.0;
    return 1.0 - static_cast<double>(d - 1) / static_cast<double>(n);
}

double perm_loglik_arcs(std::span<const std::pair<NodeIndex, NodeIndex>> arcs,
                        const Permutation& sigma, size_t n) {
    double ll = 0.0;
    for (auto [u, v] : arcs) {
        if (u == v) throw std::invalid_argument("self-loop has z = 0; log likelihood undefined");
        ll += std::log(z_value(sigma.rank[u], sigma.rank[v], static_cast<int>(n)));
    }
    return ll;
}

double perm_loglik(const FollowerGraph& p, const Permutation& sigma) {
    if (sigma.size() != p.node_count())
        throw std::invalid_argument("permutation size does not match subgraph");
    int n = static_cast<int>(p.node_count());
    double ll = 0.0;
    p.for_each_edge([&](NodeIndex u, NodeIndex v) {
        ll += std::log(z_value(sigma.rank[u], sigma.rank[v], n));
    });
    return ll;
}

Permutation slant_permutation(const FollowerGraph& subgraph, std::span<const double> keys,
                              Permutation::Source source) {
    size_t n = subgraph.node_count();
    if (keys.size() != n) throw std::invalid_argument("slant keys must align with subgraph");
    for (size_t v = 0; v < n; ++v)
        if (!std::isfinite(keys[v]))
            throw std::invalid_argument("slant key undefined for account " +
                                        std::to_string(subgraph.id_of(static_cast<NodeIndex>(v))));
    std::vector<NodeIndex> nodes(n);
    for (size_t v = 0; v < n; ++v) nodes[v] = static_cast<NodeIndex>(v);
    std::sort(nodes.begin(), nodes.end(), [&](NodeIndex a, NodeIndex b) {
        if (keys[a] != keys[b]) return keys[a] < keys[b];
        return subgraph.id_of(a) < subgraph.id_of(b);
    });
    Permutation p;
    p.source = source;
    p.rank.resize(n);
    for (size_t r = 0; r < n; ++r) p.rank[nodes[r]] = static_cast<int>(r) + 1;
    return p;
}

namespace {

// Worst z for an arc whose other endpoint sits at 1-based rank i: the moved
// endpoint can reach distance max(i-1, n-i).
double worst_z_for_fixed_rank(int i, int n) {
    int d = std::max(i - 1, n - i);
    if (d == 0) return 0.0;  // n = 1: no arcs possible anyway
    if (d == 1) return 1.0;
    return 1.0 - static_cast<double>(d - 1) / static_cast<double>(n);
}

}  // namespace

double critical_value(const FollowerGraph& p, const Permutation& base,
                      const CriticalValueParams& params,
                      std::vector<double>* reductions_out) {
    size_t n = p.node_count();
    if (base.size() != n) throw std::invalid_argument("permutation size does not match subgraph");
    size_t k = static_cast<size_t>(std::ceil(params.frac * static_cast<double>(n)));
    if (k < 1) throw std::invalid_argument("frac*n below one node");
    if (params.reps < 1) throw std::invalid_argument("reps must be positive");

    double base_ll = perm_loglik(p, base);

    // flat arc list so each rep scans in a fixed order
    std::vector<std::pair<NodeIndex, NodeIndex>> arcs;
    arcs.reserve(p.edge_count());
    p.for_each_edge([&](NodeIndex u, NodeIndex v) { arcs.emplace_back(u, v); });

    std::vector<double> reductions(static_cast<size_t>(params.reps), 0.0);
    parallel_for(static_cast<size_t>(params.reps), params.threads, [&](size_t rb, size_t re) {
        std::vector<uint8_t> sampled(n);
        std::vector<NodeIndex> pool(n);
        for (size_t rep = rb; rep < re; ++rep) {
            DetRng rng(params.seed, rep);
            std::fill(sampled.begin(), sampled.end(), 0);
            for (size_t i = 0; i < n; ++i) pool[i] = static_cast<NodeIndex>(i);
            for (size_t i = 0; i < k; ++i) {  // partial Fisher-Yates
                size_t j = i + static_cast<size_t>(rng.below(n - i));
                std::swap(pool[i], pool[j]);
                sampled[pool[i]] = 1;
            }
            double reduction = 0.0;
            for (auto [u, v] : arcs) {
                bool su = sampled[u], sv = sampled[v];
                if (!su && !sv) continue;
                int ru = base.rank[u], rv = base.rank[v];
                double worst;
                if (su && sv) {
                    worst = std::min(worst_z_for_fixed_rank(ru, static_cast<int>(n)),
                                     worst_z_for_fixed_rank(rv, static_cast<int>(n)));
                } else {
                    int fixed = su ? rv : ru;
                    worst = worst_z_for_fixed_rank(fixed, static_cast<int>(n));
                }
                double original = z_value(ru, rv, static_cast<int>(n));
                reduction += std::log(original) - std::log(worst);
            }
            reductions[rep] = reduction;
        }
    }, 8);

    std::vector<double> sorted = reductions;
    std::sort(sorted.begin(), sorted.end());
    double qred = quantile_type1<double>(std::span<const double>(sorted), params.q);
    if (reductions_out) *reductions_out = std::move(reductions);
    return base_ll - qred;
}

std::vector<std::pair<int, int>> permuted_points(const FollowerGraph& p,
                                                 const Permutation& sigma) {
    if (sigma.size() != p.node_count())
        throw std::invalid_argument("permutation size does not match subgraph");
    std::vector<std::pair<int, int>> pts;
    pts.reserve(p.edge_count());
    p.for_each_edge([&](NodeIndex u, NodeIndex v) {
        pts.emplace_back(sigma.rank[u], sigma.rank[v]);
    });
    return pts;
}

}  // namespace dvg
