#include "diversigraph/community.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>
#include <unordered_map>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "diversigraph/rng.hpp"
#include "diversigraph/util.hpp"

namespace dvg {

namespace {

// Undirected simple adjacency (edge when either direction is present),
// local indices, neighbor lists ascending.
std::vector<std::vector<NodeIndex>> symmetrize(const FollowerGraph& g) {
    std::vector<std::vector<NodeIndex>> adj(g.node_count());
    g.for_each_edge([&](NodeIndex u, NodeIndex v) {
        adj[u].push_back(v);
        adj[v].push_back(u);
    });
    for (auto& nb : adj) {
        std::sort(nb.begin(), nb.end());
        nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
    }
    return adj;
}

void canonical_sign(Eigen::VectorXd& v) {
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < v.size(); ++i)
        if (std::abs(v[i]) > std::abs(v[best])) best = i;
    if (v[best] < 0) v = -v;
}

struct EigenPairs {
    std::vector<double> values;
    std::vector<Eigen::VectorXd> vectors;
    std::vector<double> residuals;
};

EigenPairs dense_smallest_nonzero(const std::vector<std::vector<NodeIndex>>& adj, int k) {
    size_t n = adj.size();
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
    for (size_t i = 0; i < n; ++i) {
        L(i, i) = static_cast<double>(adj[i].size());
        for (NodeIndex j : adj[i]) L(static_cast<Eigen::Index>(i), j) = -1.0;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(L);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("dense Laplacian eigendecomposition failed");

    // connected input: exactly one (numerically) zero eigenvalue
    double scale = std::max(1.0, es.eigenvalues()[static_cast<Eigen::Index>(n) - 1]);
    EigenPairs out;
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(n) && static_cast<int>(out.values.size()) < k; ++i) {
        double lambda = es.eigenvalues()[i];
        if (lambda <= 1e-10 * scale) continue;
        Eigen::VectorXd v = es.eigenvectors().col(i);
        canonical_sign(v);
        double resid = (L * v - lambda * v).norm() / v.norm();
        out.values.push_back(lambda);
        out.vectors.push_back(std::move(v));
        out.residuals.push_back(resid);
    }
    return out;
}

// Shift-invert Lanczos with full reorthogonalization against the Krylov
// basis and the constant vector (the known zero-eigenvalue direction).
EigenPairs lanczos_smallest_nonzero(const std::vector<std::vector<NodeIndex>>& adj, int k,
                                    double tol, size_t max_iters) {
    size_t n = adj.size();
    Eigen::SparseMatrix<double> L(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    {
        std::vector<Eigen::Triplet<double>> trips;
        size_t nnz = n;
        for (auto& nb : adj) nnz += nb.size();
        trips.reserve(nnz);
        double mean_deg = 0.0;
        for (size_t i = 0; i < n; ++i) mean_deg += static_cast<double>(adj[i].size());
        mean_deg /= static_cast<double>(n);
        (void)mean_deg;
        for (size_t i = 0; i < n; ++i) {
            trips.emplace_back(static_cast<int>(i), static_cast<int>(i),
                               static_cast<double>(adj[i].size()));
            for (NodeIndex j : adj[i]) trips.emplace_back(static_cast<int>(i), static_cast<int>(j), -1.0);
        }
        L.setFromTriplets(trips.begin(), trips.end());
    }
    const double sigma = 1e-3;
    Eigen::SparseMatrix<double> shifted = L;
    for (Eigen::Index i = 0; i < shifted.rows(); ++i) shifted.coeffRef(i, i) += sigma;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(shifted);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("Laplacian shift factorization failed");

    Eigen::VectorXd ones = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n),
                                                     1.0 / std::sqrt(static_cast<double>(n)));

    size_t m = std::min<size_t>(n - 1, std::max<size_t>(2 * static_cast<size_t>(k) + 30, 60));
    size_t iters_used = 0;
    for (;;) {
        std::vector<Eigen::VectorXd> V;
        V.reserve(m + 1);
        std::vector<double> alpha, beta;

        DetRng rng(0x5eedu, 0);
        Eigen::VectorXd v(static_cast<Eigen::Index>(n));
        for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.normal();
        v -= ones.dot(v) * ones;
        v.normalize();
        V.push_back(v);

        for (size_t j = 0; j < m; ++j) {
            ++iters_used;
            Eigen::VectorXd w = solver.solve(V[j]);
            if (j > 0) w -= beta[j - 1] * V[j - 1];
            double a = V[j].dot(w);
            w -= a * V[j];
            // full reorthogonalization, twice for numerical safety
            for (int pass = 0; pass < 2; ++pass) {
                w -= ones.dot(w) * ones;
                for (const auto& q : V) w -= q.dot(w) * q;
            }
            alpha.push_back(a);
            double b = w.norm();
            if (b < 1e-14) {  // invariant subspace; restart direction
                Eigen::VectorXd fresh(static_cast<Eigen::Index>(n));
                for (Eigen::Index i = 0; i < fresh.size(); ++i) fresh[i] = rng.normal();
                fresh -= ones.dot(fresh) * ones;
                for (const auto& q : V) fresh -= q.dot(fresh) * q;
                b = fresh.norm();
                if (b < 1e-14) break;
                w = fresh;
            }
            beta.push_back(b);
            V.push_back(w / b);
        }

        size_t steps = alpha.size();
        Eigen::MatrixXd T = Eigen::MatrixXd::Zero(steps, steps);
        for (size_t i = 0; i < steps; ++i) {
            T(i, i) = alpha[i];
            if (i + 1 < steps) {
                T(i, i + 1) = beta[i];
                T(i + 1, i) = beta[i];
            }
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
        if (es.info() != Eigen::Success)
            throw std::runtime_error("tridiagonal eigendecomposition failed");

        // largest Ritz values of (L + sigma I)^-1 give the smallest of L, so
        // walking theta downward yields lambda ascending
        EigenPairs out;
        for (Eigen::Index idx = static_cast<Eigen::Index>(steps) - 1;
             idx >= 0 && static_cast<int>(out.values.size()) < k; --idx) {
            double theta = es.eigenvalues()[idx];
            if (theta <= 0) break;
            double lambda = 1.0 / theta - sigma;
            if (lambda <= 1e-10) continue;  // deflated constant direction remnants
            Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
            for (size_t j = 0; j < steps; ++j) x += es.eigenvectors()(static_cast<Eigen::Index>(j), idx) * V[j];
            x.normalize();
            double resid = (L * x - lambda * x).norm();
            canonical_sign(x);
            out.values.push_back(lambda);
            out.vectors.push_back(std::move(x));
            out.residuals.push_back(resid);
        }

        bool converged = static_cast<int>(out.values.size()) ==
                         std::min<int>(k, static_cast<int>(n) - 1);
        for (double r : out.residuals)
            if (r > tol) converged = false;
        if (converged) return out;

        if (m >= n - 1 || iters_used >= max_iters) {
            std::string msg = "Laplacian eigensolver did not converge; residuals:";
            for (double r : out.residuals) msg += " " + format_double(r);
            throw std::runtime_error(msg);
        }
        m = std::min(n - 1, m * 2);
    }
}

}  // namespace

std::pair<std::vector<Permutation>, SpectralResult>
spectral_orderings(const FollowerGraph& subgraph, const SpectralOptions& opts) {
    size_t n_all = subgraph.node_count();
    if (n_all < 2) throw std::invalid_argument("spectral ordering needs at least two nodes");

    auto comp = weak_components(subgraph);
    uint32_t n_comp = *std::max_element(comp.begin(), comp.end()) + 1;

    SpectralResult result;
    std::vector<NodeIndex> gc;
    FollowerGraph gc_graph;
    const FollowerGraph* work = &subgraph;
    std::vector<NodeIndex> gc_to_sub;  // local -> subgraph index
    if (n_comp > 1) {
        result.used_giant_component = true;
        gc = giant_component(subgraph);
        gc_graph = subgraph.induced(gc);
        work = &gc_graph;
        gc_to_sub = gc;
    } else {
        gc_to_sub.resize(n_all);
        for (NodeIndex v = 0; v < n_all; ++v) gc_to_sub[v] = v;
    }
    result.component = gc_to_sub;

    size_t n = work->node_count();
    if (n < 2) throw std::invalid_argument("giant component too small for spectral ordering");
    auto adj = symmetrize(*work);

    int k = std::min<int>(opts.k, static_cast<int>(n) - 1);
    EigenPairs pairs =
        n <= opts.dense_threshold
            ? dense_smallest_nonzero(adj, k)
            : lanczos_smallest_nonzero(adj, k, opts.tol, opts.max_iter_factor * n);

    result.eigenvalues = pairs.values;
    result.residuals = pairs.residuals;
    for (auto& v : pairs.vectors)
        result.eigenvectors.emplace_back(v.data(), v.data() + v.size());
    if (pairs.values.size() >= 2) {
        double lo = pairs.values.front(), hi = pairs.values.back();
        result.degenerate = (hi - lo) <= 1e-10 * std::max(1.0, hi);
    }

    // Rank the component by eigenvector value, then append the remaining
    // components (size descending, then smallest id) in id order.
    std::vector<std::vector<NodeIndex>> rest;
    if (result.used_giant_component) {
        std::vector<uint8_t> in_gc(n_all, 0);
        for (NodeIndex v : gc) in_gc[v] = 1;
        std::unordered_map<uint32_t, std::vector<NodeIndex>> groups;
        for (NodeIndex v = 0; v < n_all; ++v)
            if (!in_gc[v]) groups[comp[v]].push_back(v);
        for (auto& [c, nodes] : groups) rest.push_back(std::move(nodes));
        std::sort(rest.begin(), rest.end(), [](const auto& a, const auto& b) {
            if (a.size() != b.size()) return a.size() > b.size();
            return a.front() < b.front();
        });
    }

    std::vector<Permutation> perms;
    for (size_t e = 0; e < pairs.vectors.size(); ++e) {
        const Eigen::VectorXd& vec = pairs.vectors[e];
        std::vector<NodeIndex> local(n);
        for (size_t i = 0; i < n; ++i) local[i] = static_cast<NodeIndex>(i);
        std::sort(local.begin(), local.end(), [&](NodeIndex a, NodeIndex b) {
            double va = vec[a], vb = vec[b];
            if (va != vb) return va < vb;
            return work->id_of(a) < work->id_of(b);
        });
        Permutation p;
        p.source = Permutation::Source::spectral;
        p.rank.assign(n_all, 0);
        int r = 1;
        for (NodeIndex lv : local) p.rank[gc_to_sub[lv]] = r++;
        for (const auto& nodes : rest)
            for (NodeIndex v : nodes) p.rank[v] = r++;
        perms.push_back(std::move(p));
    }
    return {std::move(perms), std::move(result)};
}

Permutation best_spectral_permutation(std::span<const Permutation> candidates,
                                      const FollowerGraph& p, SpectralResult* result) {
    if (candidates.empty()) throw std::invalid_argument("no spectral candidates");
    size_t best = 0;
    double best_ll = perm_loglik(p, candidates[0]);
    for (size_t i = 1; i < candidates.size(); ++i) {
        double ll = perm_loglik(p, candidates[i]);
        if (ll > best_ll) {
            best_ll = ll;
            best = i;
        }
    }
    if (result) result->chosen = static_cast<int>(best);
    return candidates[best];
}

// --- Clauset-Newman-Moore ---------------------------------------------------

namespace {

struct HeapEntry {
    double dq;
    NodeIndex a, b;  // community representatives, a < b
    bool operator<(const HeapEntry& o) const {
        if (dq != o.dq) return dq < o.dq;
        if (a != o.a) return a > o.a;  // deterministic tie-break: smaller pair wins
        return b > o.b;
    }
};

struct TreeNode {
    int left = -1, right = -1;  // leaves when < n
    NodeIndex min_id = 0;
    size_t size = 1;
};

void collect_leaves(const std::vector<TreeNode>& tree, int root, size_t n_leaves,
                    std::vector<NodeIndex>& out) {
    std::vector<int> stack{root};
    while (!stack.empty()) {
        int node = stack.back();
        stack.pop_back();
        if (node < static_cast<int>(n_leaves)) {
            out.push_back(static_cast<NodeIndex>(node));
            continue;
        }
        stack.push_back(tree[static_cast<size_t>(node)].right);
        stack.push_back(tree[static_cast<size_t>(node)].left);
    }
}

}  // namespace

std::pair<Permutation, Dendrogram> cnm_ordering(const FollowerGraph& subgraph) {
    size_t n = subgraph.node_count();
    if (n == 0) throw std::invalid_argument("cnm ordering of empty subgraph");
    auto adj = symmetrize(subgraph);
    size_t m2 = 0;  // 2m
    for (auto& nb : adj) m2 += nb.size();

    Dendrogram dendro;
    Permutation perm;
    perm.source = Permutation::Source::cnm;

    // community state; alive communities only
    std::vector<std::unordered_map<NodeIndex, double>> dq(n);
    std::vector<double> a(n, 0.0);
    std::vector<uint8_t> alive(n, 1);
    std::vector<int> tree_of(n);        // community rep -> tree node
    std::vector<TreeNode> tree(n);
    std::vector<NodeIndex> min_id(n);
    double q = 0.0;

    for (size_t i = 0; i < n; ++i) {
        tree_of[i] = static_cast<int>(i);
        tree[i].min_id = static_cast<NodeIndex>(i);
        min_id[i] = static_cast<NodeIndex>(i);
    }
    std::priority_queue<HeapEntry> heap;
    if (m2 > 0) {
        for (size_t i = 0; i < n; ++i) a[i] = static_cast<double>(adj[i].size()) / static_cast<double>(m2);
        for (size_t i = 0; i < n; ++i) q -= a[i] * a[i];
        for (size_t i = 0; i < n; ++i)
            for (NodeIndex j : adj[i])
                if (j > i) {
                    double v = 2.0 * (1.0 / static_cast<double>(m2) - a[i] * a[j]);
                    dq[i][j] = v;
                    dq[j][static_cast<NodeIndex>(i)] = v;
                    heap.push({v, static_cast<NodeIndex>(i), j});
                }
    }

    while (!heap.empty()) {
        HeapEntry top = heap.top();
        heap.pop();
        if (!alive[top.a] || !alive[top.b]) continue;
        auto it = dq[top.a].find(top.b);
        if (it == dq[top.a].end() || it->second != top.dq) continue;  // stale

        NodeIndex i = top.a, j = top.b;
        // absorb the community with the smaller neighbor map
        if (dq[j].size() > dq[i].size()) std::swap(i, j);

        q += top.dq;
        dendro.merges.push_back({std::min(min_id[i], min_id[j]), std::max(min_id[i], min_id[j]), q});
        // merge tree node; left subtree = smaller min id
        TreeNode node;
        int ti = tree_of[i], tj = tree_of[j];
        bool i_first = min_id[i] < min_id[j];
        node.left = i_first ? ti : tj;
        node.right = i_first ? tj : ti;
        node.min_id = std::min(min_id[i], min_id[j]);
        node.size = tree[static_cast<size_t>(ti)].size + tree[static_cast<size_t>(tj)].size;
        tree.push_back(node);
        tree_of[i] = static_cast<int>(tree.size()) - 1;
        min_id[i] = node.min_id;

        alive[j] = 0;
        dq[i].erase(j);
        dq[j].erase(i);
        for (auto& [k, v_jk] : dq[j]) {
            if (!alive[k]) continue;
            dq[k].erase(j);
            double nv;
            auto ik = dq[i].find(k);
            if (ik != dq[i].end()) nv = ik->second + v_jk;       // adjacent to both
            else nv = v_jk - 2.0 * a[i] * a[k];                  // only to j
            dq[i][k] = nv;
            dq[k][i] = nv;
            NodeIndex lo = std::min(i, k), hi = std::max(i, k);
            heap.push({nv, lo, hi});
        }
        for (auto& [k, v_ik] : dq[i]) {
            if (!alive[k]) continue;
            if (dq[j].count(k)) continue;  // handled above
            double nv = v_ik - 2.0 * a[j] * a[k];                // only to i
            dq[i][k] = nv;
            dq[k][i] = nv;
            NodeIndex lo = std::min(i, k), hi = std::max(i, k);
            heap.push({nv, lo, hi});
        }
        dq[j].clear();
        a[i] += a[j];
        a[j] = 0.0;
    }

    // best-Q cut over the merge sequence (Q starts at -sum a_i^2)
    double q0 = 0.0;
    for (size_t i = 0; i < n; ++i)
        if (m2 > 0) q0 -= (static_cast<double>(adj[i].size()) / static_cast<double>(m2)) *
                          (static_cast<double>(adj[i].size()) / static_cast<double>(m2));
    dendro.best_modularity = q0;
    size_t best_merges = 0;
    for (size_t t = 0; t < dendro.merges.size(); ++t)
        if (dendro.merges[t].modularity_after > dendro.best_modularity) {
            dendro.best_modularity = dendro.merges[t].modularity_after;
            best_merges = t + 1;
        }
    dendro.communities_at_best = n - best_merges;

    // forest roots -> components; order by size desc then min id
    std::vector<int> roots;
    for (size_t c = 0; c < n; ++c)
        if (alive[c]) roots.push_back(tree_of[c]);
    std::sort(roots.begin(), roots.end(), [&](int ra, int rb) {
        const TreeNode& ta = tree[static_cast<size_t>(ra)];
        const TreeNode& tb = tree[static_cast<size_t>(rb)];
        if (ta.size != tb.size) return ta.size > tb.size;
        return ta.min_id < tb.min_id;
    });
    for (int r : roots) collect_leaves(tree, r, n, dendro.leaf_order);

    perm.rank.assign(n, 0);
    int rank = 1;
    for (NodeIndex v : dendro.leaf_order) perm.rank[v] = rank++;
    return {std::move(perm), std::move(dendro)};
}

OrderingReport compare_orderings(const FollowerGraph& p,
                                 std::span<const std::pair<std::string, Permutation>> perms,
                                 const CriticalValueParams& params) {
    OrderingReport report;
    for (const auto& [name, perm] : perms) {
        if (perm.size() != p.node_count())
            throw std::invalid_argument("permutation '" + name + "' does not cover the subgraph");
        OrderingReport::Row row;
        row.name = name;
        row.loglik = perm_loglik(p, perm);
        row.critical_value = critical_value(p, perm, params);
        report.rows.push_back(std::move(row));
    }
    std::sort(report.rows.begin(), report.rows.end(), [](const auto& a, const auto& b) {
        if (a.loglik != b.loglik) return a.loglik > b.loglik;
        return a.name < b.name;
    });
    for (auto& row : report.rows)
        for (const auto& other : report.rows)
            if (other.name != row.name && row.loglik < other.critical_value)
                row.worse_than.push_back(other.name);
    return report;
}

}  // namespace dvg
