#include "diversigraph/graph.hpp"

#include <algorithm>
#include <cstring>
#include <deque>
#include <fstream>
#include <stdexcept>
#include <unordered_map>

#include "diversigraph/util.hpp"

namespace dvg {

bool FollowerGraph::has_edge(NodeIndex from, NodeIndex to) const {
    auto nb = followers(from);
    return std::binary_search(nb.begin(), nb.end(), to);
}

std::optional<NodeIndex> FollowerGraph::index_of(NodeId id) const {
    auto it = std::lower_bound(ids_.begin(), ids_.end(), id);
    if (it == ids_.end() || *it != id) return std::nullopt;
    return static_cast<NodeIndex>(it - ids_.begin());
}

FollowerGraph FollowerGraph::from_arcs(std::vector<NodeId> ids_in,
                                       std::vector<std::pair<NodeIndex, NodeIndex>> arcs) {
    FollowerGraph g;
    g.ids_ = std::move(ids_in);
    size_t n = g.ids_.size();
    std::sort(arcs.begin(), arcs.end());
    arcs.erase(std::unique(arcs.begin(), arcs.end()), arcs.end());

    g.out_offsets_.assign(n + 1, 0);
    g.in_offsets_.assign(n + 1, 0);
    for (auto& [u, v] : arcs) {
        if (u >= n || v >= n) throw std::out_of_range("arc endpoint out of range");
        ++g.out_offsets_[u + 1];
        ++g.in_offsets_[v + 1];
    }
    for (size_t i = 0; i < n; ++i) {
        g.out_offsets_[i + 1] += g.out_offsets_[i];
        g.in_offsets_[i + 1] += g.in_offsets_[i];
    }
    g.out_targets_.resize(arcs.size());
    g.in_targets_.resize(arcs.size());
    std::vector<size_t> out_pos(g.out_offsets_.begin(), g.out_offsets_.end() - 1);
    std::vector<size_t> in_pos(g.in_offsets_.begin(), g.in_offsets_.end() - 1);
    for (auto& [u, v] : arcs) g.out_targets_[out_pos[u]++] = v;
    // arcs are sorted by (u, v); fill in-lists in a second pass sorted by v
    // so both adjacency lists come out ascending.
    std::sort(arcs.begin(), arcs.end(), [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second < b.second : a.first < b.first;
    });
    for (auto& [u, v] : arcs) g.in_targets_[in_pos[v]++] = u;
    return g;
}

void GraphBuilder::add_edge(NodeId followee, NodeId follower) {
    if (followee == follower) {
        ++self_loops_;
        return;
    }
    arcs_.emplace_back(followee, follower);
}

FollowerGraph GraphBuilder::build() {
    for (auto& [a, b] : arcs_) {
        ids_.push_back(a);
        ids_.push_back(b);
    }
    std::sort(ids_.begin(), ids_.end());
    ids_.erase(std::unique(ids_.begin(), ids_.end()), ids_.end());

    std::vector<std::pair<NodeIndex, NodeIndex>> arcs;
    arcs.reserve(arcs_.size());
    auto index_of = [&](NodeId id) {
        return static_cast<NodeIndex>(
            std::lower_bound(ids_.begin(), ids_.end(), id) - ids_.begin());
    };
    for (auto& [a, b] : arcs_) arcs.emplace_back(index_of(a), index_of(b));
    std::sort(arcs.begin(), arcs.end());
    size_t before = arcs.size();
    arcs.erase(std::unique(arcs.begin(), arcs.end()), arcs.end());
    duplicates_ = before - arcs.size();
    return FollowerGraph::from_arcs(std::move(ids_), std::move(arcs));
}

FollowerGraph FollowerGraph::induced(std::span<const NodeIndex> members) const {
    std::vector<NodeIndex> sorted(members.begin(), members.end());
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

    std::vector<NodeIndex> local(node_count(), UINT32_MAX);
    std::vector<NodeId> sub_ids(sorted.size());
    for (size_t i = 0; i < sorted.size(); ++i) {
        local[sorted[i]] = static_cast<NodeIndex>(i);
        sub_ids[i] = ids_[sorted[i]];
    }
    std::vector<std::pair<NodeIndex, NodeIndex>> arcs;
    for (NodeIndex u : sorted)
        for (NodeIndex v : followers(u))
            if (local[v] != UINT32_MAX) arcs.emplace_back(local[u], local[v]);
    return from_arcs(std::move(sub_ids), std::move(arcs));
}

namespace {

// Reusable neighbor mark buffer; per thread so the all-nodes pass can run
// chunked without allocation per node.
struct Marks {
    std::vector<uint32_t> stamp;
    uint32_t epoch = 0;
};
thread_local Marks tl_marks;

double clustering_with_marks(const FollowerGraph& g, NodeIndex v, Marks& m,
                             std::vector<NodeIndex>& nei) {
    if (m.stamp.size() != g.node_count()) {
        m.stamp.assign(g.node_count(), 0);
        m.epoch = 0;
    }
    ++m.epoch;
    if (m.epoch == 0) {  // wrapped
        std::fill(m.stamp.begin(), m.stamp.end(), 0);
        m.epoch = 1;
    }
    nei.clear();
    for (NodeIndex w : g.followers(v))
        if (m.stamp[w] != m.epoch) {
            m.stamp[w] = m.epoch;
            nei.push_back(w);
        }
    for (NodeIndex w : g.followees(v))
        if (m.stamp[w] != m.epoch) {
            m.stamp[w] = m.epoch;
            nei.push_back(w);
        }
    size_t k = nei.size();
    if (k < 2) return 0.0;
    size_t arcs = 0;
    for (NodeIndex j : nei)
        for (NodeIndex w : g.followers(j))
            if (w != v && m.stamp[w] == m.epoch) ++arcs;
    return static_cast<double>(arcs) / (static_cast<double>(k) * static_cast<double>(k - 1));
}

}  // namespace

double clustering_coefficient(const FollowerGraph& g, NodeIndex v) {
    if (v >= g.node_count()) throw std::out_of_range("unknown node index");
    std::vector<NodeIndex> nei;
    return clustering_with_marks(g, v, tl_marks, nei);
}

std::vector<double> clustering_coefficients(const FollowerGraph& g, int threads) {
    std::vector<double> out(g.node_count(), 0.0);
    parallel_for(g.node_count(), threads, [&](size_t b, size_t e) {
        std::vector<NodeIndex> nei;
        for (size_t v = b; v < e; ++v)
            out[v] = clustering_with_marks(g, static_cast<NodeIndex>(v), tl_marks, nei);
    });
    return out;
}

std::vector<uint32_t> weak_components(const FollowerGraph& g) {
    size_t n = g.node_count();
    std::vector<uint32_t> comp(n, UINT32_MAX);
    uint32_t next = 0;
    std::deque<NodeIndex> queue;
    for (NodeIndex s = 0; s < n; ++s) {
        if (comp[s] != UINT32_MAX) continue;
        comp[s] = next;
        queue.push_back(s);
        while (!queue.empty()) {
            NodeIndex u = queue.front();
            queue.pop_front();
            for (NodeIndex v : g.followers(u))
                if (comp[v] == UINT32_MAX) {
                    comp[v] = next;
                    queue.push_back(v);
                }
            for (NodeIndex v : g.followees(u))
                if (comp[v] == UINT32_MAX) {
                    comp[v] = next;
                    queue.push_back(v);
                }
        }
        ++next;
    }
    return comp;
}

std::vector<NodeIndex> giant_component(const FollowerGraph& g) {
    if (g.node_count() == 0) return {};
    auto comp = weak_components(g);
    uint32_t n_comp = *std::max_element(comp.begin(), comp.end()) + 1;
    std::vector<size_t> size(n_comp, 0);
    for (uint32_t c : comp) ++size[c];
    uint32_t best = 0;
    for (uint32_t c = 1; c < n_comp; ++c)
        if (size[c] > size[best]) best = c;  // first-seen wins ties -> smallest member
    std::vector<NodeIndex> out;
    out.reserve(size[best]);
    for (NodeIndex v = 0; v < g.node_count(); ++v)
        if (comp[v] == best) out.push_back(v);
    return out;
}

CoreSpec induce_core(const FollowerGraph& g, std::span<const uint64_t> newscounts,
                     double s, double t) {
    if (newscounts.size() != g.node_count())
        throw std::invalid_argument("newscounts length must equal node count");
    if (s < 0 || s > 1 || t < 0 || t > 1)
        throw std::invalid_argument("core quantiles must lie in [0,1]");
    size_t n = g.node_count();
    CoreSpec spec;
    spec.s = s;
    spec.t = t;
    if (n == 0) return spec;

    std::vector<uint64_t> degs(n), news(newscounts.begin(), newscounts.end());
    for (NodeIndex v = 0; v < n; ++v) degs[v] = g.outdegree(v);
    std::vector<uint64_t> ds = degs, ns = news;
    std::sort(ds.begin(), ds.end());
    std::sort(ns.begin(), ns.end());
    uint64_t dth = quantile_type1<uint64_t>(std::span<const uint64_t>(ds), s);
    uint64_t nth = quantile_type1<uint64_t>(std::span<const uint64_t>(ns), t);
    spec.outdegree_threshold = static_cast<double>(dth);
    spec.newscount_threshold = static_cast<double>(nth);
    for (NodeIndex v = 0; v < n; ++v)
        if (degs[v] >= dth && news[v] >= nth) spec.members.push_back(v);
    return spec;
}

std::vector<NodeIndex> moderate_subgraph(const FollowerGraph& g,
                                         std::span<const uint64_t> newscounts) {
    if (newscounts.size() != g.node_count())
        throw std::invalid_argument("newscounts length must equal node count");
    size_t n = g.node_count();
    if (n == 0) return {};
    std::vector<uint64_t> degs(n);
    for (NodeIndex v = 0; v < n; ++v) degs[v] = g.outdegree(v);
    std::vector<uint64_t> ds = degs, ns(newscounts.begin(), newscounts.end());
    std::sort(ds.begin(), ds.end());
    std::sort(ns.begin(), ns.end());
    uint64_t d25 = quantile_type1<uint64_t>(std::span<const uint64_t>(ds), 0.25);
    uint64_t d75 = quantile_type1<uint64_t>(std::span<const uint64_t>(ds), 0.75);
    uint64_t n75 = quantile_type1<uint64_t>(std::span<const uint64_t>(ns), 0.75);

    std::vector<NodeIndex> qualifying;
    for (NodeIndex v = 0; v < n; ++v)
        if (degs[v] >= d25 && degs[v] <= d75 && newscounts[v] < n75)
            qualifying.push_back(v);
    if (qualifying.empty()) return {};

    FollowerGraph sub = g.induced(qualifying);
    auto gc_local = giant_component(sub);
    std::vector<NodeIndex> out;
    out.reserve(gc_local.size());
    for (NodeIndex lv : gc_local) {
        auto idx = g.index_of(sub.id_of(lv));
        out.push_back(*idx);
    }
    std::sort(out.begin(), out.end());
    return out;
}

ConnectivityShares connectivity_shares(const FollowerGraph& g,
                                       std::span<const NodeIndex> core_members,
                                       std::span<const uint64_t> newscounts) {
    if (newscounts.size() != g.node_count())
        throw std::invalid_argument("newscounts length must equal node count");
    std::vector<uint8_t> block(g.node_count(), 1);  // 0 = core, 1 = periphery
    for (NodeIndex v : core_members) {
        if (v >= g.node_count()) throw std::out_of_range("core member outside graph");
        block[v] = 0;
    }
    ConnectivityShares r;
    size_t edge_counts[2][2] = {{0, 0}, {0, 0}};
    double tweet_sums[2][2] = {{0, 0}, {0, 0}};
    g.for_each_edge([&](NodeIndex u, NodeIndex v) { ++edge_counts[block[u]][block[v]]; });
    for (NodeIndex a = 0; a < g.node_count(); ++a) {
        if (newscounts[a] == 0) continue;
        size_t active_followers[2] = {0, 0};
        for (NodeIndex f : g.followers(a))
            if (newscounts[f] > 0) ++active_followers[block[f]];
        double sent = static_cast<double>(newscounts[a]);
        tweet_sums[block[a]][0] += sent * static_cast<double>(active_followers[0]);
        tweet_sums[block[a]][1] += sent * static_cast<double>(active_followers[1]);
    }
    r.total_edges = g.edge_count();
    r.total_weighted_tweets =
        tweet_sums[0][0] + tweet_sums[0][1] + tweet_sums[1][0] + tweet_sums[1][1];
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
            if (r.total_edges > 0)
                r.edge_share[a][b] = static_cast<double>(edge_counts[a][b]) /
                                     static_cast<double>(r.total_edges);
            if (r.total_weighted_tweets > 0)
                r.tweet_share[a][b] = tweet_sums[a][b] / r.total_weighted_tweets;
        }
    return r;
}

namespace {

constexpr uint32_t kCacheMagic = 0x43475644;  // "DVGC"
constexpr uint32_t kCacheVersion = 1;

template <typename T>
void write_pod(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <typename T>
void read_pod(std::istream& is, T& v) {
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
}

}  // namespace

void save_graph_cache(const FollowerGraph& g, const std::string& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open graph cache for writing: " + path);
    write_pod(os, kCacheMagic);
    write_pod(os, kCacheVersion);
    write_pod(os, static_cast<uint64_t>(g.node_count()));
    write_pod(os, static_cast<uint64_t>(g.edge_count()));
    for (NodeId id : g.node_ids()) write_pod(os, id);
    for (NodeIndex u = 0; u < g.node_count(); ++u) {
        auto nb = g.followers(u);
        write_pod(os, static_cast<uint64_t>(nb.size()));
        for (NodeIndex v : nb) write_pod(os, v);
    }
    if (!os) throw std::runtime_error("short write to graph cache: " + path);
}

FollowerGraph load_graph_cache(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open graph cache: " + path);
    uint32_t magic = 0, version = 0;
    read_pod(is, magic);
    read_pod(is, version);
    if (magic != kCacheMagic || version != kCacheVersion)
        throw std::runtime_error("bad graph cache header: " + path);
    uint64_t n = 0, m = 0;
    read_pod(is, n);
    read_pod(is, m);
    std::vector<NodeId> ids(n);
    for (auto& id : ids) read_pod(is, id);
    std::vector<std::pair<NodeIndex, NodeIndex>> arcs;
    arcs.reserve(m);
    for (uint64_t u = 0; u < n; ++u) {
        uint64_t deg = 0;
        read_pod(is, deg);
        for (uint64_t k = 0; k < deg; ++k) {
            NodeIndex v = 0;
            read_pod(is, v);
            arcs.emplace_back(static_cast<NodeIndex>(u), v);
        }
    }
    if (!is || arcs.size() != m)
        throw std::runtime_error("truncated graph cache: " + path);
    return FollowerGraph::from_arcs(std::move(ids), std::move(arcs));
}

}  // namespace dvg
