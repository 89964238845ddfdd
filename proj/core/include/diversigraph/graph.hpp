#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dvg {

using NodeId = int64_t;      // external account id
using NodeIndex = uint32_t;  // dense internal index

/// Sparse directed follower network. An arc u -> v means "v follows u", so
/// information posted by u reaches v: out-neighbors of u are u's followers,
/// in-neighbors of v are v's followees. Immutable once built; no self-loops,
/// no duplicate arcs. Node indices are dense and assigned by ascending
/// external id, so the layout is independent of input order.
class FollowerGraph {
public:
    FollowerGraph() = default;

    size_t node_count() const { return ids_.size(); }
    size_t edge_count() const { return out_targets_.size(); }

    /// Followers of v (out-neighbors), ascending by index.
    std::span<const NodeIndex> followers(NodeIndex v) const {
        return {out_targets_.data() + out_offsets_[v],
                out_targets_.data() + out_offsets_[v + 1]};
    }
    /// Followees of v (in-neighbors), ascending by index.
    std::span<const NodeIndex> followees(NodeIndex v) const {
        return {in_targets_.data() + in_offsets_[v],
                in_targets_.data() + in_offsets_[v + 1]};
    }

    size_t outdegree(NodeIndex v) const { return out_offsets_[v + 1] - out_offsets_[v]; }
    size_t indegree(NodeIndex v) const { return in_offsets_[v + 1] - in_offsets_[v]; }

    /// True when the arc from -> to exists (i.e. `to` follows `from`).
    bool has_edge(NodeIndex from, NodeIndex to) const;

    NodeId id_of(NodeIndex v) const { return ids_[v]; }
    std::optional<NodeIndex> index_of(NodeId id) const;
    std::span<const NodeId> node_ids() const { return ids_; }

    /// Subgraph on `members` (any order, deduplicated), keeping all arcs
    /// among them. External ids carry over; indices are re-densified.
    FollowerGraph induced(std::span<const NodeIndex> members) const;

    /// Iterate all arcs as (from, to) pairs in CSR order.
    template <typename Fn>
    void for_each_edge(Fn&& fn) const {
        for (NodeIndex u = 0; u < node_count(); ++u)
            for (NodeIndex v : followers(u)) fn(u, v);
    }

    static FollowerGraph from_arcs(std::vector<NodeId> ids_in,
                                   std::vector<std::pair<NodeIndex, NodeIndex>> arcs);

private:
    std::vector<NodeId> ids_;  // ascending
    std::vector<size_t> out_offsets_, in_offsets_;
    std::vector<NodeIndex> out_targets_, in_targets_;
};

/// Accumulates nodes and arcs before CSR construction. Duplicate arcs are
/// collapsed and self-loops rejected, with counters.
class GraphBuilder {
public:
    void add_node(NodeId id) { ids_.push_back(id); }
    /// Records that `follower` follows `followee` (arc followee -> follower).
    void add_edge(NodeId followee, NodeId follower);
    FollowerGraph build();

    size_t self_loops() const { return self_loops_; }
    size_t duplicate_edges() const { return duplicates_; }

private:
    std::vector<NodeId> ids_;
    std::vector<std::pair<NodeId, NodeId>> arcs_;
    size_t self_loops_ = 0;
    size_t duplicates_ = 0;  // known only after build()
};

/// Watts-Strogatz style local clustering on the directed graph: neighbors of
/// v are accounts adjacent in either direction; the coefficient counts
/// directed arcs over ordered neighbor pairs, divided by g(g-1). Returns 0
/// when v has fewer than two neighbors.
double clustering_coefficient(const FollowerGraph& g, NodeIndex v);
std::vector<double> clustering_coefficients(const FollowerGraph& g, int threads = 1);

/// Weakly-connected component label per node, labels dense from 0 in
/// discovery order of the smallest member index.
std::vector<uint32_t> weak_components(const FollowerGraph& g);
/// Largest weakly-connected component (ties broken by smallest member
/// index); returned ascending.
std::vector<NodeIndex> giant_component(const FollowerGraph& g);

struct CoreSpec {
    double s = 0.0;                   // outdegree quantile
    double t = 0.0;                   // news-post-count quantile
    double outdegree_threshold = 0.0;
    double newscount_threshold = 0.0;
    std::vector<NodeIndex> members;   // ascending
};

/// News-centric core: nodes with outdegree >= Q_s(outdegree) and news count
/// >= Q_t(news count), quantiles type-1 over the full node set.
CoreSpec induce_core(const FollowerGraph& g, std::span<const uint64_t> newscounts,
                     double s, double t);

/// Giant component of the accounts between the 25th and 75th outdegree
/// percentiles (inclusive) with news count strictly below the 75th
/// percentile. Possibly empty.
std::vector<NodeIndex> moderate_subgraph(const FollowerGraph& g,
                                         std::span<const uint64_t> newscounts);

/// 2x2 block shares between core (block 0) and periphery (block 1).
/// `edge_share[a][b]` is the fraction of arcs from block a to block b;
/// `tweet_share[a][b]` is the normalized upper bound on tweets received,
/// news posts of each block-a account times its news-active followers in
/// block b. Each matrix sums to 1 (all-zero when there is nothing to count).
struct ConnectivityShares {
    double edge_share[2][2] = {{0, 0}, {0, 0}};
    double tweet_share[2][2] = {{0, 0}, {0, 0}};
    size_t total_edges = 0;
    double total_weighted_tweets = 0.0;
};

ConnectivityShares connectivity_shares(const FollowerGraph& g,
                                       std::span<const NodeIndex> core_members,
                                       std::span<const uint64_t> newscounts);

/// Binary graph cache (little-endian): magic "DVGC", u32 version, u64 node
/// count, u64 edge count, node ids, out-CSR offsets and targets.
void save_graph_cache(const FollowerGraph& g, const std::string& path);
FollowerGraph load_graph_cache(const std::string& path);

}  // namespace dvg
