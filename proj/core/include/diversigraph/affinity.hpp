#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace dvg {

/// Follower id sets per news outlet, sorted and deduplicated. Outlets below
/// the follower floor are dropped at load time.
struct FollowerSets {
    std::vector<std::string> outlets;
    std::vector<std::vector<int64_t>> followers;
    std::vector<std::string> excluded;  // outlets dropped by the follower floor

    size_t size() const { return outlets.size(); }
    void add(std::string outlet, std::vector<int64_t> ids);
};

/// Reads one id-list file per outlet from a directory (file name = outlet
/// name, one follower id per line). `min_followers` applies after dedup.
FollowerSets load_follower_sets(const std::string& dir, size_t min_followers = 10000);

/// Symmetric co-following matrix with zero diagonal; entries in [0, 1].
struct AffinityMatrix {
    size_t n = 0;
    std::vector<double> values;  // row-major n x n

    double at(size_t i, size_t j) const { return values[i * n + j]; }
    double& at(size_t i, size_t j) { return values[i * n + j]; }
};

/// A_ij = |F_i intersect F_j| / min(|F_i|, |F_j|). Throws on empty sets.
AffinityMatrix affinity_matrix(const FollowerSets& sets, int threads = 1);

/// Audience-size correction: entry times ln(min(f_i, f_j)) / ln(max(...)).
/// Equal-size pairs are unchanged; the penalty grows with size disparity.
AffinityMatrix scale_affinity(const AffinityMatrix& a, std::span<const size_t> follower_counts);

struct WeightedEdge {
    uint32_t u = 0, v = 0;  // indices into `kept`
    double w = 0.0;
};

struct PrunedGraph {
    std::vector<size_t> kept;    // outlet indices surviving the prune
    std::vector<size_t> pruned;  // outlet indices removed
    std::vector<WeightedEdge> edges;
    size_t outlet_count = 0;     // size of the original matrix
};

/// Drops edges below `w_min`, then (once) nodes with surviving degree below
/// `deg_min`. With `iterate` the node pass repeats until stable.
PrunedGraph prune(const AffinityMatrix& scaled, double w_min = 0.3, size_t deg_min = 5,
                  bool iterate = false);

struct SpinGlassOptions {
    double gamma = 1.0;      // resolution of the null-model term
    uint64_t seed = 0;
    size_t sweeps_factor = 50;  // sweeps = factor * n, each n proposals
    size_t max_labels = 25;
};

struct SpinGlassPartition {
    std::vector<int> community;  // per kept node, dense labels from 0
    size_t n_communities = 0;
    double energy = 0.0;  // final Hamiltonian value
    bool trivial = false; // single community
};

/// Reichardt-Bornholdt spin glass with the weighted configuration null model,
/// minimized by simulated annealing (geometric cooling calibrated to ~0.8
/// initial acceptance) plus a greedy polish. Deterministic given the seed.
SpinGlassPartition detect_clusters(const PrunedGraph& g, const SpinGlassOptions& opts = {});

enum class OutletLabel : uint8_t { liberal, conservative, mainstream, pruned };

struct ClusterLabels {
    std::vector<OutletLabel> label;  // per outlet of the original matrix
};

/// Majority vote of anchor outlets per detected community; communities
/// without anchors become mainstream, a tie is an error. Anchor sets must
/// include "liberal" and "conservative".
ClusterLabels label_clusters(const SpinGlassPartition& partition, const PrunedGraph& g,
                             std::span<const std::string> outlet_names,
                             const std::map<std::string, std::vector<std::string>>& anchors);

struct SlantScore {
    double score = 0.0;
    bool defined = true;  // false when the outlet's overall mean affinity is 0
};

/// Affinity-based slant from the raw matrix: conservative-cluster mean over
/// the outlet's overall mean, minus the liberal counterpart; self-affinity
/// excluded from every mean. Pruned outlets are excluded from the cluster
/// means but still scored.
std::vector<SlantScore> slant_scores(const AffinityMatrix& raw, const ClusterLabels& labels);

}  // namespace dvg
