#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "diversigraph/affinity.hpp"
#include "diversigraph/graph.hpp"
#include "diversigraph/ingest.hpp"
#include "diversigraph/slantstats.hpp"

namespace dvg {

/// Ground-truth population generator. Accounts carry a latent slant and a
/// coreness draw; the top `core_fraction` by coreness form the planted core,
/// which is followed more (follow_boost), follows more (activity_boost),
/// and posts more (tweet_rate_core). Follow choices are homophilous on the
/// followee's outgoing content: P(v follows u) scales with
/// exp(-homophily * |out_center(u) - latent(v)|), which reduces to latent
/// homophily when both slope factors are 1. Outgoing posts center on
/// slope * latent per block, so regressing outgoing on incoming slant
/// recovers the planted slopes.
struct SynthConfig {
    uint64_t seed = 1;  // mandatory; every draw is keyed on (seed, entity)
    size_t n_accounts = 1000;
    double core_fraction = 0.1;
    double homophily = 8.0;
    double slope_core = 1.0;
    double slope_periphery = 1.0;
    double mean_followees = 20.0;
    double core_follow_boost = 50.0;    // multiplier on being followed
    double core_activity_boost = 3.0;   // multiplier on followee count
    double tweet_rate_periphery = 3.0;  // Poisson mean of news posts
    double tweet_rate_core = 30.0;
    double slant_sd = 1.0;
    double slant_clamp = 2.0;      // latents truncated to +-clamp
    double post_noise_sd = 0.1;    // sd of a post around its center
    double retweet_rate = 0.1;
    size_t n_domains = 161;        // slant grid resolution for synthetic outlets
    int64_t base_timestamp = 1252612607;
};

struct SynthAccount {
    NodeId id = 0;
    double latent = 0.0;
    double coreness = 0.0;
    bool core = false;
    double out_factor = 1.0;
    double out_center = 0.0;
};

struct SynthPopulation {
    SynthConfig cfg;
    std::vector<SynthAccount> accounts;  // index aligned with graph node index
    FollowerGraph graph;
};

SynthPopulation gen_population(const SynthConfig& cfg, int threads = 1);

struct SynthEvents {
    std::vector<TweetRecord> records;  // with synthetic URLs
    std::vector<NewsTweet> news;       // the same posts, already matched
    SlantTable table;                  // synthetic outlet grid
};

SynthEvents gen_events(const SynthPopulation& pop, int threads = 1);

struct BlockGraph {
    FollowerGraph graph;        // reciprocal arcs (undirected semantics)
    std::vector<int> block_of;  // per node index
};

/// Planted-partition graph: k contiguous equal blocks, edge probability p_in
/// within and p_out between.
BlockGraph gen_blocks(size_t n, size_t k, double p_in, double p_out, uint64_t seed);

struct AudienceConfig {
    uint64_t seed = 1;
    size_t n_outlets = 100;
    size_t n_clusters = 3;
    size_t pool_size = 4000;  // users per cluster pool
    /// rate[c][d]: probability a pool-d user follows a cluster-c outlet.
    std::vector<std::vector<double>> rate;
};

struct Audiences {
    FollowerSets sets;
    std::vector<int> cluster_of;  // planted cluster per outlet
};

/// Follower sets with planted audience structure; outlets are spread over
/// clusters round-robin.
Audiences gen_audiences(const AudienceConfig& cfg, int threads = 1);

/// Multinomial-logit visit sampler for the slant estimator: choice
/// probabilities softmax(alpha_j + (2c - 1) gamma_j) per group.
std::vector<VisitRecord> gen_visits(std::span<const double> alpha, std::span<const double> gamma,
                                    size_t n_visits, double frac_conservative, uint64_t seed);

}  // namespace dvg
