#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "diversigraph/graph.hpp"
#include "diversigraph/ingest.hpp"

namespace dvg {

/// Per-account slant moments and network statistics. Outgoing covers the
/// account's own news links; incoming covers every news link posted by its
/// followees (duplicates counted per occurrence). Standard deviations use
/// the population convention and are 0 below two observations.
struct AccountSummary {
    NodeId account_id = 0;
    double out_mean = 0.0, out_sd = 0.0, out_quality_mean = 0.0;
    uint64_t out_count = 0;
    double in_mean = 0.0, in_sd = 0.0, in_quality_mean = 0.0;
    uint64_t in_count = 0;
    uint64_t outdegree = 0;  // followers
    uint64_t indegree = 0;   // followees
    double clustering = 0.0;
    uint64_t retweet_count = 0;

    bool has_out() const { return out_count > 0; }
    bool has_in() const { return in_count > 0; }
};

struct SummaryOptions {
    bool clustering = true;
    int threads = 1;
};

/// One summary per graph node, aligned with node indices. Every NewsTweet
/// author must already be a node.
std::vector<AccountSummary> account_summaries(const FollowerGraph& g,
                                              std::span<const NewsTweet> tweets,
                                              const SummaryOptions& opts = {});

/// News-post count per node (NewsTweets authored), aligned with node indices.
std::vector<uint64_t> news_counts(const FollowerGraph& g, std::span<const NewsTweet> tweets);

/// Incoming x outgoing mean-slant tabulation over half-open bins (lo, hi].
/// Accounts need both means defined; out-of-range values land in the edge
/// bins so every such account is counted exactly once.
struct Crosstab {
    double lo = -1.75;
    double width = 0.5;
    size_t bins = 8;
    std::vector<uint64_t> counts;  // row-major, row = outgoing bin, col = incoming bin
    uint64_t total = 0;

    uint64_t at(size_t out_bin, size_t in_bin) const { return counts[out_bin * bins + in_bin]; }
    std::string bin_label(size_t bin) const;
};

Crosstab crosstab(std::span<const AccountSummary> summaries, double bin_width = 0.5,
                  double lo = -1.75, double hi = 2.25);
size_t crosstab_bin(const Crosstab& tab, double value);

// --- Discrete-choice slant estimation ------------------------------------

/// One observed site visit; `conservative` is the visitor's survey flag.
struct VisitRecord {
    int64_t user_id = 0;
    uint32_t site_id = 0;
    bool conservative = false;
};

/// Visit counts by group (0 = liberal, 1 = conservative) and site.
struct VisitCounts {
    std::array<std::vector<double>, 2> by_site;
    std::array<double, 2> total = {0.0, 0.0};
    uint32_t n_sites = 0;
};

VisitCounts tally_visits(std::span<const VisitRecord> visits, uint32_t n_sites);

/// theta packs (alpha_1..alpha_{J-1}, gamma_1..gamma_{J-1}); site 0 is the
/// reference with alpha_0 = gamma_0 = 0. Choice probabilities are
/// softmax_j(alpha_j + (2c - 1) gamma_j) within each group.
double logit_loglik(const VisitCounts& counts, std::span<const double> theta,
                    double ridge = 0.0);
void logit_gradient(const VisitCounts& counts, std::span<const double> theta,
                    double ridge, std::span<double> grad_out);

struct LogitFit {
    std::vector<double> alpha, gamma;        // per site, [0] = 0
    std::vector<double> alpha_se, gamma_se;  // [0] = 0
    double loglik = 0.0;
    int iterations = 0;
    bool converged = false;
};

struct LogitOptions {
    double ridge = 0.0;
    double grad_tol = 1e-8;  // convergence: gradient infinity norm
    int max_iter = 200;
};

class LogitNonConvergence : public std::runtime_error {
public:
    LogitNonConvergence(std::string msg, LogitFit last_iterate)
        : std::runtime_error(std::move(msg)), last(std::move(last_iterate)) {}
    LogitFit last;
};

/// Maximum-likelihood fit by damped Newton with a ridge fallback on
/// non-descent steps. Throws LogitNonConvergence (carrying the last iterate)
/// when the gradient tolerance is not reached within max_iter.
LogitFit fit_slant_logit(std::span<const VisitRecord> visits, uint32_t n_sites,
                         const LogitOptions& opts = {});

std::vector<VisitRecord> load_visits_csv(const std::string& path, uint32_t& n_sites_out);

}  // namespace dvg
