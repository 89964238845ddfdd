#include <doctest.h>

#include <cmath>

#include "diversigraph/rng.hpp"
#include "diversigraph/slantstats.hpp"
#include "diversigraph/synth.hpp"
#include "oracles.hpp"

using namespace dvg;

namespace {

FollowerGraph graph_from(std::initializer_list<std::pair<NodeId, NodeId>> arcs,
                         std::initializer_list<NodeId> extra = {}) {
    GraphBuilder b;
    for (NodeId n : extra) b.add_node(n);
    for (auto& [u, v] : arcs) b.add_edge(u, v);
    return b.build();
}

NewsTweet nt(NodeId author, double slant, double quality = 0.0) {
    NewsTweet t;
    t.tweet_id = "t";
    t.author_id = author;
    t.slant = slant;
    t.quality = quality;
    return t;
}

}  // namespace

TEST_CASE("incoming distribution from a single followee") {
    // account 2 follows account 1; account 1 posted slants -1 and +1
    auto g = graph_from({{1, 2}});
    std::vector<NewsTweet> tweets{nt(1, -1.0), nt(1, 1.0)};
    auto s = account_summaries(g, tweets);
    const AccountSummary& two = s[*g.index_of(2)];
    CHECK(two.in_count == 2);
    CHECK(two.in_mean == 0.0);
    CHECK(two.in_sd == doctest::Approx(1.0));  // population sd of {-1, 1}
    CHECK(two.out_count == 0);
    CHECK_FALSE(two.has_out());
}

TEST_CASE("duplicate posts are counted per occurrence") {
    auto g = graph_from({{1, 2}});
    std::vector<NewsTweet> tweets{nt(1, 0.5), nt(1, 0.5)};
    auto s = account_summaries(g, tweets);
    CHECK(s[*g.index_of(2)].in_count == 2);
    CHECK(s[*g.index_of(2)].in_mean == 0.5);
    CHECK(s[*g.index_of(1)].out_count == 2);
}

TEST_CASE("summaries match the naive two-pass oracle on a random population") {
    SynthConfig cfg;
    cfg.seed = 11;
    cfg.n_accounts = 200;
    cfg.core_fraction = 0.1;
    cfg.mean_followees = 6;
    cfg.tweet_rate_periphery = 2;
    cfg.tweet_rate_core = 8;
    auto pop = gen_population(cfg);
    auto ev = gen_events(pop);

    auto summaries = account_summaries(pop.graph, ev.news, {.clustering = false, .threads = 4});
    auto naive = oracle::naive_summaries(pop.graph, ev.news);
    for (const auto& s : summaries) {
        const auto& ref = naive.at(s.account_id);
        CHECK(s.out_count == ref.out_slants.size());
        CHECK(s.in_count == ref.in_slants.size());
        if (!ref.out_slants.empty()) {
            CHECK(s.out_mean == doctest::Approx(oracle::mean_of(ref.out_slants)).epsilon(1e-9));
            CHECK(s.out_sd == doctest::Approx(oracle::pop_sd_of(ref.out_slants)).epsilon(1e-9));
            CHECK(s.out_quality_mean ==
                  doctest::Approx(oracle::mean_of(ref.out_qualities)).epsilon(1e-9));
        }
        if (!ref.in_slants.empty()) {
            CHECK(s.in_mean == doctest::Approx(oracle::mean_of(ref.in_slants)).epsilon(1e-9));
            CHECK(s.in_sd == doctest::Approx(oracle::pop_sd_of(ref.in_slants)).epsilon(1e-9));
        }
    }
}

TEST_CASE("in_count equals the sum of followee out_counts") {
    SynthConfig cfg;
    cfg.seed = 12;
    cfg.n_accounts = 120;
    auto pop = gen_population(cfg);
    auto ev = gen_events(pop);
    auto s = account_summaries(pop.graph, ev.news, {.clustering = false});
    for (NodeIndex v = 0; v < pop.graph.node_count(); ++v) {
        uint64_t want = 0;
        for (NodeIndex u : pop.graph.followees(v)) want += s[u].out_count;
        CHECK(s[v].in_count == want);
    }
}

TEST_CASE("a new post touches only the author and their followers") {
    auto g = graph_from({{1, 2}, {1, 3}, {4, 5}});
    std::vector<NewsTweet> tweets{nt(1, 0.2), nt(4, -0.7)};
    auto before = account_summaries(g, tweets, {.clustering = false});
    tweets.push_back(nt(1, 0.9));
    auto after = account_summaries(g, tweets, {.clustering = false});
    for (size_t i = 0; i < before.size(); ++i) {
        NodeId id = before[i].account_id;
        bool author = id == 1;
        bool follower_of_author = id == 2 || id == 3;
        if (author) {
            CHECK(after[i].out_count == before[i].out_count + 1);
        } else if (follower_of_author) {
            CHECK(after[i].in_count == before[i].in_count + 1);
        } else {
            CHECK(after[i].out_count == before[i].out_count);
            CHECK(after[i].in_count == before[i].in_count);
            CHECK(after[i].in_mean == before[i].in_mean);
        }
    }
}

TEST_CASE("crosstab: center account lands in the center bin") {
    auto g = graph_from({{1, 2}});
    std::vector<NewsTweet> tweets{nt(1, 0.0), nt(2, 0.0)};
    auto s = account_summaries(g, tweets, {.clustering = false});
    auto tab = crosstab(s);
    CHECK(tab.bins == 8);
    // account 2 has in from 1 and out of its own; account 1 has no incoming
    CHECK(tab.total == 1);
    size_t center = crosstab_bin(tab, 0.0);
    CHECK(tab.bin_label(center) == "(-0.25,0.25]");
    CHECK(tab.at(center, center) == 1);
}

TEST_CASE("crosstab: half-open boundary falls in the lower bin") {
    Crosstab tab;
    tab.lo = -1.75;
    tab.width = 0.5;
    tab.bins = 8;
    CHECK(tab.bin_label(crosstab_bin(tab, -0.25)) == "(-0.75,-0.25]");
    CHECK(tab.bin_label(crosstab_bin(tab, -0.2499999)) == "(-0.25,0.25]");
    CHECK(tab.bin_label(crosstab_bin(tab, 0.25)) == "(-0.25,0.25]");
}

TEST_CASE("crosstab totals equal accounts with both means") {
    SynthConfig cfg;
    cfg.seed = 13;
    cfg.n_accounts = 300;
    auto pop = gen_population(cfg);
    auto ev = gen_events(pop);
    auto s = account_summaries(pop.graph, ev.news, {.clustering = false});
    auto tab = crosstab(s);
    uint64_t both = 0;
    for (const auto& a : s)
        if (a.has_in() && a.has_out()) ++both;
    uint64_t cells = 0;
    for (uint64_t c : tab.counts) cells += c;
    CHECK(tab.total == both);
    CHECK(cells == both);
}

// --- conditional logit -----------------------------------------------------

TEST_CASE("logit: forced separation gives positive gamma with ridge") {
    std::vector<VisitRecord> visits;
    for (int i = 0; i < 50; ++i) {
        visits.push_back({i, 1, true});    // conservatives always site 1
        visits.push_back({100 + i, 0, false});  // liberals always site 0
    }
    LogitOptions opts;
    opts.ridge = 1e-3;
    auto fit = fit_slant_logit(visits, 2, opts);
    CHECK(fit.converged);
    CHECK(fit.gamma[1] > 0.0);
}

TEST_CASE("logit: symmetric visits give zero gamma") {
    std::vector<VisitRecord> visits;
    int64_t uid = 0;
    for (uint32_t site = 0; site < 3; ++site)
        for (int rep = 0; rep < 10 + static_cast<int>(site); ++rep) {
            visits.push_back({uid++, site, false});
            visits.push_back({uid++, site, true});  // identical counts per group
        }
    auto fit = fit_slant_logit(visits, 3);
    for (double gval : fit.gamma) CHECK(std::abs(gval) < 1e-7);
}

TEST_CASE("logit: analytic gradient matches central differences") {
    DetRng rng(99, 0);
    uint32_t n_sites = 5;
    std::vector<VisitRecord> visits;
    for (int i = 0; i < 500; ++i)
        visits.push_back({i, static_cast<uint32_t>(rng.below(n_sites)), rng.bernoulli(0.4)});
    auto counts = tally_visits(visits, n_sites);
    size_t p = 2 * (n_sites - 1);
    for (int point = 0; point < 20; ++point) {
        std::vector<double> theta(p);
        for (auto& t : theta) t = rng.normal() * 0.5;
        std::vector<double> grad(p);
        logit_gradient(counts, theta, 1e-3, grad);
        double h = 1e-5;
        double max_rel = 0.0;
        for (size_t k = 0; k < p; ++k) {
            auto tp = theta, tm = theta;
            tp[k] += h;
            tm[k] -= h;
            double fd = (logit_loglik(counts, tp, 1e-3) - logit_loglik(counts, tm, 1e-3)) /
                        (2 * h);
            double rel = std::abs(grad[k] - fd) / std::max(1.0, std::abs(grad[k]));
            max_rel = std::max(max_rel, rel);
        }
        CHECK(max_rel <= 1e-6);
    }
}

TEST_CASE("logit: parameters recovered within 3 SE from sampled visits") {
    std::vector<double> alpha{0.0, 0.3, -0.2, 0.8};
    std::vector<double> gamma{0.0, 0.6, -0.4, 0.1};
    auto visits = gen_visits(alpha, gamma, 30000, 0.5, 2024);
    auto fit = fit_slant_logit(visits, 4);
    CHECK(fit.converged);
    for (size_t j = 1; j < 4; ++j) {
        CHECK(std::abs(fit.alpha[j] - alpha[j]) <= 3 * fit.alpha_se[j]);
        CHECK(std::abs(fit.gamma[j] - gamma[j]) <= 3 * fit.gamma_se[j]);
    }
}

TEST_CASE("logit: non-convergence carries the last iterate") {
    std::vector<VisitRecord> visits;
    for (int i = 0; i < 50; ++i) {
        visits.push_back({i, 1, true});
        visits.push_back({100 + i, 0, false});
    }
    LogitOptions opts;
    opts.ridge = 0.0;  // separation: the MLE diverges
    opts.max_iter = 5;
    try {
        fit_slant_logit(visits, 2, opts);
        FAIL("expected LogitNonConvergence");
    } catch (const LogitNonConvergence& e) {
        CHECK(e.last.iterations == 5);
        CHECK(e.last.gamma[1] > 0.0);  // moving in the right direction
    }
}
