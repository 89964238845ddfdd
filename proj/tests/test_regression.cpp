#include <doctest.h>

#include <cmath>

#include "diversigraph/regression.hpp"
#include "diversigraph/rng.hpp"
#include "diversigraph/synth.hpp"
#include "oracles.hpp"

using namespace dvg;

namespace {

AccountSummary acct(NodeId id, double in_mean, double out_mean, uint64_t in_count = 5,
                    uint64_t out_count = 5) {
    AccountSummary s;
    s.account_id = id;
    s.in_mean = in_mean;
    s.out_mean = out_mean;
    s.in_count = in_count;
    s.out_count = out_count;
    s.in_quality_mean = 5 + 0.1 * static_cast<double>(id % 7);
    s.in_sd = 0.2 + 0.01 * static_cast<double>(id % 5);
    s.outdegree = static_cast<uint64_t>(id % 13);
    s.indegree = static_cast<uint64_t>(id % 11);
    s.clustering = 0.05 * static_cast<double>(id % 3);
    return s;
}

DesignMatrix simple_design(const std::vector<double>& x, const std::vector<double>& y) {
    DesignMatrix d;
    d.columns = {"(intercept)", "x"};
    d.n = x.size();
    d.p = 2;
    for (size_t i = 0; i < x.size(); ++i) {
        d.x.push_back(1.0);
        d.x.push_back(x[i]);
        d.y.push_back(y[i]);
    }
    return d;
}

}  // namespace

TEST_CASE("design_matrix: model I is intercept plus raw incoming slant") {
    std::vector<AccountSummary> s{acct(1, 0.1, 0.2), acct(2, -0.4, 0.0), acct(3, 0.9, 0.5)};
    auto d = design_matrix(s, builtin_model("I"));
    REQUIRE(d.p == 2);
    CHECK(d.columns[1] == "in_slant");
    for (size_t r = 0; r < d.n; ++r) {
        CHECK(d.at(r, 0) == 1.0);
        CHECK(d.at(r, 1) == s[r].in_mean);  // never centered or scaled
    }
}

TEST_CASE("design_matrix: only accounts with both sides included") {
    std::vector<AccountSummary> s{acct(1, 0.1, 0.2), acct(2, 0.0, 0.0, 0, 5),
                                  acct(3, 0.3, 0.1, 5, 0)};
    auto d = design_matrix(s, builtin_model("I"));
    CHECK(d.n == 1);
    CHECK(d.row_ids[0] == 1);
}

TEST_CASE("design_matrix: follower log ratio finite with zero followees") {
    auto s0 = acct(1, 0.1, 0.2, 5, 2);
    s0.outdegree = 5;
    s0.indegree = 0;  // no followees
    std::vector<AccountSummary> s{s0, acct(2, -0.2, 0.1, 4, 7), acct(3, 0.4, 0.2, 9, 3),
                                  acct(4, 0.6, 0.3, 2, 11)};
    auto d = design_matrix(s, builtin_model("A1"));
    for (double v : d.x) CHECK(std::isfinite(v));
}

TEST_CASE("design_matrix: model IV carries exactly the 15 non-intercept terms") {
    std::vector<AccountSummary> s;
    DetRng rng(5, 0);
    for (int i = 0; i < 50; ++i) {
        auto a = acct(i + 1, rng.normal(), rng.normal(), 1 + rng.below(20), 1 + rng.below(20));
        a.clustering = rng.uniform();
        s.push_back(a);
    }
    auto d = design_matrix(s, builtin_model("IV"));
    const std::vector<std::string> want{
        "(intercept)",
        "in_slant",
        "ln_in_count",
        "ln_out_count",
        "in_quality",
        "in_slant_sd",
        "ln_followers",
        "ln_follow_ratio",
        "clustering",
        "in_slant_x_ln_in_count",
        "in_slant_x_ln_out_count",
        "in_slant_x_in_quality",
        "in_slant_x_in_slant_sd",
        "in_slant_x_ln_followers",
        "in_slant_x_ln_follow_ratio",
        "in_slant_x_clustering",
    };
    CHECK(d.columns == want);
    CHECK(d.p - 1 == 15);
    // standardized columns have mean ~0 and unit population variance
    for (size_t c = 2; c <= 8; ++c) {
        double mean = 0, var = 0;
        for (size_t r = 0; r < d.n; ++r) mean += d.at(r, c);
        mean /= static_cast<double>(d.n);
        for (size_t r = 0; r < d.n; ++r) var += (d.at(r, c) - mean) * (d.at(r, c) - mean);
        var /= static_cast<double>(d.n);
        CHECK(mean == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(var == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("design_matrix: zero-variance column is named in the error") {
    std::vector<AccountSummary> s;
    DetRng rng(51, 0);
    for (int i = 0; i < 10; ++i) {
        auto a = acct(i + 1, 0.1 * i, 0.2 * i, 1 + rng.below(9), 1 + rng.below(9));
        a.outdegree = rng.below(40);
        a.indegree = rng.below(40);
        a.clustering = 0.5;  // constant
        s.push_back(a);
    }
    try {
        design_matrix(s, builtin_model("IV"));
        FAIL("expected zero-variance error");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("clustering") != std::string::npos);
    }
}

TEST_CASE("ols: exact line gives slope 2, zero SE, R^2 = 1") {
    std::vector<double> x{1, 2, 3, 4, 5}, y{2, 4, 6, 8, 10};
    auto fit = ols_fit(simple_design(x, y));
    CHECK(fit.coef[1] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(fit.se[1] <= 1e-12);
    CHECK(fit.r2 == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("ols: intercept-only returns the mean") {
    DesignMatrix d;
    d.columns = {"(intercept)"};
    d.p = 1;
    d.y = {1.0, 2.0, 6.0};
    d.x = {1.0, 1.0, 1.0};
    d.n = 3;
    auto fit = ols_fit(d);
    CHECK(fit.coef[0] == doctest::Approx(3.0));
}

TEST_CASE("ols matches the closed-form simple regression") {
    DetRng rng(17, 0);
    for (int rep = 0; rep < 200; ++rep) {
        size_t n = 10 + rng.below(100);
        std::vector<double> x(n), y(n);
        double slope = rng.normal(), icept = rng.normal();
        for (size_t i = 0; i < n; ++i) {
            x[i] = rng.normal() * (1 + rng.uniform());
            y[i] = icept + slope * x[i] + rng.normal() * 0.5;
        }
        auto fit = ols_fit(simple_design(x, y));
        auto ref = oracle::simple_regression(x, y);
        CHECK(std::abs(fit.coef[1] - ref.slope) <= 1e-10 * std::max(1.0, std::abs(ref.slope)));
        CHECK(std::abs(fit.se[1] - ref.slope_se) <= 1e-10 * std::max(1.0, ref.slope_se));
    }
}

TEST_CASE("ols: planted slope recovered within 3 SE") {
    DetRng rng(4242, 0);
    size_t n = 10000;
    std::vector<double> x(n), y(n);
    for (size_t i = 0; i < n; ++i) {
        x[i] = rng.normal();
        y[i] = 0.70 * x[i] + 0.3 * rng.normal();
    }
    auto fit = ols_fit(simple_design(x, y));
    CHECK(std::abs(fit.coef[1] - 0.70) <= 3 * fit.se[1]);
}

TEST_CASE("ols: rank deficiency lists the collinear columns") {
    DesignMatrix d;
    d.columns = {"(intercept)", "a", "a_copy"};
    d.p = 3;
    d.n = 6;
    DetRng rng(3, 3);
    for (size_t i = 0; i < d.n; ++i) {
        double v = rng.normal();
        d.x.push_back(1.0);
        d.x.push_back(v);
        d.x.push_back(2.0 * v);  // exactly collinear
        d.y.push_back(rng.normal());
    }
    try {
        ols_fit(d);
        FAIL("expected RankDeficient");
    } catch (const RankDeficient& e) {
        CHECK_FALSE(e.columns.empty());
    }
}

TEST_CASE("centering and scaling leave fitted values invariant") {
    DetRng rng(8, 0);
    size_t n = 200;
    std::vector<AccountSummary> s;
    for (size_t i = 0; i < n; ++i) {
        auto a = acct(static_cast<NodeId>(i) + 1, rng.normal(), rng.normal(), 1 + rng.below(30),
                      1 + rng.below(30));
        a.clustering = rng.uniform();
        a.in_sd = rng.uniform();
        a.in_quality_mean = 4 + rng.uniform();
        s.push_back(a);
    }
    // same covariates, standardized and raw: identical fitted values
    ModelSpec raw = builtin_model("II");
    ModelSpec scaled = raw;
    for (auto& t : raw.terms) t.standardize = false;
    auto d_raw = design_matrix(s, raw);
    auto d_scaled = design_matrix(s, scaled);
    auto f_raw = ols_fit(d_raw);
    auto f_scaled = ols_fit(d_scaled);
    for (size_t r = 0; r < d_raw.n; ++r) {
        double yr = 0, ys = 0;
        for (size_t c = 0; c < d_raw.p; ++c) {
            yr += f_raw.coef[c] * d_raw.at(r, c);
            ys += f_scaled.coef[c] * d_scaled.at(r, c);
        }
        CHECK(yr == doctest::Approx(ys).epsilon(1e-8));
    }
    CHECK(f_raw.r2 == doctest::Approx(f_scaled.r2).epsilon(1e-10));
}

TEST_CASE("core_sweep at s=t=0, all tweets, equals the global model-I fit exactly") {
    SynthConfig cfg;
    cfg.seed = 31;
    cfg.n_accounts = 400;
    cfg.core_fraction = 0.1;
    cfg.slope_core = 1.2;
    cfg.slope_periphery = 0.7;
    auto pop = gen_population(cfg);
    auto ev = gen_events(pop);
    auto summaries = account_summaries(pop.graph, ev.news, {.clustering = false});

    auto global = ols_fit(design_matrix(summaries, builtin_model("I")));
    std::vector<double> zero{0.0};
    auto cells = core_sweep(pop.graph, summaries, ev.news, zero, zero, SweepMode::all_tweets);
    REQUIRE(cells.size() == 1);
    CHECK(cells[0].slope == global.coef[1]);  // bit-identical path
    CHECK(cells[0].se == global.se[1]);
    CHECK(cells[0].n == global.n);
}

TEST_CASE("core_sweep marks tiny cells insufficient") {
    SynthConfig cfg;
    cfg.seed = 32;
    cfg.n_accounts = 30;
    cfg.tweet_rate_periphery = 1;
    auto pop = gen_population(cfg);
    auto ev = gen_events(pop);
    auto summaries = account_summaries(pop.graph, ev.news, {.clustering = false});
    std::vector<double> q{1.0};
    auto cells = core_sweep(pop.graph, summaries, ev.news, q, q, SweepMode::within_core);
    REQUIRE(cells.size() == 1);
    CHECK(cells[0].insufficient);
}

TEST_CASE("core_sweep: planted polarized core raises the within-core slope") {
    SynthConfig cfg;
    cfg.seed = 33;
    cfg.n_accounts = 4000;
    cfg.core_fraction = 0.1;
    cfg.slope_core = 1.2;
    cfg.slope_periphery = 0.7;
    cfg.homophily = 10.0;
    cfg.mean_followees = 15;
    auto pop = gen_population(cfg);
    auto ev = gen_events(pop);
    auto summaries = account_summaries(pop.graph, ev.news, {.clustering = false, .threads = 4});

    std::vector<double> s_grid{0.75, 0.95}, t_grid{0.75, 0.95};
    auto cells =
        core_sweep(pop.graph, summaries, ev.news, s_grid, t_grid, SweepMode::within_core, 2);
    REQUIRE(cells.size() == 4);
    double loose = cells[0].slope;   // (0.75, 0.75)
    double strict = cells[3].slope;  // (0.95, 0.95)
    CHECK(strict > loose);

    auto periph = core_sweep(pop.graph, summaries, ev.news, std::vector<double>{0.90},
                             std::vector<double>{0.90}, SweepMode::within_periphery);
    REQUIRE(periph.size() == 1);
    CHECK_FALSE(periph[0].insufficient);
    CHECK(strict > periph[0].slope);
    CHECK(std::abs(periph[0].slope - 0.7) < 0.08);
}
