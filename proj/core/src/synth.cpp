#include "diversigraph/synth.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "diversigraph/rng.hpp"
#include "diversigraph/util.hpp"

namespace dvg {

namespace {

// stream name spaces so every entity draws from an independent sequence
constexpr uint64_t kStreamAccount = 1ull << 48;
constexpr uint64_t kStreamFollow = 2ull << 48;
constexpr uint64_t kStreamEvents = 3ull << 48;
constexpr uint64_t kStreamBlocks = 4ull << 48;
constexpr uint64_t kStreamAudience = 5ull << 48;
constexpr uint64_t kStreamVisits = 6ull << 48;

double clamp(double v, double lo, double hi) { return v < lo ? lo : (v > hi ? hi : v); }

}  // namespace

SynthPopulation gen_population(const SynthConfig& cfg, int threads) {
    if (cfg.n_accounts == 0) throw std::invalid_argument("n_accounts must be positive");
    if (cfg.core_fraction < 0 || cfg.core_fraction > 1)
        throw std::invalid_argument("core_fraction outside [0,1]");
    size_t n = cfg.n_accounts;

    SynthPopulation pop;
    pop.cfg = cfg;
    pop.accounts.resize(n);
    parallel_for(n, threads, [&](size_t b, size_t e) {
        for (size_t i = b; i < e; ++i) {
            DetRng rng(cfg.seed, kStreamAccount + i);
            SynthAccount& a = pop.accounts[i];
            a.id = static_cast<NodeId>(i) + 1;
            a.coreness = rng.uniform();
            a.latent = clamp(rng.normal() * cfg.slant_sd, -cfg.slant_clamp, cfg.slant_clamp);
        }
    });
    // exactly round(f*n) planted core accounts: the top coreness draws
    size_t n_core = static_cast<size_t>(std::llround(cfg.core_fraction * static_cast<double>(n)));
    if (n_core > 0) {
        std::vector<double> cs(n);
        for (size_t i = 0; i < n; ++i) cs[i] = pop.accounts[i].coreness;
        std::nth_element(cs.begin(), cs.begin() + static_cast<long>(n - n_core), cs.end());
        double cut = cs[n - n_core];
        for (auto& a : pop.accounts) a.core = a.coreness >= cut;
    }
    for (auto& a : pop.accounts) {
        a.out_factor = a.core ? cfg.slope_core : cfg.slope_periphery;
        a.out_center = a.out_factor * a.latent;
    }

    // followee choices per account; arcs are (followee -> follower)
    std::vector<std::vector<NodeIndex>> followees(n);
    double boost_max = std::max(1.0, cfg.core_follow_boost);
    parallel_for(n, threads, [&](size_t b, size_t e) {
        for (size_t v = b; v < e; ++v) {
            DetRng rng(cfg.seed, kStreamFollow + v);
            const SynthAccount& av = pop.accounts[v];
            double mean = cfg.mean_followees * (av.core ? cfg.core_activity_boost : 1.0);
            uint64_t want = rng.poisson(mean);
            auto& mine = followees[v];
            for (uint64_t slot = 0; slot < want; ++slot) {
                for (int attempt = 0; attempt < 500; ++attempt) {
                    size_t u = static_cast<size_t>(rng.below(n));
                    if (u == v) continue;
                    const SynthAccount& au = pop.accounts[u];
                    double boost = au.core ? cfg.core_follow_boost : 1.0;
                    double accept = (boost / boost_max) *
                                    std::exp(-cfg.homophily * std::abs(au.out_center - av.latent));
                    if (rng.uniform() >= accept) continue;
                    if (std::find(mine.begin(), mine.end(), static_cast<NodeIndex>(u)) != mine.end())
                        continue;  // already following; try another candidate
                    mine.push_back(static_cast<NodeIndex>(u));
                    break;
                }
            }
        }
    });

    GraphBuilder builder;
    for (size_t i = 0; i < n; ++i) builder.add_node(static_cast<NodeId>(i) + 1);
    for (size_t v = 0; v < n; ++v)
        for (NodeIndex u : followees[v])
            builder.add_edge(static_cast<NodeId>(u) + 1, static_cast<NodeId>(v) + 1);
    pop.graph = builder.build();
    return pop;
}

SynthEvents gen_events(const SynthPopulation& pop, int threads) {
    const SynthConfig& cfg = pop.cfg;
    SynthEvents ev;

    size_t n_domains = std::max<size_t>(cfg.n_domains, 3);
    double factor_span = std::max({1.0, std::abs(cfg.slope_core), std::abs(cfg.slope_periphery)});
    double span = 1.3 * (factor_span * cfg.slant_clamp + 4.0 * cfg.post_noise_sd);
    double step = 2.0 * span / static_cast<double>(n_domains - 1);
    std::vector<double> grid(n_domains);
    for (size_t g = 0; g < n_domains; ++g) {
        grid[g] = -span + step * static_cast<double>(g);
        double quality = 6.0 - 0.8 * std::abs(grid[g]);
        ev.table.add("news" + std::to_string(g) + ".example", grid[g], quality,
                     "synthetic outlet " + std::to_string(g));
    }
    auto nearest_domain = [&](double slant) {
        double pos = (slant + span) / step;
        long g = std::lround(pos);
        if (g < 0) g = 0;
        if (g >= static_cast<long>(n_domains)) g = static_cast<long>(n_domains) - 1;
        return static_cast<uint32_t>(g);
    };

    size_t n = pop.accounts.size();
    std::vector<std::vector<TweetRecord>> records(n);
    std::vector<std::vector<NewsTweet>> news(n);
    parallel_for(n, threads, [&](size_t b, size_t e) {
        for (size_t i = b; i < e; ++i) {
            DetRng rng(cfg.seed, kStreamEvents + i);
            const SynthAccount& a = pop.accounts[i];
            double rate = a.core ? cfg.tweet_rate_core : cfg.tweet_rate_periphery;
            uint64_t posts = rng.poisson(rate);
            for (uint64_t k = 0; k < posts; ++k) {
                double slant = a.out_center + cfg.post_noise_sd * rng.normal();
                uint32_t domain = nearest_domain(slant);
                const auto& entry = ev.table.entry(domain);

                TweetRecord rec;
                rec.tweet_id = "t" + std::to_string(a.id) + "_" + std::to_string(k);
                rec.author_id = a.id;
                rec.timestamp = cfg.base_timestamp + static_cast<int64_t>(i) * 97 +
                                static_cast<int64_t>(k) * 13;
                rec.retweet = rng.bernoulli(cfg.retweet_rate);
                rec.urls.push_back("http://www." + entry.host + "/story/" + rec.tweet_id);
                records[i].push_back(rec);

                NewsTweet nt;
                nt.tweet_id = rec.tweet_id;
                nt.author_id = a.id;
                nt.timestamp = rec.timestamp;
                nt.domain_id = domain;
                nt.slant = entry.slant;
                nt.quality = entry.quality;
                nt.retweet = rec.retweet;
                news[i].push_back(nt);
            }
        }
    });
    for (size_t i = 0; i < n; ++i) {
        for (auto& r : records[i]) ev.records.push_back(std::move(r));
        for (auto& t : news[i]) ev.news.push_back(std::move(t));
    }
    return ev;
}

BlockGraph gen_blocks(size_t n, size_t k, double p_in, double p_out, uint64_t seed) {
    if (n == 0 || k == 0 || k > n) throw std::invalid_argument("bad block sizes");
    BlockGraph bg;
    bg.block_of.resize(n);
    size_t per = n / k;
    for (size_t i = 0; i < n; ++i)
        bg.block_of[i] = static_cast<int>(std::min(i / per, k - 1));

    GraphBuilder builder;
    for (size_t i = 0; i < n; ++i) builder.add_node(static_cast<NodeId>(i) + 1);
    for (size_t i = 0; i < n; ++i) {
        DetRng rng(seed, kStreamBlocks + i);
        for (size_t j = i + 1; j < n; ++j) {
            double p = bg.block_of[i] == bg.block_of[j] ? p_in : p_out;
            if (rng.uniform() < p) {
                builder.add_edge(static_cast<NodeId>(i) + 1, static_cast<NodeId>(j) + 1);
                builder.add_edge(static_cast<NodeId>(j) + 1, static_cast<NodeId>(i) + 1);
            }
        }
    }
    bg.graph = builder.build();
    return bg;
}

Audiences gen_audiences(const AudienceConfig& cfg, int threads) {
    size_t k = cfg.n_clusters;
    if (k == 0 || cfg.n_outlets == 0) throw std::invalid_argument("bad audience config");
    if (cfg.rate.size() != k)
        throw std::invalid_argument("rate matrix must be n_clusters x n_clusters");
    for (const auto& row : cfg.rate)
        if (row.size() != k) throw std::invalid_argument("rate matrix must be square");

    Audiences out;
    out.cluster_of.resize(cfg.n_outlets);
    for (size_t i = 0; i < cfg.n_outlets; ++i) out.cluster_of[i] = static_cast<int>(i % k);

    std::vector<std::vector<int64_t>> sets(cfg.n_outlets);
    parallel_for(cfg.n_outlets, threads, [&](size_t b, size_t e) {
        for (size_t i = b; i < e; ++i) {
            size_t c = static_cast<size_t>(out.cluster_of[i]);
            for (size_t d = 0; d < k; ++d) {
                double rate = cfg.rate[c][d];
                if (rate <= 0.0) continue;
                for (size_t u = 0; u < cfg.pool_size; ++u) {
                    int64_t uid = static_cast<int64_t>(d * cfg.pool_size + u) + 1;
                    DetRng rng(cfg.seed, kStreamAudience + i * 0x100000ull + static_cast<uint64_t>(uid));
                    if (rng.uniform() < rate) sets[i].push_back(uid);
                }
            }
        }
    });
    for (size_t i = 0; i < cfg.n_outlets; ++i)
        out.sets.add("outlet" + std::to_string(i), std::move(sets[i]));
    return out;
}

std::vector<VisitRecord> gen_visits(std::span<const double> alpha, std::span<const double> gamma,
                                    size_t n_visits, double frac_conservative, uint64_t seed) {
    if (alpha.size() != gamma.size() || alpha.size() < 2)
        throw std::invalid_argument("alpha and gamma must align, >= 2 sites");
    size_t j = alpha.size();
    std::array<std::vector<double>, 2> cdf;
    for (int grp = 0; grp < 2; ++grp) {
        double sign = grp == 1 ? 1.0 : -1.0;
        std::vector<double> w(j);
        double max_eta = -1e300;
        for (size_t s = 0; s < j; ++s) {
            w[s] = alpha[s] + sign * gamma[s];
            max_eta = std::max(max_eta, w[s]);
        }
        double sum = 0.0;
        for (size_t s = 0; s < j; ++s) {
            w[s] = std::exp(w[s] - max_eta);
            sum += w[s];
        }
        cdf[grp].resize(j);
        double acc = 0.0;
        for (size_t s = 0; s < j; ++s) {
            acc += w[s] / sum;
            cdf[grp][s] = acc;
        }
        cdf[grp][j - 1] = 1.0;
    }
    std::vector<VisitRecord> visits(n_visits);
    for (size_t v = 0; v < n_visits; ++v) {
        DetRng rng(seed, kStreamVisits + v);
        VisitRecord& rec = visits[v];
        rec.user_id = static_cast<int64_t>(v) + 1;
        rec.conservative = rng.uniform() < frac_conservative;
        double u = rng.uniform();
        const auto& c = cdf[rec.conservative ? 1 : 0];
        rec.site_id = static_cast<uint32_t>(
            std::lower_bound(c.begin(), c.end(), u) - c.begin());
        if (rec.site_id >= j) rec.site_id = static_cast<uint32_t>(j - 1);
    }
    return visits;
}

}  // namespace dvg
