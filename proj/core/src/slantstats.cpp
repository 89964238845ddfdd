#include "diversigraph/slantstats.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>

#include <Eigen/Dense>

#include "diversigraph/util.hpp"

namespace dvg {

namespace {

struct OutMoments {
    uint64_t count = 0;
    double sum = 0.0;
    double sumsq = 0.0;
    double qsum = 0.0;
    uint64_t retweets = 0;
};

std::vector<OutMoments> outgoing_moments(const FollowerGraph& g,
                                         std::span<const NewsTweet> tweets) {
    std::vector<OutMoments> out(g.node_count());
    for (const NewsTweet& t : tweets) {
        auto idx = g.index_of(t.author_id);
        if (!idx)
            throw std::invalid_argument("news tweet author not in graph: " +
                                        std::to_string(t.author_id));
        OutMoments& m = out[*idx];
        ++m.count;
        m.sum += t.slant;
        m.sumsq += t.slant * t.slant;
        m.qsum += t.quality;
        if (t.retweet) ++m.retweets;
    }
    return out;
}

double population_sd(uint64_t n, double sum, double sumsq) {
    if (n < 2) return 0.0;
    double mean = sum / static_cast<double>(n);
    double var = sumsq / static_cast<double>(n) - mean * mean;
    return var > 0.0 ? std::sqrt(var) : 0.0;
}

}  // namespace

std::vector<uint64_t> news_counts(const FollowerGraph& g, std::span<const NewsTweet> tweets) {
    std::vector<uint64_t> counts(g.node_count(), 0);
    for (const NewsTweet& t : tweets) {
        auto idx = g.index_of(t.author_id);
        if (!idx)
            throw std::invalid_argument("news tweet author not in graph: " +
                                        std::to_string(t.author_id));
        ++counts[*idx];
    }
    return counts;
}

std::vector<AccountSummary> account_summaries(const FollowerGraph& g,
                                              std::span<const NewsTweet> tweets,
                                              const SummaryOptions& opts) {
    auto out_m = outgoing_moments(g, tweets);
    std::vector<double> clustering;
    if (opts.clustering) clustering = clustering_coefficients(g, opts.threads);

    std::vector<AccountSummary> summaries(g.node_count());
    parallel_for(g.node_count(), opts.threads, [&](size_t b, size_t e) {
        for (size_t i = b; i < e; ++i) {
            NodeIndex v = static_cast<NodeIndex>(i);
            AccountSummary& s = summaries[i];
            s.account_id = g.id_of(v);
            const OutMoments& m = out_m[i];
            s.out_count = m.count;
            s.retweet_count = m.retweets;
            if (m.count > 0) {
                s.out_mean = m.sum / static_cast<double>(m.count);
                s.out_quality_mean = m.qsum / static_cast<double>(m.count);
                s.out_sd = population_sd(m.count, m.sum, m.sumsq);
            }
            uint64_t in_count = 0;
            double in_sum = 0.0, in_sumsq = 0.0, in_qsum = 0.0;
            for (NodeIndex u : g.followees(v)) {
                const OutMoments& fm = out_m[u];
                in_count += fm.count;
                in_sum += fm.sum;
                in_sumsq += fm.sumsq;
                in_qsum += fm.qsum;
            }
            s.in_count = in_count;
            if (in_count > 0) {
                s.in_mean = in_sum / static_cast<double>(in_count);
                s.in_quality_mean = in_qsum / static_cast<double>(in_count);
                s.in_sd = population_sd(in_count, in_sum, in_sumsq);
            }
            s.outdegree = g.outdegree(v);
            s.indegree = g.indegree(v);
            if (opts.clustering) s.clustering = clustering[i];
        }
    });
    return summaries;
}

size_t crosstab_bin(const Crosstab& tab, double value) {
    double offset = (value - tab.lo) / tab.width;
    double k = std::ceil(offset) - 1.0;
    if (k < 0.0) k = 0.0;
    if (k > static_cast<double>(tab.bins - 1)) k = static_cast<double>(tab.bins - 1);
    return static_cast<size_t>(k);
}

std::string Crosstab::bin_label(size_t bin) const {
    double a = lo + width * static_cast<double>(bin);
    double b = a + width;
    return "(" + format_double(a) + "," + format_double(b) + "]";
}

Crosstab crosstab(std::span<const AccountSummary> summaries, double bin_width,
                  double lo, double hi) {
    if (summaries.empty()) throw std::invalid_argument("crosstab of empty summary set");
    if (bin_width <= 0 || hi <= lo) throw std::invalid_argument("bad crosstab bins");
    Crosstab tab;
    tab.lo = lo;
    tab.width = bin_width;
    tab.bins = static_cast<size_t>(std::llround((hi - lo) / bin_width));
    tab.counts.assign(tab.bins * tab.bins, 0);
    for (const AccountSummary& s : summaries) {
        if (!s.has_in() || !s.has_out()) continue;
        size_t row = crosstab_bin(tab, s.out_mean);
        size_t col = crosstab_bin(tab, s.in_mean);
        ++tab.counts[row * tab.bins + col];
        ++tab.total;
    }
    return tab;
}

// --- conditional logit -----------------------------------------------------

VisitCounts tally_visits(std::span<const VisitRecord> visits, uint32_t n_sites) {
    VisitCounts c;
    c.n_sites = n_sites;
    c.by_site[0].assign(n_sites, 0.0);
    c.by_site[1].assign(n_sites, 0.0);
    for (const VisitRecord& v : visits) {
        if (v.site_id >= n_sites)
            throw std::out_of_range("visit site_id beyond n_sites");
        int grp = v.conservative ? 1 : 0;
        c.by_site[grp][v.site_id] += 1.0;
        c.total[grp] += 1.0;
    }
    return c;
}

namespace {

// eta_j = alpha_j + s gamma_j with the reference site pinned at 0.
void group_probs(const VisitCounts& counts, std::span<const double> theta, int grp,
                 std::vector<double>& probs, double& lse) {
    uint32_t n = counts.n_sites;
    double sign = grp == 1 ? 1.0 : -1.0;
    probs.resize(n);
    double max_eta = 0.0;  // eta_0 = 0
    for (uint32_t j = 1; j < n; ++j) {
        double eta = theta[j - 1] + sign * theta[n - 1 + j - 1];
        probs[j] = eta;
        if (eta > max_eta) max_eta = eta;
    }
    probs[0] = 0.0;
    double sum = 0.0;
    for (uint32_t j = 0; j < n; ++j) {
        probs[j] = std::exp(probs[j] - max_eta);
        sum += probs[j];
    }
    for (uint32_t j = 0; j < n; ++j) probs[j] /= sum;
    lse = max_eta + std::log(sum);
}

}  // namespace

double logit_loglik(const VisitCounts& counts, std::span<const double> theta, double ridge) {
    uint32_t n = counts.n_sites;
    if (theta.size() != 2 * (n - 1)) throw std::invalid_argument("theta size mismatch");
    double ll = 0.0;
    std::vector<double> probs;
    for (int grp = 0; grp < 2; ++grp) {
        if (counts.total[grp] == 0.0) continue;
        double sign = grp == 1 ? 1.0 : -1.0;
        double lse = 0.0;
        group_probs(counts, theta, grp, probs, lse);
        for (uint32_t j = 1; j < n; ++j) {
            double eta = theta[j - 1] + sign * theta[n - 1 + j - 1];
            ll += counts.by_site[grp][j] * eta;
        }
        ll -= counts.total[grp] * lse;
    }
    if (ridge > 0.0)
        for (double t : theta) ll -= 0.5 * ridge * t * t;
    return ll;
}

void logit_gradient(const VisitCounts& counts, std::span<const double> theta,
                    double ridge, std::span<double> grad_out) {
    uint32_t n = counts.n_sites;
    if (theta.size() != 2 * (n - 1) || grad_out.size() != theta.size())
        throw std::invalid_argument("theta/grad size mismatch");
    std::fill(grad_out.begin(), grad_out.end(), 0.0);
    std::vector<double> probs;
    for (int grp = 0; grp < 2; ++grp) {
        if (counts.total[grp] == 0.0) continue;
        double sign = grp == 1 ? 1.0 : -1.0;
        double lse = 0.0;
        group_probs(counts, theta, grp, probs, lse);
        for (uint32_t j = 1; j < n; ++j) {
            double resid = counts.by_site[grp][j] - counts.total[grp] * probs[j];
            grad_out[j - 1] += resid;
            grad_out[n - 1 + j - 1] += sign * resid;
        }
    }
    if (ridge > 0.0)
        for (size_t k = 0; k < theta.size(); ++k) grad_out[k] -= ridge * theta[k];
}

LogitFit fit_slant_logit(std::span<const VisitRecord> visits, uint32_t n_sites,
                         const LogitOptions& opts) {
    if (n_sites < 2) throw std::invalid_argument("need at least two sites");
    VisitCounts counts = tally_visits(visits, n_sites);
    size_t p = 2 * (static_cast<size_t>(n_sites) - 1);

    Eigen::VectorXd theta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p));
    std::vector<double> probs;
    auto ll_at = [&](const Eigen::VectorXd& t) {
        return logit_loglik(counts, {t.data(), p}, opts.ridge);
    };

    double ll = ll_at(theta);
    Eigen::VectorXd grad(p);
    int iter = 0;
    bool converged = false;
    for (; iter < opts.max_iter; ++iter) {
        logit_gradient(counts, {theta.data(), p}, opts.ridge, {grad.data(), p});
        if (grad.lpNorm<Eigen::Infinity>() < opts.grad_tol) {
            converged = true;
            break;
        }
        // Negative Hessian of the log likelihood: blocks [[A, B], [B, A]]
        // with A = sum_g N_g (diag(p) - p p^T) over non-reference sites and
        // B the sign-weighted version.
        size_t m = n_sites - 1;
        Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m, m), B = Eigen::MatrixXd::Zero(m, m);
        for (int grp = 0; grp < 2; ++grp) {
            if (counts.total[grp] == 0.0) continue;
            double sign = grp == 1 ? 1.0 : -1.0;
            double lse = 0.0;
            group_probs(counts, {theta.data(), p}, grp, probs, lse);
            for (size_t j = 0; j < m; ++j) {
                for (size_t k = 0; k < m; ++k) {
                    double h = counts.total[grp] *
                               ((j == k ? probs[j + 1] : 0.0) - probs[j + 1] * probs[k + 1]);
                    A(j, k) += h;
                    B(j, k) += sign * h;
                }
            }
        }
        Eigen::MatrixXd H(p, p);
        H.topLeftCorner(m, m) = A;
        H.bottomRightCorner(m, m) = A;
        H.topRightCorner(m, m) = B;
        H.bottomLeftCorner(m, m) = B;
        for (size_t k = 0; k < p; ++k) H(k, k) += opts.ridge;

        double damping = 0.0;
        bool stepped = false;
        for (int attempt = 0; attempt < 8 && !stepped; ++attempt) {
            Eigen::MatrixXd Hd = H;
            if (damping > 0.0)
                for (size_t k = 0; k < p; ++k) Hd(k, k) += damping;
            Eigen::LDLT<Eigen::MatrixXd> ldlt(Hd);
            if (ldlt.info() != Eigen::Success) {
                damping = damping == 0.0 ? 1e-8 : damping * 100.0;
                continue;
            }
            Eigen::VectorXd dir = ldlt.solve(grad);
            double step = 1.0;
            for (int half = 0; half < 40; ++half) {
                Eigen::VectorXd cand = theta + step * dir;
                double cand_ll = ll_at(cand);
                if (cand_ll > ll - 1e-14 * std::abs(ll)) {
                    theta = cand;
                    ll = cand_ll;
                    stepped = true;
                    break;
                }
                step *= 0.5;
            }
            if (!stepped) damping = damping == 0.0 ? 1e-8 : damping * 100.0;
        }
        if (!stepped) break;  // no progress possible; report non-convergence below
    }

    LogitFit fit;
    fit.alpha.assign(n_sites, 0.0);
    fit.gamma.assign(n_sites, 0.0);
    fit.alpha_se.assign(n_sites, 0.0);
    fit.gamma_se.assign(n_sites, 0.0);
    size_t m = n_sites - 1;
    for (size_t j = 0; j < m; ++j) {
        fit.alpha[j + 1] = theta[static_cast<Eigen::Index>(j)];
        fit.gamma[j + 1] = theta[static_cast<Eigen::Index>(m + j)];
    }
    fit.loglik = ll;
    fit.iterations = iter;
    fit.converged = converged;

    // observed-information standard errors at the final iterate
    {
        Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m, m), B = Eigen::MatrixXd::Zero(m, m);
        for (int grp = 0; grp < 2; ++grp) {
            if (counts.total[grp] == 0.0) continue;
            double sign = grp == 1 ? 1.0 : -1.0;
            double lse = 0.0;
            group_probs(counts, {theta.data(), p}, grp, probs, lse);
            for (size_t j = 0; j < m; ++j)
                for (size_t k = 0; k < m; ++k) {
                    double h = counts.total[grp] *
                               ((j == k ? probs[j + 1] : 0.0) - probs[j + 1] * probs[k + 1]);
                    A(j, k) += h;
                    B(j, k) += sign * h;
                }
        }
        Eigen::MatrixXd H(p, p);
        H.topLeftCorner(m, m) = A;
        H.bottomRightCorner(m, m) = A;
        H.topRightCorner(m, m) = B;
        H.bottomLeftCorner(m, m) = B;
        for (size_t k = 0; k < p; ++k) H(k, k) += opts.ridge;
        Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
        if (ldlt.info() == Eigen::Success) {
            Eigen::MatrixXd cov = ldlt.solve(Eigen::MatrixXd::Identity(p, p));
            for (size_t j = 0; j < m; ++j) {
                double va = cov(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j));
                double vg = cov(static_cast<Eigen::Index>(m + j), static_cast<Eigen::Index>(m + j));
                fit.alpha_se[j + 1] = va > 0 ? std::sqrt(va) : 0.0;
                fit.gamma_se[j + 1] = vg > 0 ? std::sqrt(vg) : 0.0;
            }
        }
    }

    if (!converged)
        throw LogitNonConvergence("slant logit did not converge in " +
                                      std::to_string(opts.max_iter) + " iterations",
                                  std::move(fit));
    return fit;
}

std::vector<VisitRecord> load_visits_csv(const std::string& path, uint32_t& n_sites_out) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open visits file: " + path);
    std::vector<VisitRecord> visits;
    std::string line;
    size_t lineno = 0;
    uint32_t max_site = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        if (lineno == 1 && line.find("user_id") != std::string::npos) continue;
        VisitRecord v;
        int cons = 0;
        const char* b = line.data();
        const char* e = line.data() + line.size();
        auto r1 = std::from_chars(b, e, v.user_id);
        if (r1.ec != std::errc() || r1.ptr == e || *r1.ptr != ',')
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": bad visits row");
        auto r2 = std::from_chars(r1.ptr + 1, e, v.site_id);
        if (r2.ec != std::errc() || r2.ptr == e || *r2.ptr != ',')
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": bad visits row");
        auto r3 = std::from_chars(r2.ptr + 1, e, cons);
        if (r3.ec != std::errc())
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": bad visits row");
        v.conservative = cons != 0;
        max_site = std::max(max_site, v.site_id);
        visits.push_back(v);
    }
    n_sites_out = visits.empty() ? 0 : max_site + 1;
    return visits;
}

}  // namespace dvg
