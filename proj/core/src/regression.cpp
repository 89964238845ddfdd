#include "diversigraph/regression.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "diversigraph/util.hpp"

namespace dvg {

namespace {

double v_in_slant(const AccountSummary& s) { return s.in_mean; }
double v_ln_in_count(const AccountSummary& s) { return std::log(static_cast<double>(s.in_count)); }
double v_ln_out_count(const AccountSummary& s) { return std::log(static_cast<double>(s.out_count)); }
double v_in_quality(const AccountSummary& s) { return s.in_quality_mean; }
double v_in_sd(const AccountSummary& s) { return s.in_sd; }
double v_ln_followers(const AccountSummary& s) {
    return std::log(static_cast<double>(s.outdegree) + 2.0);
}
// +2 in both logs keeps the ratio finite for accounts with no followees.
double v_ln_follow_ratio(const AccountSummary& s) {
    return std::log(static_cast<double>(s.outdegree) + 2.0) /
           std::log(static_cast<double>(s.indegree) + 2.0);
}
double v_clustering(const AccountSummary& s) { return s.clustering; }

}  // namespace

ModelSpec builtin_model(const std::string& name) {
    ModelSpec spec;
    spec.name = name;
    spec.terms.push_back({"in_slant", &v_in_slant, false, false});
    if (name == "I") return spec;
    if (name == "A1") {
        spec.terms.push_back({"ln_out_count", &v_ln_out_count, true, true});
        spec.terms.push_back({"ln_followers", &v_ln_followers, true, true});
        spec.terms.push_back({"ln_follow_ratio", &v_ln_follow_ratio, true, true});
        return spec;
    }
    if (name == "II" || name == "III" || name == "IV") {
        spec.terms.push_back({"ln_in_count", &v_ln_in_count, true, true});
        spec.terms.push_back({"ln_out_count", &v_ln_out_count, true, true});
        spec.terms.push_back({"in_quality", &v_in_quality, true, true});
        spec.terms.push_back({"in_slant_sd", &v_in_sd, true, true});
        if (name == "II") return spec;
        spec.terms.push_back({"ln_followers", &v_ln_followers, true, true});
        spec.terms.push_back({"ln_follow_ratio", &v_ln_follow_ratio, true, true});
        if (name == "III") return spec;
        spec.terms.push_back({"clustering", &v_clustering, true, true});
        return spec;
    }
    throw std::invalid_argument("unknown model: " + name);
}

DesignMatrix design_matrix(std::span<const AccountSummary> summaries, const ModelSpec& spec) {
    DesignMatrix d;
    std::vector<size_t> rows;
    for (size_t i = 0; i < summaries.size(); ++i)
        if (summaries[i].has_in() && summaries[i].has_out()) rows.push_back(i);
    d.n = rows.size();

    size_t n_terms = spec.terms.size();
    size_t n_inter = 0;
    for (const Term& t : spec.terms)
        if (t.interact) ++n_inter;
    d.p = 1 + n_terms + n_inter;

    d.columns.push_back("(intercept)");
    for (const Term& t : spec.terms) d.columns.push_back(t.name);
    for (const Term& t : spec.terms)
        if (t.interact) d.columns.push_back("in_slant_x_" + t.name);

    // raw values, column-major scratch
    std::vector<std::vector<double>> raw(n_terms);
    for (size_t k = 0; k < n_terms; ++k) {
        raw[k].resize(d.n);
        for (size_t r = 0; r < d.n; ++r) raw[k][r] = spec.terms[k].value(summaries[rows[r]]);
    }
    // standardize in place where requested (transforms were already applied)
    for (size_t k = 0; k < n_terms; ++k) {
        if (!spec.terms[k].standardize) continue;
        MeanSd ms = mean_sd(raw[k]);
        if (!(ms.sd > 0.0))
            throw std::invalid_argument("zero-variance column: " + spec.terms[k].name);
        for (double& v : raw[k]) v = (v - ms.mean) / ms.sd;
    }

    std::vector<double> in_slant(d.n);
    for (size_t r = 0; r < d.n; ++r) in_slant[r] = summaries[rows[r]].in_mean;

    d.x.resize(d.n * d.p);
    d.y.resize(d.n);
    d.row_ids.resize(d.n);
    for (size_t r = 0; r < d.n; ++r) {
        const AccountSummary& s = summaries[rows[r]];
        d.row_ids[r] = s.account_id;
        d.y[r] = s.out_mean;
        double* xr = d.x.data() + r * d.p;
        xr[0] = 1.0;
        size_t c = 1;
        for (size_t k = 0; k < n_terms; ++k) xr[c++] = raw[k][r];
        for (size_t k = 0; k < n_terms; ++k)
            if (spec.terms[k].interact) xr[c++] = in_slant[r] * raw[k][r];
    }
    return d;
}

RegressionFit ols_fit(const DesignMatrix& design) {
    size_t n = design.n, p = design.p;
    if (n <= p) throw std::invalid_argument("ols needs n > p");
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
        X(design.x.data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
    Eigen::Map<const Eigen::VectorXd> y(design.y.data(), static_cast<Eigen::Index>(n));

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    qr.setThreshold(1e-10);
    if (static_cast<size_t>(qr.rank()) < p) {
        // pivot order puts dependent columns last
        std::vector<std::string> bad;
        const auto& perm = qr.colsPermutation().indices();
        for (Eigen::Index k = qr.rank(); k < static_cast<Eigen::Index>(p); ++k)
            bad.push_back(design.columns[static_cast<size_t>(perm[k])]);
        std::string msg = "design matrix is rank deficient; collinear columns:";
        for (const auto& c : bad) msg += " " + c;
        throw RankDeficient(std::move(msg), std::move(bad));
    }

    Eigen::VectorXd beta = qr.solve(y);
    Eigen::VectorXd resid = y - X * beta;
    double rss = resid.squaredNorm();
    double sigma2 = rss / static_cast<double>(n - p);

    // (X'X)^-1 from the R factor of the pivoted decomposition
    Eigen::MatrixXd R = qr.matrixR()
                            .topLeftCorner(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p))
                            .triangularView<Eigen::Upper>();
    Eigen::MatrixXd Rinv = R.triangularView<Eigen::Upper>().solve(
        Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p)));
    Eigen::MatrixXd xtx_inv_perm = Rinv * Rinv.transpose();
    Eigen::MatrixXd P = qr.colsPermutation();
    Eigen::MatrixXd xtx_inv = P * xtx_inv_perm * P.transpose();

    RegressionFit fit;
    fit.columns = design.columns;
    fit.n = n;
    fit.p = p;
    fit.rss = rss;
    fit.sigma2 = sigma2;
    fit.coef.resize(p);
    fit.se.resize(p);
    for (size_t j = 0; j < p; ++j) {
        fit.coef[j] = beta[static_cast<Eigen::Index>(j)];
        double v = sigma2 * xtx_inv(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j));
        fit.se[j] = v > 0.0 ? std::sqrt(v) : 0.0;
    }
    double ymean = y.mean();
    double tss = (y.array() - ymean).square().sum();
    fit.r2 = tss > 0.0 ? 1.0 - rss / tss : (rss > 0.0 ? 0.0 : 1.0);
    fit.adj_r2 = 1.0 - (1.0 - fit.r2) * static_cast<double>(n - 1) / static_cast<double>(n - p);
    return fit;
}

namespace {

struct Moments {
    uint64_t count = 0;
    double sum = 0.0;
};

}  // namespace

std::vector<SweepCell> core_sweep(const FollowerGraph& g,
                                  std::span<const AccountSummary> summaries,
                                  std::span<const NewsTweet> tweets,
                                  std::span<const double> s_grid,
                                  std::span<const double> t_grid,
                                  SweepMode mode, int threads) {
    if (summaries.size() != g.node_count())
        throw std::invalid_argument("summaries must align with graph nodes");
    auto counts = news_counts(g, tweets);

    // outgoing slant sums per node, accumulated in tweet order exactly as in
    // account_summaries so recomputed means are bit-identical
    std::vector<Moments> out_m(g.node_count());
    for (const NewsTweet& t : tweets) {
        auto idx = g.index_of(t.author_id);
        Moments& m = out_m[*idx];
        ++m.count;
        m.sum += t.slant;
    }

    size_t n_cells = s_grid.size() * t_grid.size();
    std::vector<SweepCell> cells(n_cells);

    parallel_for(n_cells, threads, [&](size_t cb, size_t ce) {
        std::vector<uint8_t> member(g.node_count());
        for (size_t c = cb; c < ce; ++c) {
            size_t si = c / t_grid.size(), ti = c % t_grid.size();
            SweepCell& cell = cells[c];
            cell.s = s_grid[si];
            cell.t = t_grid[ti];

            CoreSpec core = induce_core(g, counts, cell.s, cell.t);
            std::fill(member.begin(), member.end(), 0);
            for (NodeIndex v : core.members) member[v] = 1;

            std::vector<NodeIndex> population;
            bool restrict_incoming = false;
            switch (mode) {
                case SweepMode::all_tweets:
                case SweepMode::within_core:
                    population = core.members;
                    restrict_incoming = mode == SweepMode::within_core;
                    break;
                case SweepMode::within_periphery:
                    for (NodeIndex v = 0; v < g.node_count(); ++v)
                        if (!member[v]) population.push_back(v);
                    // flip the membership mask so "inside" means periphery
                    for (NodeIndex v = 0; v < g.node_count(); ++v) member[v] ^= 1;
                    restrict_incoming = true;
                    break;
            }

            DesignMatrix d;
            d.columns = {"(intercept)", "in_slant"};
            d.p = 2;
            for (NodeIndex v : population) {
                const AccountSummary& s = summaries[v];
                if (!s.has_out()) continue;
                double in_mean;
                if (restrict_incoming) {
                    uint64_t cnt = 0;
                    double sum = 0.0;
                    for (NodeIndex u : g.followees(v)) {
                        if (!member[u]) continue;
                        cnt += out_m[u].count;
                        sum += out_m[u].sum;
                    }
                    if (cnt == 0) continue;
                    in_mean = sum / static_cast<double>(cnt);
                } else {
                    if (!s.has_in()) continue;
                    in_mean = s.in_mean;
                }
                d.x.push_back(1.0);
                d.x.push_back(in_mean);
                d.y.push_back(s.out_mean);
                d.row_ids.push_back(s.account_id);
            }
            d.n = d.y.size();
            cell.n = d.n;
            if (d.n < 10) {
                cell.insufficient = true;
                continue;
            }
            try {
                RegressionFit fit = ols_fit(d);
                cell.slope = fit.coef[1];
                cell.se = fit.se[1];
                cell.ci_lo = cell.slope - 1.96 * cell.se;
                cell.ci_hi = cell.slope + 1.96 * cell.se;
                cell.ci_excludes_one = cell.ci_lo > 1.0 || cell.ci_hi < 1.0;
            } catch (const std::exception&) {
                cell.insufficient = true;  // degenerate cell (e.g. constant x)
            }
        }
    }, 1);
    return cells;
}

}  // namespace dvg
