#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "diversigraph/graph.hpp"
#include "diversigraph/ingest.hpp"
#include "diversigraph/slantstats.hpp"

namespace dvg {

/// One covariate: a raw extractor plus its treatment. Standardized terms are
/// centered to mean 0 and scaled to unit (population) variance; the slant
/// main effects are never standardized. Interaction terms multiply the
/// (possibly standardized) covariate with raw incoming slant and are formed
/// after that standardization.
struct Term {
    std::string name;
    double (*value)(const AccountSummary&) = nullptr;
    bool standardize = true;
    bool interact = false;
};

struct ModelSpec {
    std::string name;
    std::string dv_name = "out_mean";
    std::vector<Term> terms;
};

/// Builtin specifications: "I".."IV" are the incremental interaction models
/// over incoming slant, counts, quality, slant diversity, follower terms and
/// clustering; "A1" is the reduced co-following robustness form.
ModelSpec builtin_model(const std::string& name);

struct DesignMatrix {
    std::vector<std::string> columns;  // "(intercept)" first
    std::vector<double> x;             // row-major n x p
    std::vector<double> y;
    std::vector<NodeId> row_ids;
    size_t n = 0, p = 0;

    double at(size_t i, size_t j) const { return x[i * p + j]; }
};

/// Rows are the accounts with both in_count >= 1 and out_count >= 1, in
/// summary order. Throws on zero-variance standardized columns, naming the
/// column.
DesignMatrix design_matrix(std::span<const AccountSummary> summaries, const ModelSpec& spec);

class RankDeficient : public std::runtime_error {
public:
    RankDeficient(std::string msg, std::vector<std::string> cols)
        : std::runtime_error(std::move(msg)), columns(std::move(cols)) {}
    std::vector<std::string> columns;  // columns implicated in the collinearity
};

struct RegressionFit {
    std::vector<std::string> columns;
    std::vector<double> coef;
    std::vector<double> se;   // classical, from sigma^2 (X'X)^-1
    size_t n = 0, p = 0;
    double rss = 0.0, sigma2 = 0.0;
    double r2 = 0.0, adj_r2 = 0.0;
};

/// Least squares via column-pivoted QR; throws RankDeficient below full
/// column rank (relative tolerance 1e-10).
RegressionFit ols_fit(const DesignMatrix& design);

enum class SweepMode { within_core, all_tweets, within_periphery };

struct SweepCell {
    double s = 0.0, t = 0.0;
    double slope = 0.0, se = 0.0, ci_lo = 0.0, ci_hi = 0.0;
    size_t n = 0;
    bool insufficient = false;     // fewer than 10 usable accounts
    bool ci_excludes_one = false;  // the tables' asterisk rule
};

/// Slope of outgoing on incoming mean slant for each (s, t) core definition.
/// within_core recomputes incoming summaries from core followees only;
/// within_periphery complements the core and recomputes from periphery
/// followees; all_tweets uses the global incoming summaries. Cells are
/// row-major over s_grid x t_grid.
std::vector<SweepCell> core_sweep(const FollowerGraph& g,
                                  std::span<const AccountSummary> summaries,
                                  std::span<const NewsTweet> tweets,
                                  std::span<const double> s_grid,
                                  std::span<const double> t_grid,
                                  SweepMode mode, int threads = 1);

}  // namespace dvg
