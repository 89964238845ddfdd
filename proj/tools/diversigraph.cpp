// diversigraph: follower-network information-diversity toolkit.
//
// Subcommands cover the full pipeline: ingest link-sharing events, build
// per-account slant summaries, fit interaction models, sweep core
// definitions, score node orderings against the diagonal-gradient model,
// run community-based orderings, estimate co-following slant scores, and
// generate seeded synthetic corpora with planted ground truth.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>

#include <CLI11.hpp>
#include <json.hpp>

#include "diversigraph/affinity.hpp"
#include "diversigraph/community.hpp"
#include "diversigraph/graph.hpp"
#include "diversigraph/ingest.hpp"
#include "diversigraph/permscore.hpp"
#include "diversigraph/regression.hpp"
#include "diversigraph/report.hpp"
#include "diversigraph/rng.hpp"
#include "diversigraph/slantstats.hpp"
#include "diversigraph/synth.hpp"
#include "diversigraph/util.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

struct CommonOpts {
    std::string events;
    std::string edges;
    std::string slant_table;
    std::string resolver_cache;
    std::string graph_cache;
    std::string miss_policy = "passthrough";
    double max_age_days = 0.0;  // 0 disables the window filter
    int64_t as_of = -1;         // default: newest event timestamp
    int threads = 1;
};

void add_common(CLI::App* sub, CommonOpts& o, bool need_events = true) {
    sub->add_option("--events", o.events, "events.jsonl path")->required(need_events);
    sub->add_option("--edges", o.edges, "edges.tsv path")->required(need_events);
    sub->add_option("--slant-table", o.slant_table, "slant_table.csv path")
        ->required(need_events);
    sub->add_option("--resolver-cache", o.resolver_cache, "resolver_cache.tsv path");
    sub->add_option("--graph-cache", o.graph_cache,
                    "binary graph cache; loaded when present, else written after building");
    sub->add_option("--resolver-miss", o.miss_policy, "cache miss policy")
        ->check(CLI::IsMember({"fail", "drop", "passthrough"}));
    sub->add_option("--max-age-days", o.max_age_days,
                    "drop events older than this many days (0 = keep everything)");
    sub->add_option("--as-of", o.as_of, "reference timestamp for the age filter");
    sub->add_option("--threads", o.threads, "parallelism cap; never changes results")
        ->check(CLI::Range(1, 256));
}

struct Corpus {
    std::vector<dvg::TweetRecord> records;
    std::vector<dvg::NewsTweet> news;
    dvg::FollowerGraph graph;
    dvg::SlantTable table;
    dvg::ParseCounters parse_counters;
    dvg::ProcessCounters process_counters;
    dvg::EdgeCounters edge_counters;
};

Corpus load_corpus(const CommonOpts& o, dvg::RunManifest& manifest) {
    Corpus c;
    c.records = dvg::parse_events_file(o.events, c.parse_counters);
    manifest.add_input(o.events);
    if (o.max_age_days > 0.0) {
        int64_t as_of = o.as_of;
        if (as_of < 0) {
            as_of = 0;
            for (const auto& r : c.records) as_of = std::max(as_of, r.timestamp);
        }
        c.records = dvg::filter_by_age(c.records, as_of, o.max_age_days);
    }

    c.table = dvg::SlantTable::load_csv(o.slant_table);
    manifest.add_input(o.slant_table);

    dvg::ResolverCache resolver;
    if (!o.resolver_cache.empty()) {
        auto policy = dvg::ResolverCache::MissPolicy::passthrough;
        if (o.miss_policy == "fail") policy = dvg::ResolverCache::MissPolicy::fail;
        if (o.miss_policy == "drop") policy = dvg::ResolverCache::MissPolicy::drop;
        resolver = dvg::ResolverCache::load_tsv(o.resolver_cache, policy);
        manifest.add_input(o.resolver_cache);
    }
    c.news = dvg::process_urls(c.records, resolver, c.table, c.process_counters, o.threads);

    if (!o.graph_cache.empty() && fs::exists(o.graph_cache)) {
        c.graph = dvg::load_graph_cache(o.graph_cache);
        manifest.add_input(o.graph_cache);
    } else {
        std::vector<dvg::NodeId> authors;
        for (const auto& r : c.records) authors.push_back(r.author_id);
        std::ifstream in(o.edges);
        if (!in) throw std::runtime_error("cannot open edges file: " + o.edges);
        c.graph = dvg::load_edges(in, authors, c.edge_counters);
        manifest.add_input(o.edges);
        if (!o.graph_cache.empty()) dvg::save_graph_cache(c.graph, o.graph_cache);
    }
    return c;
}

ordered_json counters_json(const Corpus& c) {
    ordered_json j;
    j["events"] = {{"lines", c.parse_counters.lines},
                   {"parsed", c.parse_counters.parsed},
                   {"malformed", c.parse_counters.malformed}};
    j["urls"] = {{"seen", c.process_counters.urls},
                 {"matched", c.process_counters.matched},
                 {"unmatched", c.process_counters.unmatched},
                 {"cycles", c.process_counters.cycles},
                 {"miss_drops", c.process_counters.miss_drops}};
    j["edges"] = {{"lines", c.edge_counters.lines},
                  {"unique", c.edge_counters.edges},
                  {"duplicates", c.edge_counters.duplicates},
                  {"self_loops", c.edge_counters.self_loops},
                  {"bad_lines", c.edge_counters.bad_lines}};
    return j;
}

// Records every option of the subcommand into the manifest, resolved to its
// final value, so a run can be replayed from the manifest alone.
void record_config(const CLI::App* sub, dvg::RunManifest& manifest) {
    manifest.subcommand = sub->get_name();
    for (const CLI::Option* opt : sub->get_options()) {
        std::string name = opt->get_name();
        if (name.empty() || name == "--help" || name == "--config") continue;
        std::string value;
        if (opt->count() > 0) {
            const auto& rs = opt->results();
            for (size_t i = 0; i < rs.size(); ++i) value += (i ? "," : "") + rs[i];
        } else {
            value = opt->get_default_str();
        }
        manifest.config.emplace_back(name, value);
    }
}

void finish_manifest(dvg::RunManifest& manifest, const std::string& out_path,
                     std::chrono::steady_clock::time_point t0) {
    manifest.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_manifest(manifest, out_path + ".manifest.json");
}

// Summaries aligned with graph nodes, plus the posted-at-least-one-event mask.
std::pair<std::vector<dvg::AccountSummary>, std::vector<uint8_t>>
summaries_of(const Corpus& c, int threads, bool clustering = true) {
    dvg::SummaryOptions opts;
    opts.threads = threads;
    opts.clustering = clustering;
    auto summaries = dvg::account_summaries(c.graph, c.news, opts);
    std::vector<uint8_t> has_event(c.graph.node_count(), 0);
    for (const auto& r : c.records)
        if (auto idx = c.graph.index_of(r.author_id)) has_event[*idx] = 1;
    return {std::move(summaries), std::move(has_event)};
}

// Ordering comparisons need every node to carry both slant keys, and a
// connected subgraph; the working graph is the giant component of the chosen
// subgraph restricted to accounts with both distributions defined.
struct OrderingGraph {
    dvg::FollowerGraph graph;
    std::vector<double> in_keys;
    std::vector<double> out_keys;
    std::string kind;
};

OrderingGraph build_ordering_graph(const Corpus& c,
                                   const std::vector<dvg::AccountSummary>& summaries,
                                   const std::string& kind, double s, double t) {
    std::vector<dvg::NodeIndex> base;
    if (kind == "core") {
        auto counts = dvg::news_counts(c.graph, c.news);
        base = dvg::induce_core(c.graph, counts, s, t).members;
    } else if (kind == "moderate") {
        auto counts = dvg::news_counts(c.graph, c.news);
        base = dvg::moderate_subgraph(c.graph, counts);
    } else {  // all
        base.resize(c.graph.node_count());
        for (dvg::NodeIndex v = 0; v < c.graph.node_count(); ++v) base[v] = v;
    }
    std::vector<dvg::NodeIndex> defined;
    for (dvg::NodeIndex v : base)
        if (summaries[v].has_in() && summaries[v].has_out()) defined.push_back(v);
    if (defined.size() < 3)
        throw std::runtime_error("subgraph '" + kind +
                                 "' has fewer than 3 accounts with both slant distributions");
    auto sub = c.graph.induced(defined);
    auto gc = dvg::giant_component(sub);
    OrderingGraph og;
    og.kind = kind;
    og.graph = sub.induced(gc);
    og.in_keys.resize(og.graph.node_count());
    og.out_keys.resize(og.graph.node_count());
    for (dvg::NodeIndex v = 0; v < og.graph.node_count(); ++v) {
        auto idx = *c.graph.index_of(og.graph.id_of(v));
        og.in_keys[v] = summaries[idx].in_mean;
        og.out_keys[v] = summaries[idx].out_mean;
    }
    return og;
}

dvg::Permutation make_permutation(const OrderingGraph& og, const std::string& which) {
    if (which == "in")
        return dvg::slant_permutation(og.graph, og.in_keys,
                                      dvg::Permutation::Source::incoming_slant);
    if (which == "out")
        return dvg::slant_permutation(og.graph, og.out_keys,
                                      dvg::Permutation::Source::outgoing_slant);
    if (which == "spectral") {
        auto [perms, result] = dvg::spectral_orderings(og.graph);
        return dvg::best_spectral_permutation(perms, og.graph, &result);
    }
    if (which == "cnm") return dvg::cnm_ordering(og.graph).first;
    throw std::runtime_error("unknown permutation kind: " + which);
}

std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    out += '"';
    return out;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write: " + path);
    out << text;
}

// --- subcommand bodies ------------------------------------------------------

int run_ingest(const CommonOpts& common, const std::string& out, CLI::App* sub) {
    auto t0 = std::chrono::steady_clock::now();
    dvg::RunManifest manifest;
    record_config(sub, manifest);
    Corpus c = load_corpus(common, manifest);
    dvg::write_news_csv(out, c.news);
    std::cout << counters_json(c).dump() << "\n";
    finish_manifest(manifest, out, t0);
    return 0;
}

int run_summarize(const CommonOpts& common, const std::string& out, bool no_clustering,
                  CLI::App* sub) {
    auto t0 = std::chrono::steady_clock::now();
    dvg::RunManifest manifest;
    record_config(sub, manifest);
    Corpus c = load_corpus(common, manifest);
    auto [summaries, has_event] = summaries_of(c, common.threads, !no_clustering);
    dvg::write_summaries_csv(out, summaries, has_event);
    finish_manifest(manifest, out, t0);
    return 0;
}

int run_crosstab(const std::string& summaries_path, const std::string& out, double bin_width,
                 double lo, double hi, CLI::App* sub) {
    auto t0 = std::chrono::steady_clock::now();
    dvg::RunManifest manifest;
    record_config(sub, manifest);
    auto summaries = dvg::read_summaries_csv(summaries_path);
    manifest.add_input(summaries_path);
    auto tab = dvg::crosstab(summaries, bin_width, lo, hi);

    std::string text = "out_slant_bin";
    for (size_t cbin = 0; cbin < tab.bins; ++cbin) text += "," + tab.bin_label(cbin);
    text += "\n";
    for (size_t r = tab.bins; r-- > 0;) {  // highest outgoing bin first, as in the tables
        text += tab.bin_label(r);
        for (size_t cbin = 0; cbin < tab.bins; ++cbin)
            text += "," + std::to_string(tab.at(r, cbin));
        text += "\n";
    }
    write_text(out, text);
    std::cout << ordered_json{{"accounts_tabulated", tab.total}}.dump() << "\n";
    finish_manifest(manifest, out, t0);
    return 0;
}

int run_regress(const CommonOpts& common, const std::string& model,
                const std::string& summaries_path, const std::string& visits_path,
                double ridge, const std::string& out, CLI::App* sub) {
    auto t0 = std::chrono::steady_clock::now();
    dvg::RunManifest manifest;
    record_config(sub, manifest);

    std::string text;
    if (model == "logit") {
        if (visits_path.empty())
            throw std::runtime_error("--model logit needs --visits visits.csv");
        uint32_t n_sites = 0;
        auto visits = dvg::load_visits_csv(visits_path, n_sites);
        manifest.add_input(visits_path);
        dvg::LogitOptions opts;
        opts.ridge = ridge;
        auto fit = dvg::fit_slant_logit(visits, n_sites, opts);
        text += "site_id,alpha,alpha_se,gamma,gamma_se\n";
        for (uint32_t j = 0; j < n_sites; ++j)
            text += std::to_string(j) + "," + dvg::format_double(fit.alpha[j]) + "," +
                    dvg::format_double(fit.alpha_se[j]) + "," +
                    dvg::format_double(fit.gamma[j]) + "," +
                    dvg::format_double(fit.gamma_se[j]) + "\n";
        std::cout << ordered_json{{"loglik", fit.loglik},
                                  {"iterations", fit.iterations},
                                  {"n_visits", visits.size()}}
                         .dump()
                  << "\n";
    } else {
        std::vector<dvg::AccountSummary> summaries;
        if (!summaries_path.empty()) {
            summaries = dvg::read_summaries_csv(summaries_path);
            manifest.add_input(summaries_path);
        } else {
            Corpus c = load_corpus(common, manifest);
            summaries = summaries_of(c, common.threads).first;
        }
        auto fit = dvg::ols_fit(dvg::design_matrix(summaries, dvg::builtin_model(model)));
        text += "term,estimate,std_error\n";
        for (size_t j = 0; j < fit.coef.size(); ++j)
            text += csv_quote(fit.columns[j]) + "," + dvg::format_double(fit.coef[j]) + "," +
                    dvg::format_double(fit.se[j]) + "\n";
        text += "n," + std::to_string(fit.n) + ",\n";
        text += "adjusted_r2," + dvg::format_double(fit.adj_r2) + ",\n";
    }
    write_text(out, text);
    finish_manifest(manifest, out, t0);
    return 0;
}

int run_sweep(const CommonOpts& common, const std::string& s_arg, const std::string& t_arg,
              const std::string& mode_arg, const std::string& out, CLI::App* sub) {
    auto t0 = std::chrono::steady_clock::now();
    dvg::RunManifest manifest;
    record_config(sub, manifest);
    Corpus c = load_corpus(common, manifest);
    auto summaries = summaries_of(c, common.threads, false).first;

    auto parse_grid = [](const std::string& arg) {
        std::vector<double> grid;
        std::stringstream ss(arg);
        std::string item;
        while (std::getline(ss, item, ',')) grid.push_back(std::stod(item));
        if (grid.empty()) throw std::runtime_error("empty quantile grid");
        return grid;
    };
    auto s_grid = parse_grid(s_arg);
    auto t_grid = parse_grid(t_arg);
    dvg::SweepMode mode = dvg::SweepMode::all_tweets;
    if (mode_arg == "within") mode = dvg::SweepMode::within_core;
    else if (mode_arg == "periphery") mode = dvg::SweepMode::within_periphery;

    auto cells =
        dvg::core_sweep(c.graph, summaries, c.news, s_grid, t_grid, mode, common.threads);

    auto cell_at = [&](size_t si, size_t ti) -> const dvg::SweepCell& {
        return cells[si * t_grid.size() + ti];
    };
    std::string text = "# slope (star: 95% CI excludes 1.0)\nt\\s";
    for (double s : s_grid) text += "," + dvg::format_double(s);
    text += "\n";
    for (size_t ti = t_grid.size(); ti-- > 0;) {  // highest news quantile first
        text += dvg::format_double(t_grid[ti]);
        for (size_t si = 0; si < s_grid.size(); ++si) {
            const auto& cell = cell_at(si, ti);
            text += ",";
            if (cell.insufficient) text += "NA";
            else {
                if (cell.ci_excludes_one) text += "*";
                text += dvg::format_double(cell.slope);
            }
        }
        text += "\n";
    }
    text += "# accounts\nt\\s";
    for (double s : s_grid) text += "," + dvg::format_double(s);
    text += "\n";
    for (size_t ti = t_grid.size(); ti-- > 0;) {
        text += dvg::format_double(t_grid[ti]);
        for (size_t si = 0; si < s_grid.size(); ++si)
            text += "," + std::to_string(cell_at(si, ti).n);
        text += "\n";
    }
    text += "# std_error\nt\\s";
    for (double s : s_grid) text += "," + dvg::format_double(s);
    text += "\n";
    for (size_t ti = t_grid.size(); ti-- > 0;) {
        text += dvg::format_double(t_grid[ti]);
        for (size_t si = 0; si < s_grid.size(); ++si) {
            const auto& cell = cell_at(si, ti);
            text += ",";
            text += cell.insufficient ? "NA" : dvg::format_double(cell.se);
        }
        text += "\n";
    }
    write_text(out, text);
    finish_manifest(manifest, out, t0);
    return 0;
}

int run_permscore(const CommonOpts& common, const std::string& perm, const std::string& kind,
                  double s, double t, int reps, double frac, double q, uint64_t seed,
                  const std::string& out, CLI::App* sub) {
    auto t0 = std::chrono::steady_clock::now();
    dvg::RunManifest manifest;
    record_config(sub, manifest);
    Corpus c = load_corpus(common, manifest);
    auto summaries = summaries_of(c, common.threads, false).first;
    auto og = build_ordering_graph(c, summaries, kind, s, t);
    auto sigma = make_permutation(og, perm);

    double ll = dvg::perm_loglik(og.graph, sigma);
    dvg::CriticalValueParams params;
    params.reps = reps;
    params.frac = frac;
    params.q = q;
    params.seed = seed;
    params.threads = common.threads;
    double crit = dvg::critical_value(og.graph, sigma, params);

    ordered_json j;
    j["perm"] = perm;
    j["subgraph"] = kind;
    j["loglik"] = ll;
    j["critical_value"] = crit;
    j["n"] = og.graph.node_count();
    j["edges"] = og.graph.edge_count();
    write_text(out, j.dump(2) + "\n");
    std::cout << j.dump() << "\n";
    finish_manifest(manifest, out, t0);
    return 0;
}

int run_order(const CommonOpts& common, const std::string& method, const std::string& kind,
              double s, double t, const std::string& out, const std::string& dendro_out,
              CLI::App* sub) {
    auto t0 = std::chrono::steady_clock::now();
    dvg::RunManifest manifest;
    record_config(sub, manifest);
    Corpus c = load_corpus(common, manifest);
    auto summaries = summaries_of(c, common.threads, false).first;
    auto og = build_ordering_graph(c, summaries, kind, s, t);

    dvg::Permutation sigma;
    if (method == "spectral") {
        auto [perms, result] = dvg::spectral_orderings(og.graph);
        sigma = dvg::best_spectral_permutation(perms, og.graph, &result);
        ordered_json info;
        info["eigenvalues"] = result.eigenvalues;
        info["chosen"] = result.chosen;
        info["degenerate"] = result.degenerate;
        std::cout << info.dump() << "\n";
    } else if (method == "cnm") {
        auto [perm, dendro] = dvg::cnm_ordering(og.graph);
        sigma = std::move(perm);
        if (!dendro_out.empty()) {
            std::string dtext = "a,b,modularity_after\n";
            for (const auto& m : dendro.merges)
                dtext += std::to_string(og.graph.id_of(m.a)) + "," +
                         std::to_string(og.graph.id_of(m.b)) + "," +
                         dvg::format_double(m.modularity_after) + "\n";
            write_text(dendro_out, dtext);
        }
        ordered_json info;
        info["best_modularity"] = dendro.best_modularity;
        info["communities_at_best"] = dendro.communities_at_best;
        std::cout << info.dump() << "\n";
    } else {
        throw std::runtime_error("unknown ordering method: " + method);
    }

    std::string text = "account_id,rank\n";
    for (dvg::NodeIndex v = 0; v < og.graph.node_count(); ++v)
        text += std::to_string(og.graph.id_of(v)) + "," + std::to_string(sigma.rank[v]) + "\n";
    write_text(out, text);
    finish_manifest(manifest, out, t0);
    return 0;
}

int run_compare(const CommonOpts& common, const std::string& kind, double s, double t,
                int reps, double frac, double q, uint64_t seed, const std::string& out,
                CLI::App* sub) {
    auto t0 = std::chrono::steady_clock::now();
    dvg::RunManifest manifest;
    record_config(sub, manifest);
    Corpus c = load_corpus(common, manifest);
    auto summaries = summaries_of(c, common.threads, false).first;
    auto og = build_ordering_graph(c, summaries, kind, s, t);

    std::vector<std::pair<std::string, dvg::Permutation>> perms;
    perms.emplace_back("incoming_slant", make_permutation(og, "in"));
    perms.emplace_back("outgoing_slant", make_permutation(og, "out"));
    perms.emplace_back("spectral", make_permutation(og, "spectral"));
    perms.emplace_back("cnm", make_permutation(og, "cnm"));

    dvg::CriticalValueParams params;
    params.reps = reps;
    params.frac = frac;
    params.q = q;
    params.seed = seed;
    params.threads = common.threads;
    auto report = dvg::compare_orderings(og.graph, perms, params);

    std::string text = "permutation,loglik,critical_value,worse_than\n";
    for (const auto& row : report.rows) {
        std::string worse;
        for (size_t i = 0; i < row.worse_than.size(); ++i)
            worse += (i ? ";" : "") + row.worse_than[i];
        text += row.name + "," + dvg::format_double(row.loglik) + "," +
                dvg::format_double(row.critical_value) + "," + csv_quote(worse) + "\n";
    }
    write_text(out, text);
    std::cout << ordered_json{{"n", og.graph.node_count()}, {"edges", og.graph.edge_count()}}
                     .dump()
              << "\n";
    finish_manifest(manifest, out, t0);
    return 0;
}

int run_affinity(const std::string& followers_dir, const std::string& anchors_path,
                 size_t min_followers, double w_min, size_t deg_min, bool iterate_prune,
                 double gamma, uint64_t seed, const std::string& out, const std::string& svg,
                 int threads, CLI::App* sub) {
    auto t0 = std::chrono::steady_clock::now();
    dvg::RunManifest manifest;
    record_config(sub, manifest);

    auto sets = dvg::load_follower_sets(followers_dir, min_followers);
    if (sets.size() == 0) throw std::runtime_error("no outlets pass the follower floor");

    // anchors.csv: label,outlet
    std::map<std::string, std::vector<std::string>> anchors;
    {
        std::ifstream in(anchors_path);
        if (!in) throw std::runtime_error("cannot open anchors: " + anchors_path);
        manifest.add_input(anchors_path);
        std::string line;
        size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty() || line == "\r" || (lineno == 1 && line.rfind("label", 0) == 0))
                continue;
            auto comma = line.find(',');
            if (comma == std::string::npos)
                throw std::runtime_error(anchors_path + ":" + std::to_string(lineno) +
                                         ": expected label,outlet");
            std::string label = line.substr(0, comma);
            std::string outlet = line.substr(comma + 1);
            while (!outlet.empty() && (outlet.back() == '\r' || outlet.back() == ' '))
                outlet.pop_back();
            anchors[label].push_back(outlet);
        }
    }

    auto raw = dvg::affinity_matrix(sets, threads);
    std::vector<size_t> counts(sets.size());
    for (size_t i = 0; i < sets.size(); ++i) counts[i] = sets.followers[i].size();
    auto scaled = dvg::scale_affinity(raw, counts);
    auto pruned = dvg::prune(scaled, w_min, deg_min, iterate_prune);
    if (pruned.kept.empty()) throw std::runtime_error("pruning removed every outlet");
    dvg::SpinGlassOptions opts;
    opts.gamma = gamma;
    opts.seed = seed;
    auto partition = dvg::detect_clusters(pruned, opts);
    auto labels = dvg::label_clusters(partition, pruned, sets.outlets, anchors);
    auto scores = dvg::slant_scores(raw, labels);

    auto label_name = [](dvg::OutletLabel l) {
        switch (l) {
            case dvg::OutletLabel::liberal: return "liberal";
            case dvg::OutletLabel::conservative: return "conservative";
            case dvg::OutletLabel::mainstream: return "mainstream";
            default: return "pruned";
        }
    };
    std::string text = "outlet,score,cluster\n";
    for (size_t i = 0; i < sets.size(); ++i) {
        text += csv_quote(sets.outlets[i]) + ",";
        text += scores[i].defined ? dvg::format_double(scores[i].score) : "NA";
        text += std::string(",") + label_name(labels.label[i]) + "\n";
    }
    write_text(out, text);

    if (!svg.empty()) {
        std::vector<std::pair<double, double>> pts;
        for (size_t i = 0; i < sets.size(); ++i)
            if (scores[i].defined)
                pts.emplace_back(scores[i].score,
                                 std::log(static_cast<double>(counts[i])));
        dvg::write_svg_xy(svg, pts, "slant score", "ln(followers)");
    }

    ordered_json j;
    j["outlets"] = sets.size();
    j["excluded_by_floor"] = sets.excluded.size();
    j["pruned"] = pruned.pruned.size();
    j["communities"] = partition.n_communities;
    j["trivial_partition"] = partition.trivial;
    j["energy"] = partition.energy;
    std::cout << j.dump() << "\n";
    finish_manifest(manifest, out, t0);
    return 0;
}

void write_jsonl_events(const std::string& path, std::span<const dvg::TweetRecord> records) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write events: " + path);
    for (const auto& r : records) {
        ordered_json j;
        j["tweet_id"] = r.tweet_id;
        j["author_id"] = r.author_id;
        j["timestamp"] = r.timestamp;
        j["urls"] = r.urls;
        if (r.retweet) j["retweet"] = true;
        out << j.dump() << "\n";
    }
}

int run_synth(const std::string& kind, const std::string& out_dir, uint64_t seed, size_t n,
              double core_fraction, double homophily, double slope_core,
              double slope_periphery, double mean_followees, double rate_core,
              double rate_periphery, size_t blocks_k, double p_in, double p_out,
              size_t outlets, size_t pool, size_t visits_n, int threads, CLI::App* sub) {
    auto t0 = std::chrono::steady_clock::now();
    dvg::RunManifest manifest;
    record_config(sub, manifest);
    fs::create_directories(out_dir);
    auto at = [&](const std::string& name) { return (fs::path(out_dir) / name).string(); };

    if (kind == "population") {
        dvg::SynthConfig cfg;
        cfg.seed = seed;
        cfg.n_accounts = n;
        cfg.core_fraction = core_fraction;
        cfg.homophily = homophily;
        cfg.slope_core = slope_core;
        cfg.slope_periphery = slope_periphery;
        cfg.mean_followees = mean_followees;
        cfg.tweet_rate_core = rate_core;
        cfg.tweet_rate_periphery = rate_periphery;
        auto pop = dvg::gen_population(cfg, threads);
        auto ev = dvg::gen_events(pop, threads);

        // shorten every 50th URL so demo pipelines exercise the resolver cache
        std::vector<dvg::TweetRecord> records = ev.records;
        std::string cache_text;
        for (size_t i = 0; i < records.size(); i += 50) {
            std::string short_url = "short.example/" + std::to_string(i);
            cache_text += short_url + "\t" + records[i].urls[0] + "\n";
            records[i].urls[0] = short_url;
        }
        write_jsonl_events(at("events.jsonl"), records);
        write_text(at("resolver_cache.tsv"), cache_text);

        std::string edges_text;
        pop.graph.for_each_edge([&](dvg::NodeIndex u, dvg::NodeIndex v) {
            edges_text += std::to_string(pop.graph.id_of(u)) + "\t" +
                          std::to_string(pop.graph.id_of(v)) + "\n";
        });
        write_text(at("edges.tsv"), edges_text);

        std::string table_text = "pattern,slant,quality,label\n";
        for (uint32_t d = 0; d < ev.table.size(); ++d) {
            const auto& e = ev.table.entry(d);
            table_text += e.host + e.path + "," + dvg::format_double(e.slant) + "," +
                          dvg::format_double(e.quality) + "," + csv_quote(e.label) + "\n";
        }
        write_text(at("slant_table.csv"), table_text);

        std::string truth = "account_id,latent,coreness,core,out_factor\n";
        for (const auto& a : pop.accounts)
            truth += std::to_string(a.id) + "," + dvg::format_double(a.latent) + "," +
                     dvg::format_double(a.coreness) + "," + (a.core ? "1" : "0") + "," +
                     dvg::format_double(a.out_factor) + "\n";
        write_text(at("accounts_truth.csv"), truth);
    } else if (kind == "blocks") {
        auto bg = dvg::gen_blocks(n, blocks_k, p_in, p_out, seed);
        std::string edges_text;
        bg.graph.for_each_edge([&](dvg::NodeIndex u, dvg::NodeIndex v) {
            edges_text += std::to_string(bg.graph.id_of(u)) + "\t" +
                          std::to_string(bg.graph.id_of(v)) + "\n";
        });
        write_text(at("edges.tsv"), edges_text);
        std::string truth = "node_id,block\n";
        for (size_t i = 0; i < n; ++i)
            truth += std::to_string(bg.graph.id_of(static_cast<dvg::NodeIndex>(i))) + "," +
                     std::to_string(bg.block_of[i]) + "\n";
        write_text(at("blocks_truth.csv"), truth);
    } else if (kind == "audiences") {
        dvg::AudienceConfig cfg;
        cfg.seed = seed;
        cfg.n_outlets = outlets;
        cfg.pool_size = pool;
        cfg.rate = {{0.6, 0.12, 0.02}, {0.12, 0.6, 0.05}, {0.02, 0.05, 0.6}};
        auto aud = dvg::gen_audiences(cfg, threads);
        fs::create_directories(at("followers"));
        for (size_t i = 0; i < aud.sets.size(); ++i) {
            std::string text;
            for (int64_t id : aud.sets.followers[i]) text += std::to_string(id) + "\n";
            write_text(at("followers/" + aud.sets.outlets[i]), text);
        }
        // clusters 0 and 2 supply the liberal / conservative anchors
        std::string anchors = "label,outlet\n";
        size_t lib_n = 0, con_n = 0;
        for (size_t i = 0; i < aud.sets.size() && (lib_n < 2 || con_n < 2); ++i) {
            if (aud.cluster_of[i] == 0 && lib_n < 2) {
                anchors += "liberal," + aud.sets.outlets[i] + "\n";
                ++lib_n;
            } else if (aud.cluster_of[i] == 2 && con_n < 2) {
                anchors += "conservative," + aud.sets.outlets[i] + "\n";
                ++con_n;
            }
        }
        write_text(at("anchors.csv"), anchors);
        std::string truth = "outlet,cluster\n";
        for (size_t i = 0; i < aud.sets.size(); ++i)
            truth += aud.sets.outlets[i] + "," + std::to_string(aud.cluster_of[i]) + "\n";
        write_text(at("clusters_truth.csv"), truth);
    } else if (kind == "visits") {
        std::vector<double> alpha(outlets), gamma_v(outlets);
        for (size_t j = 0; j < outlets; ++j) {
            dvg::DetRng rng(seed, 0xA1F4ull + j);
            alpha[j] = j == 0 ? 0.0 : 0.5 * rng.normal();
            gamma_v[j] = j == 0 ? 0.0 : 0.8 * rng.normal();
        }
        auto visits = dvg::gen_visits(alpha, gamma_v, visits_n, 0.5, seed);
        dvg::write_visits_csv(at("visits.csv"), visits);
        std::string truth = "site_id,alpha,gamma\n";
        for (size_t j = 0; j < outlets; ++j)
            truth += std::to_string(j) + "," + dvg::format_double(alpha[j]) + "," +
                     dvg::format_double(gamma_v[j]) + "\n";
        write_text(at("sites_truth.csv"), truth);
    } else {
        throw std::runtime_error("unknown synth kind: " + kind);
    }
    finish_manifest(manifest, (fs::path(out_dir) / kind).string(), t0);
    return 0;
}

int run_plot(const CommonOpts& common, const std::string& plot_kind, const std::string& perm,
             const std::string& kind, double s, double t, const std::string& slants_path,
             const std::string& followers_dir, size_t min_followers, const std::string& out,
             CLI::App* sub) {
    auto t0 = std::chrono::steady_clock::now();
    dvg::RunManifest manifest;
    record_config(sub, manifest);
    if (plot_kind == "matrix") {
        Corpus c = load_corpus(common, manifest);
        auto summaries = summaries_of(c, common.threads, false).first;
        auto og = build_ordering_graph(c, summaries, kind, s, t);
        auto sigma = make_permutation(og, perm);
        auto pts = dvg::permuted_points(og.graph, sigma);
        dvg::write_svg_matrix(out, pts, og.graph.node_count());
    } else if (plot_kind == "affinity") {
        auto sets = dvg::load_follower_sets(followers_dir, min_followers);
        std::ifstream in(slants_path);
        if (!in) throw std::runtime_error("cannot open slants: " + slants_path);
        manifest.add_input(slants_path);
        std::map<std::string, double> score;
        std::string line;
        size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (lineno == 1 || line.empty()) continue;
            auto c1 = line.find(',');
            auto c2 = line.find(',', c1 + 1);
            if (c1 == std::string::npos || c2 == std::string::npos) continue;
            std::string val = line.substr(c1 + 1, c2 - c1 - 1);
            if (val == "NA") continue;
            score[line.substr(0, c1)] = std::stod(val);
        }
        std::vector<std::pair<double, double>> pts;
        for (size_t i = 0; i < sets.size(); ++i) {
            auto it = score.find(sets.outlets[i]);
            if (it != score.end())
                pts.emplace_back(it->second,
                                 std::log(static_cast<double>(sets.followers[i].size())));
        }
        dvg::write_svg_xy(out, pts, "slant score", "ln(followers)");
    } else {
        throw std::runtime_error("unknown plot kind: " + plot_kind);
    }
    finish_manifest(manifest, out, t0);
    return 0;
}

int run_resolve(const std::string& urls_path, const std::string& client,
                const std::string& cache_path, CLI::App* sub) {
    auto t0 = std::chrono::steady_clock::now();
    dvg::RunManifest manifest;
    record_config(sub, manifest);
    std::ifstream in(urls_path);
    if (!in) throw std::runtime_error("cannot open urls file: " + urls_path);
    manifest.add_input(urls_path);

    // pluggable offline clients: "identity" maps every URL to itself;
    // "file:<map.tsv>" looks up a prepared mapping
    dvg::ResolverCache mapping;
    bool identity = client == "identity";
    if (!identity) {
        if (client.rfind("file:", 0) != 0)
            throw std::runtime_error("unknown resolver client: " + client);
        mapping = dvg::ResolverCache::load_tsv(client.substr(5));
    }

    std::map<std::string, std::string> cache;  // ordered: stable output
    if (fs::exists(cache_path))
        for (const auto& [k, v] : dvg::ResolverCache::load_tsv(cache_path).redirects)
            cache[k] = v;
    std::string line;
    size_t resolved = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        while (!line.empty() && line.back() == '\r') line.pop_back();
        std::string final_url = identity ? line : mapping.resolve(line).url;
        cache[line] = final_url;
        ++resolved;
    }
    std::string text;
    for (const auto& [k, v] : cache) text += k + "\t" + v + "\n";
    write_text(cache_path, text);
    std::cout << ordered_json{{"resolved", resolved}, {"cache_entries", cache.size()}}.dump()
              << "\n";
    finish_manifest(manifest, cache_path, t0);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"diversigraph: information diversity measurement on follower networks"};
    // config values are injected before user flags, so the last (user) value
    // wins for every option
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.require_subcommand(1);

    // every subcommand accepts --config with the same key=value format;
    // entries are validated against the subcommand's option names and
    // expanded into --key=value arguments ahead of the command line
    auto add_config = [](CLI::App* sub) {
        sub->add_option("--config", "key=value config file; flags take precedence");
    };

    int exit_code = 0;
    auto guard = [&](auto&& fn) {
        try {
            exit_code = fn();
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << "\n";
            exit_code = 1;
        }
    };

    // ingest
    auto* ingest = app.add_subcommand("ingest", "parse events, match URLs, emit news tweets");
    auto ingest_common = std::make_shared<CommonOpts>();
    auto ingest_out = std::make_shared<std::string>("news.csv");
    add_common(ingest, *ingest_common);
    ingest->add_option("--out", *ingest_out, "output news CSV");
    add_config(ingest);
    ingest->callback([ingest_common, ingest_out, ingest, &exit_code, &guard]() {
        guard([&] { return run_ingest(*ingest_common, *ingest_out, ingest); });
    });

    // summarize
    auto* summarize = app.add_subcommand("summarize", "per-account slant summaries");
    auto sum_common = std::make_shared<CommonOpts>();
    auto sum_out = std::make_shared<std::string>("summaries.csv");
    auto sum_nocluster = std::make_shared<bool>(false);
    add_common(summarize, *sum_common);
    summarize->add_option("--out", *sum_out, "output summaries CSV");
    summarize->add_flag("--no-clustering", *sum_nocluster, "skip clustering coefficients");
    add_config(summarize);
    summarize->callback([sum_common, sum_out, sum_nocluster, summarize, &exit_code, &guard]() {
        guard([&] { return run_summarize(*sum_common, *sum_out, *sum_nocluster, summarize); });
    });

    // crosstab
    auto* crosstab = app.add_subcommand("crosstab", "incoming x outgoing slant tabulation");
    auto ct_summaries = std::make_shared<std::string>();
    auto ct_out = std::make_shared<std::string>("crosstab.csv");
    auto ct_width = std::make_shared<double>(0.5);
    auto ct_lo = std::make_shared<double>(-1.75);
    auto ct_hi = std::make_shared<double>(2.25);
    crosstab->add_option("--summaries", *ct_summaries, "summaries.csv input")->required();
    crosstab->add_option("--out", *ct_out, "output CSV");
    crosstab->add_option("--bin-width", *ct_width, "bin width");
    crosstab->add_option("--lo", *ct_lo, "lowest bin edge");
    crosstab->add_option("--hi", *ct_hi, "highest bin edge");
    add_config(crosstab);
    crosstab->callback([ct_summaries, ct_out, ct_width, ct_lo, ct_hi, crosstab, &exit_code,
                        &guard]() {
        guard([&] {
            return run_crosstab(*ct_summaries, *ct_out, *ct_width, *ct_lo, *ct_hi, crosstab);
        });
    });

    // regress
    auto* regress = app.add_subcommand("regress", "OLS models and the visit-choice estimator");
    auto rg_common = std::make_shared<CommonOpts>();
    auto rg_model = std::make_shared<std::string>("I");
    auto rg_summaries = std::make_shared<std::string>();
    auto rg_visits = std::make_shared<std::string>();
    auto rg_ridge = std::make_shared<double>(0.0);
    auto rg_out = std::make_shared<std::string>("regress.csv");
    add_common(regress, *rg_common, false);
    regress->add_option("--model", *rg_model, "I|II|III|IV|A1|logit")
        ->check(CLI::IsMember({"I", "II", "III", "IV", "A1", "logit"}));
    regress->add_option("--summaries", *rg_summaries, "summaries.csv (skips corpus loading)");
    regress->add_option("--visits", *rg_visits, "visits.csv for --model logit");
    regress->add_option("--ridge", *rg_ridge, "ridge strength for the logit");
    regress->add_option("--out", *rg_out, "output CSV");
    add_config(regress);
    regress->callback([rg_common, rg_model, rg_summaries, rg_visits, rg_ridge, rg_out, regress,
                       &exit_code, &guard]() {
        guard([&] {
            if (rg_summaries->empty() && rg_visits->empty() && rg_common->events.empty())
                throw std::runtime_error(
                    "regress needs --summaries, --visits, or corpus inputs");
            return run_regress(*rg_common, *rg_model, *rg_summaries, *rg_visits, *rg_ridge,
                               *rg_out, regress);
        });
    });

    // sweep
    auto* sweep = app.add_subcommand("sweep", "core-definition slope grids");
    auto sw_common = std::make_shared<CommonOpts>();
    auto sw_s = std::make_shared<std::string>("0.75,0.80,0.85,0.90,0.95");
    auto sw_t = std::make_shared<std::string>("0.75,0.80,0.85,0.90,0.95");
    auto sw_mode = std::make_shared<std::string>("within");
    auto sw_out = std::make_shared<std::string>("sweep.csv");
    add_common(sweep, *sw_common);
    sweep->add_option("--s", *sw_s, "comma list of outdegree quantiles");
    sweep->add_option("--t", *sw_t, "comma list of news-count quantiles");
    sweep->add_option("--mode", *sw_mode, "within|all|periphery")
        ->check(CLI::IsMember({"within", "all", "periphery"}));
    sweep->add_option("--out", *sw_out, "output CSV grid");
    add_config(sweep);
    sweep->callback([sw_common, sw_s, sw_t, sw_mode, sw_out, sweep, &exit_code, &guard]() {
        guard([&] { return run_sweep(*sw_common, *sw_s, *sw_t, *sw_mode, *sw_out, sweep); });
    });

    // permscore
    auto* permscore = app.add_subcommand("permscore", "ordering quality under the Z model");
    auto ps_common = std::make_shared<CommonOpts>();
    auto ps_perm = std::make_shared<std::string>("in");
    auto ps_kind = std::make_shared<std::string>("core");
    auto ps_s = std::make_shared<double>(0.95);
    auto ps_t = std::make_shared<double>(0.95);
    auto ps_reps = std::make_shared<int>(1000);
    auto ps_frac = std::make_shared<double>(0.05);
    auto ps_q = std::make_shared<double>(0.95);
    auto ps_seed = std::make_shared<uint64_t>(0);
    auto ps_out = std::make_shared<std::string>("permscore.json");
    add_common(permscore, *ps_common);
    permscore->add_option("--perm", *ps_perm, "in|out|spectral|cnm")
        ->check(CLI::IsMember({"in", "out", "spectral", "cnm"}));
    permscore->add_option("--subgraph", *ps_kind, "core|moderate|all")
        ->check(CLI::IsMember({"core", "moderate", "all"}));
    permscore->add_option("--s", *ps_s, "core outdegree quantile");
    permscore->add_option("--t", *ps_t, "core news-count quantile");
    permscore->add_option("--reps", *ps_reps, "bootstrap repetitions");
    permscore->add_option("--frac", *ps_frac, "fraction of nodes displaced per rep");
    permscore->add_option("--q", *ps_q, "quantile of the reduction distribution");
    permscore->add_option("--seed", *ps_seed, "bootstrap seed");
    permscore->add_option("--out", *ps_out, "output JSON report");
    add_config(permscore);
    permscore->callback([ps_common, ps_perm, ps_kind, ps_s, ps_t, ps_reps, ps_frac, ps_q,
                         ps_seed, ps_out, permscore, &exit_code, &guard]() {
        guard([&] {
            return run_permscore(*ps_common, *ps_perm, *ps_kind, *ps_s, *ps_t, *ps_reps,
                                 *ps_frac, *ps_q, *ps_seed, *ps_out, permscore);
        });
    });

    // order
    auto* order = app.add_subcommand("order", "structure-only node orderings");
    auto or_common = std::make_shared<CommonOpts>();
    auto or_method = std::make_shared<std::string>("spectral");
    auto or_kind = std::make_shared<std::string>("core");
    auto or_s = std::make_shared<double>(0.95);
    auto or_t = std::make_shared<double>(0.95);
    auto or_out = std::make_shared<std::string>("ordering.csv");
    auto or_dendro = std::make_shared<std::string>();
    add_common(order, *or_common);
    order->add_option("--method", *or_method, "spectral|cnm")
        ->check(CLI::IsMember({"spectral", "cnm"}));
    order->add_option("--subgraph", *or_kind, "core|moderate|all")
        ->check(CLI::IsMember({"core", "moderate", "all"}));
    order->add_option("--s", *or_s, "core outdegree quantile");
    order->add_option("--t", *or_t, "core news-count quantile");
    order->add_option("--out", *or_out, "output permutation CSV");
    order->add_option("--dendrogram", *or_dendro, "merge-list CSV (cnm only)");
    add_config(order);
    order->callback([or_common, or_method, or_kind, or_s, or_t, or_out, or_dendro, order,
                     &exit_code, &guard]() {
        guard([&] {
            return run_order(*or_common, *or_method, *or_kind, *or_s, *or_t, *or_out,
                             *or_dendro, order);
        });
    });

    // compare
    auto* compare = app.add_subcommand("compare", "slant vs structural orderings report");
    auto cp_common = std::make_shared<CommonOpts>();
    auto cp_kind = std::make_shared<std::string>("core");
    auto cp_s = std::make_shared<double>(0.95);
    auto cp_t = std::make_shared<double>(0.95);
    auto cp_reps = std::make_shared<int>(1000);
    auto cp_frac = std::make_shared<double>(0.05);
    auto cp_q = std::make_shared<double>(0.95);
    auto cp_seed = std::make_shared<uint64_t>(0);
    auto cp_out = std::make_shared<std::string>("compare.csv");
    add_common(compare, *cp_common);
    compare->add_option("--subgraph", *cp_kind, "core|moderate|all")
        ->check(CLI::IsMember({"core", "moderate", "all"}));
    compare->add_option("--s", *cp_s, "core outdegree quantile");
    compare->add_option("--t", *cp_t, "core news-count quantile");
    compare->add_option("--reps", *cp_reps, "bootstrap repetitions");
    compare->add_option("--frac", *cp_frac, "fraction displaced per rep");
    compare->add_option("--q", *cp_q, "reduction quantile");
    compare->add_option("--seed", *cp_seed, "bootstrap seed");
    compare->add_option("--out", *cp_out, "output CSV");
    add_config(compare);
    compare->callback([cp_common, cp_kind, cp_s, cp_t, cp_reps, cp_frac, cp_q, cp_seed, cp_out,
                       compare, &exit_code, &guard]() {
        guard([&] {
            return run_compare(*cp_common, *cp_kind, *cp_s, *cp_t, *cp_reps, *cp_frac, *cp_q,
                               *cp_seed, *cp_out, compare);
        });
    });

    // affinity
    auto* affinity = app.add_subcommand("affinity", "co-following slant estimation");
    auto af_followers = std::make_shared<std::string>();
    auto af_anchors = std::make_shared<std::string>();
    auto af_min = std::make_shared<size_t>(10000);
    auto af_wmin = std::make_shared<double>(0.3);
    auto af_degmin = std::make_shared<size_t>(5);
    auto af_iterate = std::make_shared<bool>(false);
    auto af_gamma = std::make_shared<double>(1.0);
    auto af_seed = std::make_shared<uint64_t>(0);
    auto af_out = std::make_shared<std::string>("slants.csv");
    auto af_svg = std::make_shared<std::string>();
    auto af_threads = std::make_shared<int>(1);
    affinity->add_option("--followers", *af_followers, "directory of per-outlet id lists")
        ->required();
    affinity->add_option("--anchors", *af_anchors, "anchors.csv (label,outlet)")->required();
    affinity->add_option("--min-followers", *af_min, "follower floor per outlet");
    affinity->add_option("--w-min", *af_wmin, "scaled-weight prune threshold");
    affinity->add_option("--deg-min", *af_degmin, "degree prune threshold");
    affinity->add_flag("--iterate-prune", *af_iterate,
                       "repeat the node prune to a fixed point");
    affinity->add_option("--gamma", *af_gamma, "spin-glass resolution");
    affinity->add_option("--seed", *af_seed, "annealing seed");
    affinity->add_option("--out", *af_out, "output slants CSV");
    affinity->add_option("--svg", *af_svg, "scatter figure (score vs ln followers)");
    affinity->add_option("--threads", *af_threads, "parallelism cap");
    add_config(affinity);
    affinity->callback([af_followers, af_anchors, af_min, af_wmin, af_degmin, af_iterate,
                        af_gamma, af_seed, af_out, af_svg, af_threads, affinity, &exit_code,
                        &guard]() {
        guard([&] {
            return run_affinity(*af_followers, *af_anchors, *af_min, *af_wmin, *af_degmin,
                                *af_iterate, *af_gamma, *af_seed, *af_out, *af_svg,
                                *af_threads, affinity);
        });
    });

    // synth
    auto* synth = app.add_subcommand("synth", "seeded synthetic corpora with ground truth");
    auto sy_kind = std::make_shared<std::string>("population");
    auto sy_dir = std::make_shared<std::string>("synth_out");
    auto sy_seed = std::make_shared<uint64_t>(1);
    auto sy_n = std::make_shared<size_t>(1000);
    auto sy_corefrac = std::make_shared<double>(0.1);
    auto sy_h = std::make_shared<double>(8.0);
    auto sy_sc = std::make_shared<double>(1.2);
    auto sy_sp = std::make_shared<double>(0.7);
    auto sy_followees = std::make_shared<double>(20.0);
    auto sy_rc = std::make_shared<double>(30.0);
    auto sy_rp = std::make_shared<double>(3.0);
    auto sy_k = std::make_shared<size_t>(2);
    auto sy_pin = std::make_shared<double>(0.2);
    auto sy_pout = std::make_shared<double>(0.01);
    auto sy_outlets = std::make_shared<size_t>(30);
    auto sy_pool = std::make_shared<size_t>(4000);
    auto sy_visits = std::make_shared<size_t>(100000);
    auto sy_threads = std::make_shared<int>(1);
    synth->add_option("--kind", *sy_kind, "population|blocks|audiences|visits")
        ->check(CLI::IsMember({"population", "blocks", "audiences", "visits"}));
    synth->add_option("--out-dir", *sy_dir, "output directory");
    synth->add_option("--seed", *sy_seed, "generator seed");
    synth->add_option("--n", *sy_n, "accounts (population) or nodes (blocks)");
    synth->add_option("--core-fraction", *sy_corefrac, "planted core fraction");
    synth->add_option("--homophily", *sy_h, "follow homophily strength");
    synth->add_option("--slope-core", *sy_sc, "planted core slope");
    synth->add_option("--slope-periphery", *sy_sp, "planted periphery slope");
    synth->add_option("--mean-followees", *sy_followees, "expected followees per account");
    synth->add_option("--rate-core", *sy_rc, "core news-post rate");
    synth->add_option("--rate-periphery", *sy_rp, "periphery news-post rate");
    synth->add_option("--blocks", *sy_k, "number of planted blocks");
    synth->add_option("--p-in", *sy_pin, "within-block edge probability");
    synth->add_option("--p-out", *sy_pout, "between-block edge probability");
    synth->add_option("--outlets", *sy_outlets, "outlets (audiences) or sites (visits)");
    synth->add_option("--pool", *sy_pool, "users per audience pool");
    synth->add_option("--visits", *sy_visits, "number of sampled visits");
    synth->add_option("--threads", *sy_threads, "parallelism cap");
    add_config(synth);
    synth->callback([sy_kind, sy_dir, sy_seed, sy_n, sy_corefrac, sy_h, sy_sc, sy_sp,
                     sy_followees, sy_rc, sy_rp, sy_k, sy_pin, sy_pout, sy_outlets, sy_pool,
                     sy_visits, sy_threads, synth, &exit_code, &guard]() {
        guard([&] {
            return run_synth(*sy_kind, *sy_dir, *sy_seed, *sy_n, *sy_corefrac, *sy_h, *sy_sc,
                             *sy_sp, *sy_followees, *sy_rc, *sy_rp, *sy_k, *sy_pin, *sy_pout,
                             *sy_outlets, *sy_pool, *sy_visits, *sy_threads, synth);
        });
    });

    // plot
    auto* plot = app.add_subcommand("plot", "SVG figures");
    auto pl_common = std::make_shared<CommonOpts>();
    auto pl_kind = std::make_shared<std::string>("matrix");
    auto pl_perm = std::make_shared<std::string>("out");
    auto pl_sub = std::make_shared<std::string>("core");
    auto pl_s = std::make_shared<double>(0.95);
    auto pl_t = std::make_shared<double>(0.95);
    auto pl_slants = std::make_shared<std::string>();
    auto pl_followers = std::make_shared<std::string>();
    auto pl_min = std::make_shared<size_t>(10000);
    auto pl_out = std::make_shared<std::string>("figure.svg");
    add_common(plot, *pl_common, false);
    plot->add_option("--kind", *pl_kind, "matrix|affinity")
        ->check(CLI::IsMember({"matrix", "affinity"}));
    plot->add_option("--perm", *pl_perm, "in|out|spectral|cnm (matrix)")
        ->check(CLI::IsMember({"in", "out", "spectral", "cnm"}));
    plot->add_option("--subgraph", *pl_sub, "core|moderate|all (matrix)")
        ->check(CLI::IsMember({"core", "moderate", "all"}));
    plot->add_option("--s", *pl_s, "core outdegree quantile");
    plot->add_option("--t", *pl_t, "core news-count quantile");
    plot->add_option("--slants", *pl_slants, "slants.csv (affinity)");
    plot->add_option("--followers", *pl_followers, "followers directory (affinity)");
    plot->add_option("--min-followers", *pl_min, "follower floor (affinity)");
    plot->add_option("--out", *pl_out, "output SVG");
    add_config(plot);
    plot->callback([pl_common, pl_kind, pl_perm, pl_sub, pl_s, pl_t, pl_slants, pl_followers,
                    pl_min, pl_out, plot, &exit_code, &guard]() {
        guard([&] {
            if (*pl_kind == "matrix" && pl_common->events.empty())
                throw std::runtime_error("plot --kind matrix needs corpus inputs");
            return run_plot(*pl_common, *pl_kind, *pl_perm, *pl_sub, *pl_s, *pl_t, *pl_slants,
                            *pl_followers, *pl_min, *pl_out, plot);
        });
    });

    // resolve
    auto* resolve = app.add_subcommand("resolve", "populate the redirect cache offline");
    auto rs_urls = std::make_shared<std::string>();
    auto rs_client = std::make_shared<std::string>("identity");
    auto rs_cache = std::make_shared<std::string>("resolver_cache.tsv");
    resolve->add_option("--urls", *rs_urls, "file with one URL per line")->required();
    resolve->add_option("--client", *rs_client, "identity or file:<mapping.tsv>");
    resolve->add_option("--cache", *rs_cache, "cache TSV to merge into");
    add_config(resolve);
    resolve->callback([rs_urls, rs_client, rs_cache, resolve, &exit_code, &guard]() {
        guard([&] { return run_resolve(*rs_urls, *rs_client, *rs_cache, resolve); });
    });

    // expand --config entries into --key=value tokens right after the
    // subcommand name; unknown keys are fatal before parsing begins
    std::vector<std::string> args(argv + 1, argv + argc);
    size_t sub_pos = args.size();
    std::string sub_name;
    for (size_t i = 0; i < args.size(); ++i)
        if (!args[i].empty() && args[i][0] != '-') {
            sub_pos = i;
            sub_name = args[i];
            break;
        }
    std::string config_path;
    for (size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) config_path = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0) config_path = args[i].substr(9);
    }
    std::vector<std::string> injected;
    if (!config_path.empty() && !sub_name.empty()) {
        CLI::App* target = nullptr;
        for (CLI::App* sub : app.get_subcommands([](CLI::App*) { return true; }))
            if (sub->get_name() == sub_name) target = sub;
        if (target) {
            std::vector<std::string> allowed;
            for (const CLI::Option* opt : target->get_options())
                for (const auto& lname : opt->get_lnames()) allowed.push_back(lname);
            try {
                for (auto& [key, value] : dvg::parse_config_file(config_path, allowed))
                    injected.push_back("--" + key + "=" + value);
            } catch (const std::exception& e) {
                std::cerr << "error: " << e.what() << "\n";
                return 1;
            }
        }
    }
    std::vector<std::string> final_args;
    final_args.push_back(argv[0]);
    for (size_t i = 0; i < args.size(); ++i) {
        final_args.push_back(args[i]);
        if (i == sub_pos)
            for (const auto& extra : injected) final_args.push_back(extra);
    }
    std::vector<char*> cargv;
    cargv.reserve(final_args.size());
    for (auto& s : final_args) cargv.push_back(s.data());
    try {
        app.parse(static_cast<int>(cargv.size()), cargv.data());
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }
    return exit_code;
}
