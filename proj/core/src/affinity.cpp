#include "diversigraph/affinity.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "diversigraph/rng.hpp"
#include "diversigraph/util.hpp"

namespace dvg {

void FollowerSets::add(std::string outlet, std::vector<int64_t> ids) {
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    outlets.push_back(std::move(outlet));
    followers.push_back(std::move(ids));
}

FollowerSets load_follower_sets(const std::string& dir, size_t min_followers) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw std::runtime_error("not a followers directory: " + dir);
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file()) files.push_back(entry.path());
    std::sort(files.begin(), files.end());

    FollowerSets sets;
    for (const auto& file : files) {
        std::ifstream in(file);
        if (!in) throw std::runtime_error("cannot open follower list: " + file.string());
        std::vector<int64_t> ids;
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty() || line == "\r") continue;
            int64_t id = 0;
            auto [p, ec] = std::from_chars(line.data(), line.data() + line.size(), id);
            if (ec != std::errc())
                throw std::runtime_error("bad follower id in " + file.string() + ": " + line);
            ids.push_back(id);
        }
        std::sort(ids.begin(), ids.end());
        ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
        std::string name = file.stem().string();
        if (ids.size() < min_followers) {
            sets.excluded.push_back(std::move(name));
            continue;
        }
        sets.outlets.push_back(std::move(name));
        sets.followers.push_back(std::move(ids));
    }
    return sets;
}

AffinityMatrix affinity_matrix(const FollowerSets& sets, int threads) {
    size_t n = sets.size();
    for (size_t i = 0; i < n; ++i)
        if (sets.followers[i].empty())
            throw std::invalid_argument("outlet has an empty follower set: " + sets.outlets[i]);

    AffinityMatrix a;
    a.n = n;
    a.values.assign(n * n, 0.0);
    // row r owns pair indices [offsets[r], offsets[r+1])
    std::vector<size_t> offsets(n + 1, 0);
    for (size_t i = 0; i < n; ++i) offsets[i + 1] = offsets[i] + (n - 1 - i);
    size_t n_pairs = offsets[n];
    parallel_for(n_pairs, threads, [&](size_t b, size_t e) {
        for (size_t idx = b; idx < e; ++idx) {
            size_t i = static_cast<size_t>(
                std::upper_bound(offsets.begin(), offsets.end(), idx) - offsets.begin() - 1);
            size_t j = i + 1 + (idx - offsets[i]);
            const auto& fi = sets.followers[i];
            const auto& fj = sets.followers[j];
            size_t inter = 0;
            size_t pi = 0, pj = 0;
            while (pi < fi.size() && pj < fj.size()) {
                if (fi[pi] < fj[pj]) ++pi;
                else if (fj[pj] < fi[pi]) ++pj;
                else {
                    ++inter;
                    ++pi;
                    ++pj;
                }
            }
            double v = static_cast<double>(inter) /
                       static_cast<double>(std::min(fi.size(), fj.size()));
            a.at(i, j) = v;
            a.at(j, i) = v;
        }
    });
    return a;
}

AffinityMatrix scale_affinity(const AffinityMatrix& a, std::span<const size_t> counts) {
    if (counts.size() != a.n) throw std::invalid_argument("follower counts must align with matrix");
    for (size_t c : counts)
        if (c < 2) throw std::invalid_argument("scaling needs at least 2 followers per outlet");
    AffinityMatrix out = a;
    for (size_t i = 0; i < a.n; ++i)
        for (size_t j = i + 1; j < a.n; ++j) {
            double lo = std::log(static_cast<double>(std::min(counts[i], counts[j])));
            double hi = std::log(static_cast<double>(std::max(counts[i], counts[j])));
            double v = a.at(i, j) * lo / hi;
            out.at(i, j) = v;
            out.at(j, i) = v;
        }
    return out;
}

PrunedGraph prune(const AffinityMatrix& scaled, double w_min, size_t deg_min, bool iterate) {
    size_t n = scaled.n;
    PrunedGraph g;
    g.outlet_count = n;

    std::vector<uint8_t> keep(n, 1);
    std::vector<size_t> degree(n, 0);
    auto recount = [&]() {
        std::fill(degree.begin(), degree.end(), 0);
        for (size_t i = 0; i < n; ++i) {
            if (!keep[i]) continue;
            for (size_t j = i + 1; j < n; ++j)
                if (keep[j] && scaled.at(i, j) >= w_min) {
                    ++degree[i];
                    ++degree[j];
                }
        }
    };
    recount();
    for (;;) {
        bool changed = false;
        for (size_t i = 0; i < n; ++i)
            if (keep[i] && degree[i] < deg_min) {
                keep[i] = 0;
                changed = true;
            }
        if (!iterate || !changed) break;
        recount();
    }

    std::vector<uint32_t> local(n, UINT32_MAX);
    for (size_t i = 0; i < n; ++i) {
        if (keep[i]) {
            local[i] = static_cast<uint32_t>(g.kept.size());
            g.kept.push_back(i);
        } else {
            g.pruned.push_back(i);
        }
    }
    for (size_t i = 0; i < n; ++i) {
        if (!keep[i]) continue;
        for (size_t j = i + 1; j < n; ++j)
            if (keep[j] && scaled.at(i, j) >= w_min)
                g.edges.push_back({local[i], local[j], scaled.at(i, j)});
    }
    return g;
}

namespace {

struct SpinState {
    std::vector<int> label;
    std::vector<double> strength_by_label;
    double total_weight = 0.0;       // sum of edge weights
    std::vector<double> node_strength;
};

// Energy delta for moving node v from its label to `to`; w_to/w_from are the
// summed edge weights from v into those label sets (v excluded).
double spin_delta(const SpinState& st, double gamma, size_t v, int to, double w_from,
                  double w_to) {
    double s = st.node_strength[v];
    int from = st.label[v];
    double null_from = gamma * s * (st.strength_by_label[static_cast<size_t>(from)] - s) /
                       (2.0 * st.total_weight);
    double null_to = gamma * s * st.strength_by_label[static_cast<size_t>(to)] /
                     (2.0 * st.total_weight);
    return (w_from - null_from) - (w_to - null_to);
}

}  // namespace

SpinGlassPartition detect_clusters(const PrunedGraph& g, const SpinGlassOptions& opts) {
    size_t n = g.kept.size();
    if (n == 0) throw std::invalid_argument("spin glass on empty pruned graph");

    std::vector<std::vector<std::pair<uint32_t, double>>> adj(n);
    double total_w = 0.0;
    for (const WeightedEdge& e : g.edges) {
        adj[e.u].emplace_back(e.v, e.w);
        adj[e.v].emplace_back(e.u, e.w);
        total_w += e.w;
    }
    SpinGlassPartition out;
    if (total_w <= 0.0) {  // no edges: everything is its own community
        out.community.resize(n);
        for (size_t i = 0; i < n; ++i) out.community[i] = static_cast<int>(i);
        out.n_communities = n;
        out.trivial = n == 1;
        return out;
    }

    size_t q = std::min(opts.max_labels, n);
    SpinState st;
    st.label.resize(n);
    st.strength_by_label.assign(q, 0.0);
    st.node_strength.assign(n, 0.0);
    st.total_weight = total_w;
    for (size_t v = 0; v < n; ++v)
        for (auto& [u, w] : adj[v]) st.node_strength[v] += w;

    DetRng rng(opts.seed, 0);
    for (size_t v = 0; v < n; ++v) {
        st.label[v] = static_cast<int>(rng.below(q));
        st.strength_by_label[static_cast<size_t>(st.label[v])] += st.node_strength[v];
    }

    std::vector<double> w_by_label(q, 0.0);
    auto weights_of = [&](size_t v) -> std::vector<double>& {
        std::fill(w_by_label.begin(), w_by_label.end(), 0.0);
        for (auto& [u, w] : adj[v]) w_by_label[static_cast<size_t>(st.label[u])] += w;
        return w_by_label;
    };

    double energy = 0.0;  // relative; track deltas only
    double best_energy = 0.0;
    std::vector<int> best_label = st.label;

    // temperature calibrated so ~80% of initially uphill moves are accepted
    double t0;
    {
        double pos_sum = 0.0;
        size_t pos_n = 0;
        for (int probe = 0; probe < 256; ++probe) {
            size_t v = static_cast<size_t>(rng.below(n));
            int to = static_cast<int>(rng.below(q));
            if (to == st.label[v]) continue;
            auto& w = weights_of(v);
            double d = spin_delta(st, opts.gamma, v, to, w[static_cast<size_t>(st.label[v])],
                                  w[static_cast<size_t>(to)]);
            if (d > 0) {
                pos_sum += d;
                ++pos_n;
            }
        }
        t0 = pos_n > 0 ? (pos_sum / static_cast<double>(pos_n)) / std::log(1.0 / 0.8) : 1.0;
    }
    size_t sweeps = opts.sweeps_factor * n;
    double t_end = t0 * 1e-4;
    double cool = sweeps > 1 ? std::pow(t_end / t0, 1.0 / static_cast<double>(sweeps - 1)) : 1.0;

    double temp = t0;
    for (size_t sweep = 0; sweep < sweeps; ++sweep, temp *= cool) {
        for (size_t v = 0; v < n; ++v) {
            int to = static_cast<int>(rng.below(q));
            int from = st.label[v];
            if (to == from) continue;
            auto& w = weights_of(v);
            double d = spin_delta(st, opts.gamma, v, to, w[static_cast<size_t>(from)],
                                  w[static_cast<size_t>(to)]);
            if (d <= 0.0 || rng.uniform() < std::exp(-d / temp)) {
                st.label[v] = to;
                st.strength_by_label[static_cast<size_t>(from)] -= st.node_strength[v];
                st.strength_by_label[static_cast<size_t>(to)] += st.node_strength[v];
                energy += d;
                if (energy < best_energy) {
                    best_energy = energy;
                    best_label = st.label;
                }
            }
        }
    }

    // restore the best state, then greedy descent until stable
    st.label = best_label;
    std::fill(st.strength_by_label.begin(), st.strength_by_label.end(), 0.0);
    for (size_t v = 0; v < n; ++v)
        st.strength_by_label[static_cast<size_t>(st.label[v])] += st.node_strength[v];
    for (bool improved = true; improved;) {
        improved = false;
        for (size_t v = 0; v < n; ++v) {
            auto& w = weights_of(v);
            int from = st.label[v];
            int best_to = from;
            double best_d = 0.0;
            for (size_t to = 0; to < q; ++to) {
                if (static_cast<int>(to) == from) continue;
                double d = spin_delta(st, opts.gamma, v, static_cast<int>(to),
                                      w[static_cast<size_t>(from)], w[to]);
                if (d < best_d - 1e-15) {
                    best_d = d;
                    best_to = static_cast<int>(to);
                }
            }
            if (best_to != from) {
                st.label[v] = best_to;
                st.strength_by_label[static_cast<size_t>(from)] -= st.node_strength[v];
                st.strength_by_label[static_cast<size_t>(best_to)] += st.node_strength[v];
                improved = true;
            }
        }
    }

    // final energy from scratch, and dense relabeling by (size desc, min id)
    double h = 0.0;
    for (const WeightedEdge& e : g.edges)
        if (st.label[e.u] == st.label[e.v]) h -= e.w;
    for (size_t v = 0; v < n; ++v)
        for (size_t u = v + 1; u < n; ++u)
            if (st.label[u] == st.label[v])
                h += opts.gamma * st.node_strength[u] * st.node_strength[v] / (2.0 * total_w);

    std::vector<size_t> count(q, 0), first(q, n);
    for (size_t v = 0; v < n; ++v) {
        ++count[static_cast<size_t>(st.label[v])];
        first[static_cast<size_t>(st.label[v])] = std::min(first[static_cast<size_t>(st.label[v])], v);
    }
    std::vector<int> order;
    for (size_t c = 0; c < q; ++c)
        if (count[c] > 0) order.push_back(static_cast<int>(c));
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (count[static_cast<size_t>(a)] != count[static_cast<size_t>(b)])
            return count[static_cast<size_t>(a)] > count[static_cast<size_t>(b)];
        return first[static_cast<size_t>(a)] < first[static_cast<size_t>(b)];
    });
    std::vector<int> remap(q, -1);
    for (size_t i = 0; i < order.size(); ++i) remap[static_cast<size_t>(order[i])] = static_cast<int>(i);

    out.community.resize(n);
    for (size_t v = 0; v < n; ++v) out.community[v] = remap[static_cast<size_t>(st.label[v])];
    out.n_communities = order.size();
    out.energy = h;
    out.trivial = out.n_communities <= 1;
    return out;
}

ClusterLabels label_clusters(const SpinGlassPartition& partition, const PrunedGraph& g,
                             std::span<const std::string> outlet_names,
                             const std::map<std::string, std::vector<std::string>>& anchors) {
    auto lib_it = anchors.find("liberal");
    auto con_it = anchors.find("conservative");
    if (lib_it == anchors.end() || lib_it->second.empty() ||
        con_it == anchors.end() || con_it->second.empty())
        throw std::invalid_argument("anchors must include non-empty liberal and conservative lists");
    if (outlet_names.size() != g.outlet_count)
        throw std::invalid_argument("outlet names must align with the affinity matrix");

    auto outlet_index = [&](const std::string& name) -> size_t {
        for (size_t i = 0; i < outlet_names.size(); ++i)
            if (outlet_names[i] == name) return i;
        throw std::invalid_argument("anchor outlet not found: " + name);
    };

    // votes per detected community
    std::vector<size_t> lib_votes(partition.n_communities, 0),
        con_votes(partition.n_communities, 0);
    std::vector<uint32_t> local(g.outlet_count, UINT32_MAX);
    for (size_t k = 0; k < g.kept.size(); ++k) local[g.kept[k]] = static_cast<uint32_t>(k);
    auto vote = [&](const std::vector<std::string>& names, std::vector<size_t>& votes) {
        for (const auto& name : names) {
            size_t idx = outlet_index(name);
            if (local[idx] == UINT32_MAX) continue;  // anchor pruned away: no vote
            votes[static_cast<size_t>(partition.community[local[idx]])] += 1;
        }
    };
    vote(lib_it->second, lib_votes);
    vote(con_it->second, con_votes);

    std::vector<OutletLabel> comm_label(partition.n_communities, OutletLabel::mainstream);
    for (size_t c = 0; c < partition.n_communities; ++c) {
        if (lib_votes[c] == 0 && con_votes[c] == 0) continue;
        if (lib_votes[c] == con_votes[c])
            throw std::invalid_argument("anchor tie in community " + std::to_string(c) +
                                        ": cannot label");
        comm_label[c] = lib_votes[c] > con_votes[c] ? OutletLabel::liberal
                                                    : OutletLabel::conservative;
    }

    ClusterLabels labels;
    labels.label.assign(g.outlet_count, OutletLabel::pruned);
    for (size_t k = 0; k < g.kept.size(); ++k)
        labels.label[g.kept[k]] = comm_label[static_cast<size_t>(partition.community[k])];
    return labels;
}

std::vector<SlantScore> slant_scores(const AffinityMatrix& raw, const ClusterLabels& labels) {
    size_t n = raw.n;
    if (labels.label.size() != n)
        throw std::invalid_argument("labels must align with the affinity matrix");
    std::vector<size_t> lib, con;
    for (size_t j = 0; j < n; ++j) {
        if (labels.label[j] == OutletLabel::liberal) lib.push_back(j);
        else if (labels.label[j] == OutletLabel::conservative) con.push_back(j);
    }
    if (lib.empty() || con.empty())
        throw std::invalid_argument("slant scores need non-empty partisan clusters");

    std::vector<SlantScore> scores(n);
    for (size_t i = 0; i < n; ++i) {
        auto cluster_mean = [&](const std::vector<size_t>& cluster) {
            double sum = 0.0;
            size_t cnt = 0;
            for (size_t j : cluster)
                if (j != i) {
                    sum += raw.at(i, j);
                    ++cnt;
                }
            return cnt > 0 ? sum / static_cast<double>(cnt) : 0.0;
        };
        double overall = 0.0;
        for (size_t j = 0; j < n; ++j)
            if (j != i) overall += raw.at(i, j);
        overall /= static_cast<double>(n - 1);
        if (overall <= 0.0) {
            scores[i].defined = false;
            continue;
        }
        scores[i].score = -cluster_mean(lib) / overall + cluster_mean(con) / overall;
    }
    return scores;
}

}  // namespace dvg
