#include "diversigraph/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include <json.hpp>

#include "diversigraph/util.hpp"

namespace dvg {

namespace {

bool parse_int64(std::string_view s, int64_t& out) {
    if (s.empty()) return false;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

int hex_digit(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    // Minimal CSV: quoted fields with doubled quotes, comma separator.
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

}  // namespace

std::string percent_decode(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '%' && i + 2 < s.size()) {
            int hi = hex_digit(s[i + 1]);
            int lo = hex_digit(s[i + 2]);
            if (hi >= 0 && lo >= 0) {
                out += static_cast<char>(hi * 16 + lo);
                i += 2;
                continue;
            }
        }
        out += s[i];
    }
    return out;
}

UrlParts split_url(std::string_view url) {
    std::string_view rest = trim(url);
    auto scheme = rest.find("://");
    if (scheme != std::string_view::npos) rest.remove_prefix(scheme + 3);
    else if (rest.starts_with("//")) rest.remove_prefix(2);

    auto slash = rest.find('/');
    std::string_view host = slash == std::string_view::npos ? rest : rest.substr(0, slash);
    std::string_view path = slash == std::string_view::npos ? std::string_view{} : rest.substr(slash);

    // host never carries query/fragment/userinfo/port in our inputs, but be
    // tolerant of the first two.
    auto cut = host.find_first_of("?#");
    if (cut != std::string_view::npos) host = host.substr(0, cut);
    cut = path.find_first_of("?#");
    if (cut != std::string_view::npos) path = path.substr(0, cut);

    UrlParts parts;
    parts.host.reserve(host.size());
    for (char c : host) parts.host += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (parts.host.starts_with("www.")) parts.host.erase(0, 4);
    parts.path.assign(path);
    while (parts.path.size() > 1 && parts.path.back() == '/') parts.path.pop_back();
    if (parts.path == "/") parts.path.clear();
    return parts;
}

std::string normalize_url(std::string_view url) {
    UrlParts p = split_url(percent_decode(url));
    return p.host + p.path;
}

void SlantTable::add(std::string_view pattern, double slant, double quality,
                     std::string label) {
    UrlParts p = split_url(pattern);
    if (p.host.empty())
        throw std::invalid_argument("slant table pattern has no host: " + std::string(pattern));
    for (uint32_t id : by_host_[p.host])
        if (entries_[id].path == p.path)
            throw std::invalid_argument("duplicate slant table pattern: " + p.host + p.path);
    Entry e;
    e.host = p.host;
    e.path = p.path;
    e.slant = slant;
    e.quality = quality;
    e.label = std::move(label);
    uint32_t id = static_cast<uint32_t>(entries_.size());
    by_host_[e.host].push_back(id);
    entries_.push_back(std::move(e));
}

SlantTable SlantTable::load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open slant table: " + path);
    return load_csv(in, path);
}

SlantTable SlantTable::load_csv(std::istream& in, const std::string& name) {
    SlantTable table;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() < 2)
            throw std::runtime_error(name + ":" + std::to_string(lineno) +
                                     ": expected pattern,slant[,quality[,label]]");
        double slant = 0.0;
        auto f1 = trim(fields[1]);
        auto [p, ec] = std::from_chars(f1.data(), f1.data() + f1.size(), slant);
        if (ec != std::errc() || p != f1.data() + f1.size()) {
            if (lineno == 1) continue;  // header row
            throw std::runtime_error(name + ":" + std::to_string(lineno) +
                                     ": slant is not a number: " + std::string(f1));
        }
        double quality = 0.0;
        if (fields.size() >= 3 && !trim(fields[2]).empty()) {
            auto f2 = trim(fields[2]);
            auto [p2, ec2] = std::from_chars(f2.data(), f2.data() + f2.size(), quality);
            if (ec2 != std::errc() || p2 != f2.data() + f2.size())
                throw std::runtime_error(name + ":" + std::to_string(lineno) +
                                         ": quality is not a number: " + std::string(f2));
        }
        std::string label = fields.size() >= 4 ? std::string(trim(fields[3])) : std::string{};
        table.add(trim(fields[0]), slant, quality, std::move(label));
    }
    return table;
}

std::optional<uint32_t> SlantTable::match(std::string_view host, std::string_view path) const {
    std::optional<uint32_t> best;
    size_t best_len = 0;
    std::string candidate(host);
    for (;;) {
        auto it = by_host_.find(candidate);
        if (it != by_host_.end()) {
            for (uint32_t id : it->second) {
                const Entry& e = entries_[id];
                if (!e.path.empty()) {
                    if (!path.starts_with(e.path)) continue;
                    if (path.size() > e.path.size() && path[e.path.size()] != '/') continue;
                }
                size_t len = e.host.size() + e.path.size();
                if (!best || len > best_len) {
                    best = id;
                    best_len = len;
                }
            }
        }
        // climb to the parent domain for subdomain matches
        auto dot = candidate.find('.');
        if (dot == std::string::npos) break;
        candidate.erase(0, dot + 1);
        if (candidate.find('.') == std::string::npos) break;  // never match bare TLDs
    }
    return best;
}

ResolverCache ResolverCache::load_tsv(const std::string& path, MissPolicy miss) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open resolver cache: " + path);
    ResolverCache cache;
    cache.miss = miss;
    std::string line;
    while (std::getline(in, line)) {
        auto sv = trim(line);
        if (sv.empty()) continue;
        auto tab = sv.find('\t');
        if (tab == std::string_view::npos)
            throw std::runtime_error("resolver cache line is not two-column TSV: " + line);
        cache.redirects.emplace(std::string(trim(sv.substr(0, tab))),
                                std::string(trim(sv.substr(tab + 1))));
    }
    return cache;
}

ResolverCache::Resolution ResolverCache::resolve(const std::string& url) const {
    Resolution r;
    auto it = redirects.find(url);
    if (it == redirects.end()) {
        switch (miss) {
            case MissPolicy::passthrough:
                r.url = url;
                return r;
            case MissPolicy::drop:
                r.dropped = true;
                return r;
            case MissPolicy::fail:
                throw std::runtime_error("resolver cache miss: " + url);
        }
    }
    std::unordered_set<std::string> seen{url};
    std::string cur = url;
    while (true) {
        auto next_it = redirects.find(cur);
        if (next_it == redirects.end()) break;
        const std::string& next = next_it->second;
        if (next == cur) break;  // self-mapping marks a final URL
        if (seen.count(next)) {
            r.cycle = true;
            r.dropped = true;
            return r;
        }
        seen.insert(next);
        cur = next;
    }
    r.url = cur;
    return r;
}

std::vector<TweetRecord> parse_events(std::istream& in, ParseCounters& counters) {
    using nlohmann::json;
    std::vector<TweetRecord> out;
    std::string line;
    while (std::getline(in, line)) {
        auto sv = trim(line);
        if (sv.empty()) continue;
        ++counters.lines;
        json j = json::parse(sv, nullptr, false);
        if (j.is_discarded() || !j.is_object()) {
            ++counters.malformed;
            continue;
        }
        TweetRecord rec;
        bool ok = true;
        auto get_id = [&](const char* key, int64_t& dest) {
            auto it = j.find(key);
            if (it == j.end()) return false;
            if (it->is_number_integer()) {
                dest = it->get<int64_t>();
                return true;
            }
            if (it->is_string()) return parse_int64(it->get_ref<const std::string&>(), dest);
            return false;
        };
        if (auto it = j.find("tweet_id"); it != j.end()) {
            if (it->is_string()) rec.tweet_id = it->get<std::string>();
            else if (it->is_number_integer()) rec.tweet_id = std::to_string(it->get<int64_t>());
            else ok = false;
        } else {
            ok = false;
        }
        ok = ok && get_id("author_id", rec.author_id);
        ok = ok && get_id("timestamp", rec.timestamp);
        if (auto it = j.find("urls"); ok && it != j.end() && it->is_array()) {
            for (auto& u : *it) {
                if (!u.is_string()) {
                    ok = false;
                    break;
                }
                rec.urls.push_back(u.get<std::string>());
            }
        } else {
            ok = false;
        }
        if (auto it = j.find("retweet"); it != j.end()) {
            if (it->is_boolean()) rec.retweet = it->get<bool>();
            else ok = false;
        }
        if (!ok) {
            ++counters.malformed;
            continue;
        }
        ++counters.parsed;
        out.push_back(std::move(rec));
    }
    return out;
}

std::vector<TweetRecord> parse_events_file(const std::string& path, ParseCounters& counters) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open events file: " + path);
    return parse_events(in, counters);
}

std::vector<NewsTweet> process_urls(std::span<const TweetRecord> records,
                                    const ResolverCache& resolver,
                                    const SlantTable& table,
                                    ProcessCounters& counters,
                                    int threads) {
    if (table.size() == 0) throw std::invalid_argument("slant table is empty");

    std::vector<std::vector<NewsTweet>> per_record(records.size());
    std::vector<ProcessCounters> per_chunk;
    constexpr size_t kChunk = 1024;
    size_t n_chunks = records.empty() ? 0 : (records.size() + kChunk - 1) / kChunk;
    per_chunk.resize(n_chunks);

    parallel_for(records.size(), threads, [&](size_t begin, size_t end) {
        ProcessCounters& local = per_chunk[begin / kChunk];
        for (size_t i = begin; i < end; ++i) {
            const TweetRecord& rec = records[i];
            for (const std::string& raw : rec.urls) {
                ++local.urls;
                auto res = resolver.resolve(raw);
                if (res.dropped) {
                    if (res.cycle) ++local.cycles;
                    else ++local.miss_drops;
                    continue;
                }
                UrlParts parts = split_url(percent_decode(res.url));
                auto id = table.match(parts.host, parts.path);
                if (!id) {
                    ++local.unmatched;
                    continue;
                }
                const auto& entry = table.entry(*id);
                NewsTweet nt;
                nt.tweet_id = rec.tweet_id;
                nt.author_id = rec.author_id;
                nt.timestamp = rec.timestamp;
                nt.domain_id = *id;
                nt.slant = entry.slant;
                nt.quality = entry.quality;
                nt.retweet = rec.retweet;
                per_record[i].push_back(std::move(nt));
                ++local.matched;
            }
        }
    }, kChunk);

    for (const auto& c : per_chunk) {
        counters.urls += c.urls;
        counters.matched += c.matched;
        counters.unmatched += c.unmatched;
        counters.cycles += c.cycles;
        counters.miss_drops += c.miss_drops;
    }
    std::vector<NewsTweet> out;
    out.reserve(counters.matched);
    for (auto& v : per_record)
        for (auto& nt : v) out.push_back(std::move(nt));
    return out;
}

std::vector<TweetRecord> filter_by_age(std::span<const TweetRecord> records,
                                       int64_t as_of, double max_age_days) {
    int64_t cutoff = as_of - static_cast<int64_t>(max_age_days * 86400.0);
    std::vector<TweetRecord> out;
    for (const auto& r : records)
        if (r.timestamp >= cutoff) out.push_back(r);
    return out;
}

FollowerGraph load_edges(std::istream& in, std::span<const NodeId> extra_nodes,
                         EdgeCounters& counters) {
    GraphBuilder builder;
    for (NodeId id : extra_nodes) builder.add_node(id);
    std::string line;
    while (std::getline(in, line)) {
        auto sv = trim(line);
        if (sv.empty()) continue;
        ++counters.lines;
        auto sep = sv.find_first_of("\t ");
        if (sep == std::string_view::npos) {
            ++counters.bad_lines;
            continue;
        }
        int64_t followee = 0, follower = 0;
        if (!parse_int64(trim(sv.substr(0, sep)), followee) ||
            !parse_int64(trim(sv.substr(sep + 1)), follower)) {
            ++counters.bad_lines;
            continue;
        }
        builder.add_edge(followee, follower);
    }
    FollowerGraph g = builder.build();
    counters.edges = g.edge_count();
    counters.duplicates = builder.duplicate_edges();
    counters.self_loops = builder.self_loops();
    return g;
}

FollowerGraph load_edges_file(const std::string& path, std::span<const NodeId> extra_nodes,
                              EdgeCounters& counters) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open edges file: " + path);
    return load_edges(in, extra_nodes, counters);
}

}  // namespace dvg
