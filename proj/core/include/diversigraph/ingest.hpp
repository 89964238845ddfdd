#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "diversigraph/graph.hpp"

namespace dvg {

struct TweetRecord {
    std::string tweet_id;
    NodeId author_id = 0;
    int64_t timestamp = 0;
    std::vector<std::string> urls;
    bool retweet = false;
};

/// One matched news link. `slant`/`quality` duplicate the table entry so the
/// record is self-contained downstream.
struct NewsTweet {
    std::string tweet_id;
    NodeId author_id = 0;
    int64_t timestamp = 0;
    uint32_t domain_id = 0;
    double slant = 0.0;
    double quality = 0.0;
    bool retweet = false;
};

/// Host (+ optional path prefix) patterns mapped to slant/quality. Patterns
/// are normalized on load; a URL is matched to the longest matching pattern,
/// so host+path entries beat the bare host.
class SlantTable {
public:
    struct Entry {
        std::string host;   // lowercase, no scheme/www
        std::string path;   // "" or "/prefix"
        double slant = 0.0;
        double quality = 0.0;
        std::string label;
    };

    void add(std::string_view pattern, double slant, double quality, std::string label);
    static SlantTable load_csv(const std::string& path);
    static SlantTable load_csv(std::istream& in, const std::string& name);

    /// Longest-pattern match against a normalized host and path; nullopt when
    /// nothing matches.
    std::optional<uint32_t> match(std::string_view host, std::string_view path) const;

    const Entry& entry(uint32_t id) const { return entries_[id]; }
    size_t size() const { return entries_.size(); }

private:
    std::vector<Entry> entries_;
    std::unordered_map<std::string, std::vector<uint32_t>> by_host_;
};

/// Offline redirect expansion: short URL -> final URL lookups applied to a
/// fixed point. Resolving a URL that is not a key returns it unchanged under
/// the default passthrough policy.
struct ResolverCache {
    enum class MissPolicy { fail, drop, passthrough };

    std::unordered_map<std::string, std::string> redirects;
    MissPolicy miss = MissPolicy::passthrough;

    static ResolverCache load_tsv(const std::string& path,
                                  MissPolicy miss = MissPolicy::passthrough);

    struct Resolution {
        std::string url;
        bool dropped = false;
        bool cycle = false;
    };
    Resolution resolve(const std::string& url) const;
};

struct ParseCounters {
    size_t lines = 0;
    size_t parsed = 0;
    size_t malformed = 0;
};

/// Parses JSONL events (keys tweet_id, author_id, timestamp, urls, optional
/// retweet). Malformed lines are counted and skipped; input order preserved.
std::vector<TweetRecord> parse_events(std::istream& in, ParseCounters& counters);
/// Throws when the path cannot be opened.
std::vector<TweetRecord> parse_events_file(const std::string& path, ParseCounters& counters);

struct ProcessCounters {
    size_t urls = 0;        // raw URLs seen
    size_t matched = 0;     // NewsTweets emitted
    size_t unmatched = 0;   // resolved+normalized but no table pattern
    size_t cycles = 0;      // dropped by redirect cycle
    size_t miss_drops = 0;  // dropped by MissPolicy::drop
};

/// PROCESS-URLS: resolve each raw URL through the cache to a fixed point,
/// percent-decode, normalize (drop scheme/www, lowercase host, strip
/// query/fragment), then longest-pattern match. Emits one NewsTweet per
/// matched URL; output order follows input order regardless of `threads`.
std::vector<NewsTweet> process_urls(std::span<const TweetRecord> records,
                                    const ResolverCache& resolver,
                                    const SlantTable& table,
                                    ProcessCounters& counters,
                                    int threads = 1);

/// Keeps records with timestamp within `max_age_days` of `as_of`.
std::vector<TweetRecord> filter_by_age(std::span<const TweetRecord> records,
                                       int64_t as_of, double max_age_days);

struct EdgeCounters {
    size_t lines = 0;
    size_t edges = 0;       // unique arcs in the graph
    size_t duplicates = 0;
    size_t self_loops = 0;
    size_t bad_lines = 0;
};

/// Two-column TSV (followee_id, follower_id). Nodes are the union of edge
/// endpoints and `extra_nodes` (e.g. event authors).
FollowerGraph load_edges(std::istream& in, std::span<const NodeId> extra_nodes,
                         EdgeCounters& counters);
FollowerGraph load_edges_file(const std::string& path, std::span<const NodeId> extra_nodes,
                              EdgeCounters& counters);

// URL helpers (exposed for tests and the resolver tool).
std::string percent_decode(std::string_view s);
struct UrlParts {
    std::string host;  // lowercase, no scheme, no leading www.
    std::string path;  // starts with '/' or empty; query/fragment removed
};
UrlParts split_url(std::string_view url);
/// Canonical host+path form used for matching; idempotent on its own output
/// for inputs without residual percent-escapes.
std::string normalize_url(std::string_view url);

}  // namespace dvg
