#include "diversigraph/report.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "diversigraph/util.hpp"

namespace dvg {

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc()) throw std::runtime_error("double formatting failed");
    return std::string(buf, ptr);
}

uint64_t fnv1a64(std::span<const unsigned char> bytes) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char b : bytes) {
        h ^= b;
        h *= 0x100000001b3ULL;
    }
    return h;
}

uint64_t fnv1a64_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for digest: " + path);
    uint64_t h = 0xcbf29ce484222325ULL;
    char buf[1 << 16];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        std::streamsize got = in.gcount();
        for (std::streamsize i = 0; i < got; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ULL;
        }
        if (got < static_cast<std::streamsize>(sizeof(buf))) break;
    }
    return h;
}

std::vector<std::pair<std::string, std::string>>
parse_config_file(const std::string& path, std::span<const std::string> allowed) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::vector<std::pair<std::string, std::string>> out;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view sv = line;
        while (!sv.empty() && (sv.back() == '\r' || sv.back() == ' ')) sv.remove_suffix(1);
        while (!sv.empty() && (sv.front() == ' ' || sv.front() == '\t')) sv.remove_prefix(1);
        if (sv.empty() || sv.front() == '#') continue;
        auto eq = sv.find('=');
        if (eq == std::string_view::npos)
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": expected key=value, got: " + std::string(sv));
        std::string key(sv.substr(0, eq));
        while (!key.empty() && key.back() == ' ') key.pop_back();
        std::string_view val = sv.substr(eq + 1);
        while (!val.empty() && val.front() == ' ') val.remove_prefix(1);
        bool known = false;
        for (const auto& k : allowed)
            if (k == key) {
                known = true;
                break;
            }
        if (!known)
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": unknown config key: " + std::string(sv));
        out.emplace_back(std::move(key), std::string(val));
    }
    return out;
}

void RunManifest::add_input(const std::string& path) {
    char hex[17];
    std::snprintf(hex, sizeof(hex), "%016llx",
                  static_cast<unsigned long long>(fnv1a64_file(path)));
    input_digests.emplace_back(path, hex);
}

void write_manifest(const RunManifest& manifest, const std::string& out_path) {
    nlohmann::ordered_json j;
    j["subcommand"] = manifest.subcommand;
    nlohmann::ordered_json cfg = nlohmann::ordered_json::object();
    for (const auto& [k, v] : manifest.config) cfg[k] = v;
    j["config"] = cfg;
    nlohmann::ordered_json digests = nlohmann::ordered_json::object();
    for (const auto& [k, v] : manifest.input_digests) digests[k] = v;
    j["input_digests"] = digests;
    j["tool_version"] = manifest.tool_version;
    j["wall_seconds"] = manifest.wall_seconds;
    std::ofstream out(out_path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write manifest: " + out_path);
    out << j.dump(2) << "\n";
}

void write_svg_matrix(const std::string& path, std::span<const std::pair<int, int>> points,
                      size_t n) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write svg: " + path);
    const double size = 800.0;
    double scale = n > 1 ? size / static_cast<double>(n) : size;
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"800\" "
           "viewBox=\"0 0 800 800\">\n"
        << "<rect width=\"800\" height=\"800\" fill=\"white\"/>\n";
    double r = std::max(0.5, scale * 0.4);
    for (auto [i, j] : points) {
        double cx = (static_cast<double>(j) - 0.5) * scale;
        double cy = (static_cast<double>(i) - 0.5) * scale;
        out << "<circle cx=\"" << format_double(cx) << "\" cy=\"" << format_double(cy)
            << "\" r=\"" << format_double(r) << "\" fill=\"black\"/>\n";
    }
    out << "</svg>\n";
}

void write_svg_xy(const std::string& path, std::span<const std::pair<double, double>> points,
                  const std::string& x_label, const std::string& y_label) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write svg: " + path);
    double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
    if (!points.empty()) {
        xmin = xmax = points[0].first;
        ymin = ymax = points[0].second;
        for (auto [x, y] : points) {
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
            ymin = std::min(ymin, y);
            ymax = std::max(ymax, y);
        }
    }
    if (xmax <= xmin) xmax = xmin + 1;
    if (ymax <= ymin) ymax = ymin + 1;
    const double w = 800, h = 600, pad = 50;
    auto sx = [&](double x) { return pad + (x - xmin) / (xmax - xmin) * (w - 2 * pad); };
    auto sy = [&](double y) { return h - pad - (y - ymin) / (ymax - ymin) * (h - 2 * pad); };
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"600\" "
           "viewBox=\"0 0 800 600\">\n"
        << "<rect width=\"800\" height=\"600\" fill=\"white\"/>\n"
        << "<text x=\"400\" y=\"590\" text-anchor=\"middle\" font-size=\"14\">" << x_label
        << "</text>\n"
        << "<text x=\"15\" y=\"300\" text-anchor=\"middle\" font-size=\"14\" "
           "transform=\"rotate(-90 15 300)\">"
        << y_label << "</text>\n";
    for (auto [x, y] : points)
        out << "<circle cx=\"" << format_double(sx(x)) << "\" cy=\"" << format_double(sy(y))
            << "\" r=\"3\" fill=\"black\" fill-opacity=\"0.6\"/>\n";
    out << "</svg>\n";
}

namespace {

const char* kSummaryHeader =
    "account_id,out_mean,out_sd,out_count,out_quality_mean,"
    "in_mean,in_sd,in_count,in_quality_mean,outdegree,indegree,"
    "clustering_coefficient,retweet_count";

}  // namespace

void write_summaries_csv(const std::string& path, std::span<const AccountSummary> summaries,
                         std::span<const uint8_t> include) {
    if (!include.empty() && include.size() != summaries.size())
        throw std::invalid_argument("include mask must align with summaries");
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write summaries: " + path);
    out << kSummaryHeader << "\n";
    for (size_t i = 0; i < summaries.size(); ++i) {
        if (!include.empty() && !include[i]) continue;
        const AccountSummary& s = summaries[i];
        out << s.account_id << ',' << format_double(s.out_mean) << ',' << format_double(s.out_sd)
            << ',' << s.out_count << ',' << format_double(s.out_quality_mean) << ','
            << format_double(s.in_mean) << ',' << format_double(s.in_sd) << ',' << s.in_count
            << ',' << format_double(s.in_quality_mean) << ',' << s.outdegree << ','
            << s.indegree << ',' << format_double(s.clustering) << ',' << s.retweet_count
            << "\n";
    }
}

std::vector<AccountSummary> read_summaries_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open summaries: " + path);
    std::vector<AccountSummary> out;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        if (lineno == 1) {
            if (line.rfind("account_id", 0) != 0)
                throw std::runtime_error(path + ": missing summaries header");
            continue;
        }
        std::istringstream ss(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (fields.size() != 13)
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected 13 columns");
        AccountSummary s;
        s.account_id = std::stoll(fields[0]);
        s.out_mean = std::stod(fields[1]);
        s.out_sd = std::stod(fields[2]);
        s.out_count = std::stoull(fields[3]);
        s.out_quality_mean = std::stod(fields[4]);
        s.in_mean = std::stod(fields[5]);
        s.in_sd = std::stod(fields[6]);
        s.in_count = std::stoull(fields[7]);
        s.in_quality_mean = std::stod(fields[8]);
        s.outdegree = std::stoull(fields[9]);
        s.indegree = std::stoull(fields[10]);
        s.clustering = std::stod(fields[11]);
        s.retweet_count = std::stoull(fields[12]);
        out.push_back(s);
    }
    return out;
}

void write_news_csv(const std::string& path, std::span<const NewsTweet> news) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write news tweets: " + path);
    out << "tweet_id,author_id,timestamp,domain_id,slant,quality,retweet\n";
    for (const NewsTweet& t : news)
        out << t.tweet_id << ',' << t.author_id << ',' << t.timestamp << ',' << t.domain_id
            << ',' << format_double(t.slant) << ',' << format_double(t.quality) << ','
            << (t.retweet ? 1 : 0) << "\n";
}

std::vector<NewsTweet> read_news_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open news tweets: " + path);
    std::vector<NewsTweet> out;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        if (lineno == 1 && line.rfind("tweet_id", 0) == 0) continue;
        std::istringstream ss(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (fields.size() != 7)
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected 7 columns");
        NewsTweet t;
        t.tweet_id = fields[0];
        t.author_id = std::stoll(fields[1]);
        t.timestamp = std::stoll(fields[2]);
        t.domain_id = static_cast<uint32_t>(std::stoul(fields[3]));
        t.slant = std::stod(fields[4]);
        t.quality = std::stod(fields[5]);
        t.retweet = fields[6] == "1";
        out.push_back(std::move(t));
    }
    return out;
}

void write_visits_csv(const std::string& path, std::span<const VisitRecord> visits) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write visits: " + path);
    out << "user_id,site_id,conservative\n";
    for (const VisitRecord& v : visits)
        out << v.user_id << ',' << v.site_id << ',' << (v.conservative ? 1 : 0) << "\n";
}

}  // namespace dvg
