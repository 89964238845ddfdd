#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "diversigraph/slantstats.hpp"

namespace dvg {

inline constexpr const char* kToolVersion = "diversigraph 0.1.0";

/// Ordered key=value pairs from a config file ('#' comments, blank lines
/// skipped). Keys outside `allowed` are fatal, reporting the offending line.
std::vector<std::pair<std::string, std::string>>
parse_config_file(const std::string& path, std::span<const std::string> allowed);

/// Reproducibility sidecar written next to every report. The wall clock is
/// the only field expected to differ between identical runs.
struct RunManifest {
    std::string subcommand;
    std::vector<std::pair<std::string, std::string>> config;  // resolved key-values
    std::vector<std::pair<std::string, std::string>> input_digests;  // path -> fnv1a64 hex
    std::string tool_version = kToolVersion;
    double wall_seconds = 0.0;

    void add_input(const std::string& path);
};

void write_manifest(const RunManifest& manifest, const std::string& out_path);

/// Minimal SVG scatter: one circle per point, no timestamp, byte-stable.
/// Points are (rank u, rank v) over 1..n.
void write_svg_matrix(const std::string& path, std::span<const std::pair<int, int>> points,
                      size_t n);
/// Generic x/y scatter (e.g. slant score vs ln followers).
void write_svg_xy(const std::string& path, std::span<const std::pair<double, double>> points,
                  const std::string& x_label, const std::string& y_label);

void write_summaries_csv(const std::string& path, std::span<const AccountSummary> summaries,
                         std::span<const uint8_t> include);
std::vector<AccountSummary> read_summaries_csv(const std::string& path);

void write_news_csv(const std::string& path, std::span<const NewsTweet> news);
std::vector<NewsTweet> read_news_csv(const std::string& path);

void write_visits_csv(const std::string& path, std::span<const VisitRecord> visits);

}  // namespace dvg
