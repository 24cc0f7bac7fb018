#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fedmesh/endpoint.hpp"
#include "fedmesh/mediator.hpp"

namespace fedmesh {

/// exp(mean(ln v)): computed in log space so huge products cannot overflow.
/// Throws std::invalid_argument on an empty list or a non-positive value.
double geometric_mean(const std::vector<double>& values);

enum class CachingMode { On, Off, Both };
enum class Scenario { Local, Hybrid };

/// Benchmark driver settings. Paths in the config file resolve against the
/// file's directory.
struct BenchConfig {
    std::filesystem::path federation;
    std::vector<std::filesystem::path> corpus;  // .rq files or directories of them
    int warmup_runs = 5;
    int measured_runs = 5;
    CachingMode caching = CachingMode::On;
    Scenario scenario = Scenario::Local;
    /// Applied on top of the federation's configured latencies when the
    /// scenario is hybrid; keys are member ids.
    std::map<std::string, LatencySpec> hybrid_latency;
    std::size_t parallelism = 16;
    bool skip_unreachable = false;
    std::filesystem::path output_json;      // empty = skip
    std::filesystem::path output_csv;      // empty = skip
    std::filesystem::path output_markdown;  // empty = skip

    static BenchConfig from_file(const std::filesystem::path& path);
    static BenchConfig from_json(const std::string& json_text,
                                 const std::filesystem::path& base_dir);
};

/// One benchmark measurement: a query under one caching mode. Times are
/// milliseconds rounded to 3 decimals; request counts come from the last
/// measured run (the steady state).
struct BenchEntry {
    std::string query;
    std::string caching;  // "on" | "off"
    std::vector<double> run_ms;
    double geo_mean_ms = 0.0;
    std::uint64_t result_rows = 0;
    std::uint64_t select_requests = 0;
    std::uint64_t ask_requests = 0;
    std::uint64_t ask_saved = 0;
    std::map<std::string, std::uint64_t> per_endpoint_select;
    std::map<std::string, std::uint64_t> per_endpoint_ask;
    /// Cache-off ASK count minus cache-on ASK count; present when both arms
    /// ran cleanly. Stamped on both of the query's rows.
    std::optional<std::uint64_t> savings;
    std::string error;  // empty = success

    std::uint64_t total_requests() const { return select_requests + ask_requests; }
};

/// Fresh source-selection statistics for one query: relevant-endpoint counts
/// across its patterns.
struct SelectionEntry {
    std::string query;
    std::size_t pattern_count = 0;
    std::size_t min = 0;
    std::size_t max = 0;
    double avg = 0.0;
};

struct Report {
    std::string scenario;
    std::string federation;  // config path as given
    std::vector<BenchEntry> entries;
    std::vector<SelectionEntry> selection;
};

/// (name, query text) pairs, sorted by name; a directory contributes every
/// *.rq file inside, a file contributes itself (name = stem).
std::vector<std::pair<std::string, std::string>> load_corpus(
    const std::vector<std::filesystem::path>& paths);

/// Runs the full protocol: per query and caching arm, warmup runs then
/// measured runs with counters snapshotted around each; a failing query gets
/// an error entry and the run continues. Writes any configured output files.
Report run_benchmark(const BenchConfig& config);

/// Per-query min/max/avg relevant endpoints from an uncached selection.
std::vector<SelectionEntry> source_selection_report(
    const std::vector<std::pair<std::string, std::string>>& corpus,
    Federation& federation);

std::string report_json(const Report& report);
Report report_from_json(const std::string& text);

/// One row per (query, scenario, caching mode); numeric fields round-trip.
std::string report_csv(const Report& report);
Report report_from_csv(const std::string& text);

std::string report_markdown(const Report& report);

/// Writes the formats whose output paths are set in the config.
void emit_report(const Report& report, const BenchConfig& config);

}  // namespace fedmesh
