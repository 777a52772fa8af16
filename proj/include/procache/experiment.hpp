#pragma once

// Scenario files, cache-size / cost-factor sweeps, and their CSV and SVG
// outputs.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "procache/mobility.hpp"
#include "procache/model.hpp"

namespace procache {

// A scenario as stored on disk. When `mobility` is present the vehicles are
// a draw from it and can be redrawn for another seed.
struct ScenarioConfig {
    std::string name;
    Scenario scenario;
    std::optional<MobilityModel> mobility;

    // Copy of `scenario` with vehicles redrawn from `mobility` under `seed`
    // (unchanged vehicles when there is no mobility model).
    Scenario realize(std::uint64_t seed) const;

    bool operator==(const ScenarioConfig&) const = default;
};

// Parse a scenario document (JSON text). Throws ConfigError on syntax errors,
// unknown keys or wrongly typed fields, and ValidationError when the result
// breaks a model invariant.
ScenarioConfig parse_scenario_config(std::string_view text);
ScenarioConfig load_scenario_config(const std::filesystem::path& path);
Scenario load_scenario(const std::filesystem::path& path);

// Serialize in canonical units (bytes, meters, meters/second), reals in
// shortest round-trip form.
std::string dump_scenario_config(const ScenarioConfig& config);
void save_scenario_config(const ScenarioConfig& config, const std::filesystem::path& path);

enum class Scheme { reactive, noncoop_greedy, noncoop_optimal, coop_greedy, coop_optimal };

std::string_view to_string(Scheme scheme);
Scheme parse_scheme(std::string_view name);

struct SweepSpec {
    std::vector<std::size_t> cache_sizes;  // files per RSU
    std::vector<double> gammas{0.0};
    std::vector<Scheme> schemes;
    std::size_t replications = 20;
    std::uint64_t base_seed = 0;

    // Empty when valid.
    std::vector<std::string> violations() const;
};

SweepSpec parse_sweep_spec(std::string_view text);
SweepSpec load_sweep_spec(const std::filesystem::path& path);

struct SweepRow {
    Scheme scheme = Scheme::reactive;
    std::size_t cache_size = 0;
    double gamma = 0.0;
    std::size_t replication = 0;
    double per_file_delay = 0.0;  // mean over RSUs of W_s / sum_v cap, seconds per file
    double caching_gain = 0.0;    // mean over RSUs of the reactive minus scheme per-file delay
    double objective = 0.0;       // objective the scheme's solver reports
    std::size_t cached_count = 0; // items cached over all RSUs

    bool operator==(const SweepRow&) const = default;
};

struct SkippedCell {
    Scheme scheme = Scheme::reactive;
    std::size_t cache_size = 0;
    double gamma = 0.0;
    std::size_t replication = 0;
    std::string reason;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    std::vector<SkippedCell> skipped;
};

// Every (scheme, cache size, gamma, replication) cell. Replication r redraws
// the vehicles with seed base_seed + r. Per-file delays and gains for every
// scheme use the cooperative information model, since vehicles hold what
// upstream RSUs delivered whether or not the RSUs share that knowledge.
// Rows come back in canonical order: scheme, gamma, cache size, replication.
// `threads` = 0 picks the hardware concurrency.
SweepResult run_sweep(const ScenarioConfig& config, const SweepSpec& spec, unsigned threads = 0);

// Percentage caching gain: (reactive - proactive) / reactive * 100.
double percentage_gain(double reactive_per_file, double proactive_per_file);

inline constexpr std::string_view kCsvHeader =
    "scheme,cache_size,gamma,replication,per_file_delay,caching_gain,objective,cached_count";

std::string format_csv(const std::vector<SweepRow>& rows);
void emit_csv(const std::vector<SweepRow>& rows, const std::filesystem::path& path);
std::vector<SweepRow> parse_csv(std::string_view text);
std::vector<SweepRow> read_csv(const std::filesystem::path& path);

enum class Metric { per_file_delay, objective };

struct SeriesPoint {
    std::size_t cache_size = 0;
    double mean = 0.0;
    double stddev = 0.0;  // sample standard deviation, 0 for a single replication
    std::size_t count = 0;
};

struct Series {
    Scheme scheme = Scheme::reactive;
    std::optional<double> gamma;  // empty when the metric does not depend on gamma for this scheme
    std::vector<SeriesPoint> points;
};

// Mean and spread over replications, one series per scheme (and gamma where it matters).
std::vector<Series> aggregate(const std::vector<SweepRow>& rows, Metric metric);

std::string render_svg(const std::vector<SweepRow>& rows, Metric metric, std::string_view title = {});
void emit_plot(const std::vector<SweepRow>& rows, const std::filesystem::path& path, Metric metric,
               std::string_view title = {});

// Sidecar JSON describing defaults the sweep relied on and any skipped cells.
std::string sweep_metadata(const ScenarioConfig& config, const SweepSpec& spec, const SweepResult& result);

}  // namespace procache
