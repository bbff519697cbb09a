#pragma once

#include "mome/algorithms.hpp"
#include "mome/archive.hpp"
#include "mome/core.hpp"
#include "mome/domains.hpp"
#include "mome/metrics.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace mome {

/// Everything that defines an experiment.
struct RunConfig {
    std::string problem = "rastrigin_proj";
    std::string algorithm = "mome";
    std::optional<std::size_t> search_dim;
    AlgorithmConfig algo;
    std::uint64_t total_evaluations = 1'000'000;
    std::vector<std::uint64_t> seeds{0};
    std::optional<FitnessVector> reference;
    /// Generations between metric rows.
    std::uint64_t log_interval = 10;
    std::filesystem::path output_dir = "results";

    // Execution knobs; none of these change results, so they are left out of
    // the config hash.
    unsigned threads = 1;
    unsigned jobs = 1;
    bool record_wall_time = false;
    bool include_genotype = false;

    /// Throws ConfigError on inconsistent values.
    auto validate() const -> void;
};

/// Named presets: "smoke", "desk", "paper".
auto apply_preset(RunConfig& cfg, const std::string& name) -> void;

/// Flat "section.key" → value table over RunConfig. The same keys are used in
/// INI files ([section] key = value) and as `--section.key` CLI overrides.
class ConfigKeys {
public:
    using Setter = std::function<void(RunConfig&, const std::string&)>;
    using Getter = std::function<std::string(const RunConfig&)>;

    struct Entry {
        std::string help;
        Setter set;
        Getter get;
    };

    [[nodiscard]] static auto instance() -> const ConfigKeys&;
    /// Throws ConfigError on unknown keys or unparsable values.
    auto apply(RunConfig& cfg, const std::string& key, const std::string& value) const -> void;
    [[nodiscard]] auto entries() const noexcept -> const std::map<std::string, Entry>& { return entries_; }

private:
    ConfigKeys();
    std::map<std::string, Entry> entries_;
};

/// Reads an INI file into "section.key" → value pairs. Throws ConfigError.
[[nodiscard]] auto read_config_file(const std::filesystem::path& path) -> std::map<std::string, std::string>;

/// Canonical JSON echo of the config (execution knobs included).
[[nodiscard]] auto config_to_json(const RunConfig& cfg) -> std::string;
/// 16 hex digits over the result-relevant fields (seeds and output dir excluded).
[[nodiscard]] auto config_hash(const RunConfig& cfg) -> std::string;

/// Configured reference if present, otherwise the problem default.
[[nodiscard]] auto set_reference_point(const ProblemDefinition& problem, const RunConfig& cfg) -> FitnessVector;

struct SeedOutput {
    std::uint64_t seed = 0;
    std::filesystem::path metrics_csv;
    std::filesystem::path snapshot;
    std::filesystem::path global_front;
    std::filesystem::path centroids;
    std::filesystem::path metadata;
    MetricsRecord final_metrics;
};

struct ExperimentResult {
    std::string config_hash;
    std::vector<SeedOutput> seeds;
};

/// Runs every seed and writes its metrics CSV, archive snapshot, global
/// front, centroids and metadata. Throws ConfigError before any compute on a
/// bad config, IoError when the output directory is unusable.
auto run_experiment(const RunConfig& cfg, const ProblemRegistry& registry = ProblemRegistry::with_builtins())
    -> ExperimentResult;

/// Optional observer called after every logged row (tests use it to check
/// archive invariants along the run).
using RunObserver = std::function<void(const Algorithm&, const MetricsRecord&)>;

/// Runs a single seed in memory and returns every metric row.
auto run_single(const RunConfig& cfg, std::uint64_t seed, const ProblemRegistry& registry,
                const RunObserver& observer = {}) -> std::vector<MetricsRecord>;

// ---------------------------------------------------------------------------

struct MetricsFile {
    std::uint64_t seed = 0;
    std::string config_hash;
    std::vector<MetricsRecord> rows;
};

/// Parses a metrics CSV including its "# key=value" provenance line.
[[nodiscard]] auto read_metrics_csv(const std::filesystem::path& path) -> MetricsFile;

[[nodiscard]] auto metric_value(const MetricsRecord& r, const std::string& metric) -> double;

enum class PairedTest { SignedRank, RankSum };

struct SampleSummary {
    double median = 0.0;
    double q1 = 0.0;
    double q3 = 0.0;
    std::vector<double> values;
};

struct ComparisonReport {
    std::string metric;
    PairedTest test = PairedTest::SignedRank;
    std::vector<std::uint64_t> seeds;
    SampleSummary a;
    SampleSummary b;
    TestResult result;
    /// All paired differences were zero; p is reported as 1.
    bool degenerate = false;

    [[nodiscard]] auto to_json() const -> std::string;
};

/// Final-row `metric` of each seed, paired by seed. Throws InvalidArgument
/// when the two seed sets differ or have fewer than 6 seeds.
[[nodiscard]] auto compare_runs(const std::vector<std::filesystem::path>& files_a,
                                const std::vector<std::filesystem::path>& files_b, const std::string& metric,
                                PairedTest test = PairedTest::SignedRank) -> ComparisonReport;

[[nodiscard]] auto compare_samples(const std::vector<std::uint64_t>& seeds, std::vector<double> a,
                                   std::vector<double> b, const std::string& metric,
                                   PairedTest test = PairedTest::SignedRank) -> ComparisonReport;

// ---------------------------------------------------------------------------

struct Calibration {
    std::size_t samples = 0;
    std::uint64_t seed = 0;
    double round_to = 100.0;
    FitnessVector minimum;
    FitnessVector reference;
};

/// Worst objective values seen by uniform random search over the genotype
/// box, each rounded down to a multiple of `round_to`.
[[nodiscard]] auto calibrate_reference(const ProblemDefinition& problem, std::size_t samples, std::uint64_t seed,
                                       double round_to = 100.0, unsigned threads = 1) -> Calibration;
[[nodiscard]] auto calibration_to_json(const ProblemDefinition& problem, const Calibration& c) -> std::string;

/// Reads a centroids CSV written by CvtTessellation::write_csv.
[[nodiscard]] auto read_centroids_csv(const std::filesystem::path& path, const std::vector<Bounds>& bounds)
    -> CvtTessellation;

/// Per-cell table: cell_index,c0..,hypervolume,front_size.
auto export_grid(std::ostream& os, const std::vector<SnapshotRecord>& records, const CvtTessellation& tessellation,
                 const FitnessVector& reference) -> void;

/// Global Pareto front of a snapshot: solution_id,cell_index,f0..,d0..
auto export_front(std::ostream& os, const std::vector<SnapshotRecord>& records,
                  DominanceRule rule = DominanceRule::Strict) -> void;

/// Build identifier baked in at configure time.
[[nodiscard]] auto build_id() -> std::string;

} // namespace mome
