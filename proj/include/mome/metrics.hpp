#pragma once

#include "mome/archive.hpp"
#include "mome/core.hpp"
#include "mome/pareto.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

namespace mome {

/// Sum over cells of each cell front's hypervolume; empty cells add 0.
[[nodiscard]] auto moqd_score(const MoqdArchive& archive, const FitnessVector& reference) -> double;

/// Non-dominated set over every stored solution, regardless of cell.
[[nodiscard]] auto global_pareto_front(const MoqdArchive& archive,
                                       DominanceRule rule = DominanceRule::Strict) -> std::vector<Solution>;

[[nodiscard]] auto global_hypervolume(const MoqdArchive& archive, const FitnessVector& reference,
                                      DominanceRule rule = DominanceRule::Strict) -> double;

/// Largest sum of objectives; -inf for an empty input.
[[nodiscard]] auto max_sum(std::span<const Solution> solutions) -> double;
[[nodiscard]] auto max_sum(const MoqdArchive& archive) -> double;
[[nodiscard]] auto max_sum(const ScalarArchive& archive) -> double;

struct MetricsRecord {
    std::uint64_t generation = 0;
    std::uint64_t evaluations = 0;
    double moqd_score = 0.0;
    std::size_t coverage_count = 0;
    double coverage_fraction = 0.0;
    double global_hypervolume = 0.0;
    double max_sum = 0.0;
    std::size_t total_solutions = 0;
    double wall_time_s = 0.0;
};

inline constexpr std::string_view kMetricsCsvHeader =
    "generation,evaluations,moqd_score,coverage_count,coverage_fraction,global_hypervolume,max_sum,"
    "total_solutions,wall_time_s";

/// Metrics for one snapshot of `archive`. `max_sum_value` is supplied by the
/// caller because MAP-Elites reports it on its own grid, not on the archive.
[[nodiscard]] auto compute_metrics(const MoqdArchive& archive, const FitnessVector& reference,
                                   std::uint64_t generation, std::uint64_t evaluations, double max_sum_value,
                                   DominanceRule rule = DominanceRule::Strict) -> MetricsRecord;

/// One CSV row (no trailing newline) with round-trip precision.
[[nodiscard]] auto to_csv_row(const MetricsRecord& r) -> std::string;
[[nodiscard]] auto parse_csv_row(std::string_view line) -> MetricsRecord;

// ---------------------------------------------------------------------------
// Statistics

struct TestResult {
    double statistic = 0.0;
    double p_value = 1.0;
    /// Non-zero pairs (signed-rank) or total sample size (rank-sum).
    std::size_t n = 0;
    bool exact = false;
};

/// Two-sided Wilcoxon signed-rank test on paired samples. Zero differences
/// are discarded; the statistic is min(W+, W-). Exact null distribution
/// (midranks handled) for up to 25 non-zero pairs, otherwise a normal
/// approximation with tie and continuity corrections.
///
/// Throws InvalidArgument for unequal lengths or fewer than 6 pairs and
/// DegenerateSample when every difference is zero.
[[nodiscard]] auto wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b) -> TestResult;

/// Two-sided Mann-Whitney rank-sum test; statistic is U for sample `a`.
[[nodiscard]] auto wilcoxon_rank_sum(std::span<const double> a, std::span<const double> b) -> TestResult;

/// Linear-interpolation quantile (q in [0, 1]) of an unsorted sample.
[[nodiscard]] auto quantile(std::vector<double> values, double q) -> double;

} // namespace mome
