#pragma once

#include "mome/archive.hpp"
#include "mome/core.hpp"
#include "mome/pareto.hpp"
#include "mome/random.hpp"
#include "mome/tessellation.hpp"
#include "mome/variation.hpp"

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mome {

enum class AlgorithmKind { Mome, MapElites, Nsga2, Spea2 };

[[nodiscard]] auto to_string(AlgorithmKind kind) -> std::string_view;
/// Accepts "mome", "map_elites", "nsga2", "spea2". Throws ConfigError.
[[nodiscard]] auto parse_algorithm(std::string_view name) -> AlgorithmKind;

struct AlgorithmConfig {
    /// Cells of the MOME grid (and of every passive archive).
    std::size_t num_cells = 128;
    /// Maximum Pareto front size per cell.
    std::size_t front_capacity = 50;
    std::size_t batch_size = 256;
    /// Initial random population; defaults to batch_size.
    std::optional<std::size_t> init_pop;
    VariationConfig variation;
    FrontPolicy front_policy;
    CvtOptions cvt;
    /// SPEA2 raw fitness = number of dominators instead of summed strengths.
    bool spea2_simple_count = false;

    [[nodiscard]] auto initial_population() const -> std::size_t { return init_pop.value_or(batch_size); }
    /// M * P: MAP-Elites grid size and NSGA-II / SPEA2 population size.
    [[nodiscard]] auto population_size() const -> std::size_t { return num_cells * front_capacity; }
};

/// Prebuilt tessellations; anything left null is built from the seed.
struct AlgorithmResources {
    std::shared_ptr<const CvtTessellation> grid;
    std::shared_ptr<const CvtTessellation> scalar_grid;
};

/// Named substreams of one master seed.
struct RunStreams {
    explicit RunStreams(std::uint64_t seed);
    RandomStream init;
    RandomStream selection;
    RandomStream variation;
    RandomStream eviction;
    RandomStream cvt;
    RandomStream scalar_cvt;
};

[[nodiscard]] auto build_grid(const ProblemDefinition& problem, std::size_t cells, std::uint64_t seed,
                              const CvtOptions& options) -> std::shared_ptr<const CvtTessellation>;
[[nodiscard]] auto build_scalar_grid(const ProblemDefinition& problem, std::size_t cells, std::uint64_t seed,
                                     const CvtOptions& options) -> std::shared_ptr<const CvtTessellation>;

/// Uniform "one generation" interface shared by all four methods.
class Algorithm {
public:
    virtual ~Algorithm() = default;
    Algorithm(const Algorithm&) = delete;
    auto operator=(const Algorithm&) -> Algorithm& = delete;

    [[nodiscard]] virtual auto kind() const -> AlgorithmKind = 0;

    /// One generation: exactly batch_size evaluations.
    auto step() -> void;

    /// The archive metrics are computed on: MOME's own grid, or the passive
    /// archive fed by a baseline.
    [[nodiscard]] virtual auto metrics_archive() const -> const MoqdArchive& = 0;

    /// Best sum of objectives over the method's own result set.
    [[nodiscard]] virtual auto max_sum() const -> double = 0;

    [[nodiscard]] auto generation() const noexcept -> std::uint64_t { return generation_; }
    [[nodiscard]] auto evaluations() const noexcept -> std::uint64_t { return evaluations_; }
    [[nodiscard]] auto config() const noexcept -> const AlgorithmConfig& { return config_; }
    [[nodiscard]] auto problem() const noexcept -> const ProblemDefinition& { return problem_; }

protected:
    Algorithm(ProblemDefinition problem, AlgorithmConfig config, std::uint64_t seed, EvaluationOptions eval);

    /// Draws, evaluates and stores the initial population.
    virtual auto initialize() -> void = 0;
    virtual auto generation_step() -> void = 0;

    auto evaluate(std::span<const Genotype> genotypes) -> std::vector<Solution>;
    auto random_population(std::size_t count) -> std::vector<Genotype>;
    /// make_offspring with this generation's variation substream.
    auto vary(std::span<const Solution> parents) -> std::vector<Genotype>;
    [[nodiscard]] auto parents_per_generation() const -> std::size_t;

    ProblemDefinition problem_;
    AlgorithmConfig config_;
    RunStreams streams_;

private:
    friend auto make_algorithm(AlgorithmKind, const ProblemDefinition&, const AlgorithmConfig&, std::uint64_t,
                               const EvaluationOptions&, const AlgorithmResources&) -> std::unique_ptr<Algorithm>;

    EvaluationOptions eval_;
    IdCounter ids_;
    std::uint64_t generation_ = 0;
    std::uint64_t evaluations_ = 0;
};

/// Builds and initializes an algorithm. Throws InvalidArgument on a bad config.
[[nodiscard]] auto make_algorithm(AlgorithmKind kind, const ProblemDefinition& problem, const AlgorithmConfig& config,
                                  std::uint64_t seed, const EvaluationOptions& eval = {},
                                  const AlgorithmResources& resources = {}) -> std::unique_ptr<Algorithm>;

class MomeAlgorithm final : public Algorithm {
public:
    MomeAlgorithm(const ProblemDefinition& problem, const AlgorithmConfig& config, std::uint64_t seed,
                  const EvaluationOptions& eval, std::shared_ptr<const CvtTessellation> grid);

    [[nodiscard]] auto kind() const -> AlgorithmKind override { return AlgorithmKind::Mome; }
    [[nodiscard]] auto metrics_archive() const -> const MoqdArchive& override { return archive_; }
    [[nodiscard]] auto max_sum() const -> double override;
    [[nodiscard]] auto archive() const -> const MoqdArchive& { return archive_; }

protected:
    auto initialize() -> void override;
    auto generation_step() -> void override;

private:
    MoqdArchive archive_;
};

/// Owns the passive archive for a baseline. Derived classes can only push
/// offspring into it through mirror(); nothing in the selection path reads it.
class PassiveInstrumented : public Algorithm {
public:
    [[nodiscard]] auto metrics_archive() const -> const MoqdArchive& final { return *passive_; }

protected:
    PassiveInstrumented(const ProblemDefinition& problem, const AlgorithmConfig& config, std::uint64_t seed,
                        const EvaluationOptions& eval, std::shared_ptr<const CvtTessellation> grid);

    auto mirror(std::span<const Solution> batch) -> void { sink_.insert(batch); }

private:
    std::unique_ptr<MoqdArchive> passive_;
    PassiveSink sink_;
};

class MapElitesAlgorithm final : public PassiveInstrumented {
public:
    MapElitesAlgorithm(const ProblemDefinition& problem, const AlgorithmConfig& config, std::uint64_t seed,
                       const EvaluationOptions& eval, std::shared_ptr<const CvtTessellation> grid,
                       std::shared_ptr<const CvtTessellation> scalar_grid);

    [[nodiscard]] auto kind() const -> AlgorithmKind override { return AlgorithmKind::MapElites; }
    [[nodiscard]] auto max_sum() const -> double override;
    [[nodiscard]] auto grid() const -> const ScalarArchive& { return grid_; }

protected:
    auto initialize() -> void override;
    auto generation_step() -> void override;

private:
    ScalarArchive grid_;
};

// ---------------------------------------------------------------------------
// NSGA-II

/// Fast non-dominated sort: fronts[r] lists the indices of rank r.
[[nodiscard]] auto non_dominated_sort(std::span<const FitnessVector> fitness,
                                      DominanceRule rule = DominanceRule::Strict)
    -> std::vector<std::vector<std::size_t>>;

/// Crowding distance of each member of `front` (parallel to `front`).
/// Boundary points of every objective get +inf.
[[nodiscard]] auto crowding_distances(std::span<const FitnessVector> fitness, std::span<const std::size_t> front)
    -> std::vector<double>;

/// NSGA-II population with rank / crowding bookkeeping.
class Nsga2Population {
public:
    Nsga2Population(std::size_t capacity, DominanceRule rule) : capacity_(capacity), rule_(rule) {}

    /// Survivor selection on members ∪ offspring.
    auto survive(std::vector<Solution> offspring) -> void;
    /// Binary tournament on (lower rank, larger crowding).
    [[nodiscard]] auto select_parents(std::size_t count, RandomStream& rng) const -> std::vector<Solution>;

    [[nodiscard]] auto members() const noexcept -> const std::vector<Solution>& { return members_; }
    [[nodiscard]] auto ranks() const noexcept -> const std::vector<std::size_t>& { return rank_; }
    [[nodiscard]] auto crowding() const noexcept -> const std::vector<double>& { return crowding_; }

private:
    std::size_t capacity_;
    DominanceRule rule_;
    std::vector<Solution> members_;
    std::vector<std::size_t> rank_;
    std::vector<double> crowding_;
};

class Nsga2Algorithm final : public PassiveInstrumented {
public:
    Nsga2Algorithm(const ProblemDefinition& problem, const AlgorithmConfig& config, std::uint64_t seed,
                   const EvaluationOptions& eval, std::shared_ptr<const CvtTessellation> grid);

    [[nodiscard]] auto kind() const -> AlgorithmKind override { return AlgorithmKind::Nsga2; }
    [[nodiscard]] auto max_sum() const -> double override;
    [[nodiscard]] auto population() const -> const Nsga2Population& { return population_; }

protected:
    auto initialize() -> void override;
    auto generation_step() -> void override;

private:
    Nsga2Population population_;
};

// ---------------------------------------------------------------------------
// SPEA2

/// Number of members of `fitness` that dominate each point.
[[nodiscard]] auto domination_counts(std::span<const FitnessVector> fitness,
                                     DominanceRule rule = DominanceRule::Strict) -> std::vector<std::size_t>;

struct Spea2Scores {
    std::vector<double> raw;
    std::vector<double> density;
    /// raw + density; lower is better, < 1 iff non-dominated.
    std::vector<double> fitness;
};

/// Raw fitness (summed strengths of dominators, or dominator count when
/// `simple_count`) plus density 1 / (sigma_k + 2), k = floor(sqrt(n)).
[[nodiscard]] auto spea2_scores(std::span<const FitnessVector> fitness, DominanceRule rule, bool simple_count)
    -> Spea2Scores;

/// Environmental selection of `capacity` indices: the non-dominated set,
/// truncated by iterative nearest-neighbour removal when too large or filled
/// with the best dominated points when too small. Returned in ascending order.
[[nodiscard]] auto spea2_environmental_selection(std::span<const FitnessVector> fitness, const Spea2Scores& scores,
                                                 std::size_t capacity) -> std::vector<std::size_t>;

class Spea2Population {
public:
    Spea2Population(std::size_t capacity, DominanceRule rule, bool simple_count)
        : capacity_(capacity), rule_(rule), simple_count_(simple_count)
    {}

    auto survive(std::vector<Solution> offspring) -> void;
    /// Binary tournament on SPEA2 fitness.
    [[nodiscard]] auto select_parents(std::size_t count, RandomStream& rng) const -> std::vector<Solution>;

    [[nodiscard]] auto members() const noexcept -> const std::vector<Solution>& { return members_; }
    [[nodiscard]] auto fitness() const noexcept -> const std::vector<double>& { return fitness_; }

private:
    std::size_t capacity_;
    DominanceRule rule_;
    bool simple_count_;
    std::vector<Solution> members_;
    std::vector<double> fitness_;
};

class Spea2Algorithm final : public PassiveInstrumented {
public:
    Spea2Algorithm(const ProblemDefinition& problem, const AlgorithmConfig& config, std::uint64_t seed,
                   const EvaluationOptions& eval, std::shared_ptr<const CvtTessellation> grid);

    [[nodiscard]] auto kind() const -> AlgorithmKind override { return AlgorithmKind::Spea2; }
    [[nodiscard]] auto max_sum() const -> double override;
    [[nodiscard]] auto population() const -> const Spea2Population& { return population_; }

protected:
    auto initialize() -> void override;
    auto generation_step() -> void override;

private:
    Spea2Population population_;
};

} // namespace mome
