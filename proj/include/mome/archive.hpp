#pragma once

#include "mome/core.hpp"
#include "mome/pareto.hpp"
#include "mome/random.hpp"
#include "mome/tessellation.hpp"

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mome {

struct CellInsertion {
    std::size_t cell = 0;
    InsertionReport report;
};

/// Grid of bounded Pareto fronts, one per CVT cell. Also used as the passive
/// archive that instruments the baselines.
class MoqdArchive {
public:
    MoqdArchive(std::shared_ptr<const CvtTessellation> tessellation, std::size_t front_capacity,
                FrontPolicy policy, RandomStream eviction_rng);

    /// Routes each solution to its cell and inserts it, in batch order.
    auto insert(std::span<const Solution> batch) -> std::vector<CellInsertion>;

    /// Uniform over non-empty cells with replacement, then uniform within the
    /// chosen front. Throws EmptyArchive when nothing is stored.
    [[nodiscard]] auto sample(std::size_t count, RandomStream& rng) const -> std::vector<Solution>;

    [[nodiscard]] auto tessellation() const noexcept -> const CvtTessellation& { return *tessellation_; }
    [[nodiscard]] auto tessellation_ptr() const noexcept -> std::shared_ptr<const CvtTessellation>
    {
        return tessellation_;
    }
    [[nodiscard]] auto num_cells() const noexcept -> std::size_t { return fronts_.size(); }
    [[nodiscard]] auto front(std::size_t cell) const -> const ParetoFront& { return fronts_.at(cell); }
    [[nodiscard]] auto fronts() const noexcept -> const std::vector<ParetoFront>& { return fronts_; }
    [[nodiscard]] auto front_capacity() const noexcept -> std::size_t { return capacity_; }
    [[nodiscard]] auto coverage() const -> std::size_t;
    [[nodiscard]] auto total_solutions() const -> std::size_t;
    [[nodiscard]] auto all_solutions() const -> std::vector<Solution>;

    /// Full scan: every stored solution's descriptor maps to the cell holding it.
    [[nodiscard]] auto cells_consistent() const -> bool;

private:
    std::shared_ptr<const CvtTessellation> tessellation_;
    std::size_t capacity_;
    std::vector<ParetoFront> fronts_;
    RandomStream eviction_rng_;
};

/// Insert-only handle on an archive. Baseline algorithms get this and nothing
/// else, so they can feed their passive archive but never read it.
class PassiveSink {
public:
    explicit PassiveSink(MoqdArchive& archive) : archive_(&archive) {}
    auto insert(std::span<const Solution> batch) -> void { archive_->insert(batch); }

private:
    MoqdArchive* archive_;
};

/// Same addition rules as MoqdArchive::insert; the archive is only ever read
/// by metrics.
auto passive_mirror_insert(MoqdArchive& passive, std::span<const Solution> batch) -> std::vector<CellInsertion>;

struct ScalarInsertion {
    std::size_t cell = 0;
    bool added = false;
    std::optional<SolutionId> replaced;
};

/// Mono-objective MAP-Elites grid; a cell's score is the sum of objectives.
class ScalarArchive {
public:
    explicit ScalarArchive(std::shared_ptr<const CvtTessellation> tessellation);

    /// Empty cell: insert. Occupied: replace only on a strictly greater sum.
    auto insert(std::span<const Solution> batch) -> std::vector<ScalarInsertion>;

    /// Uniform over occupied cells with replacement. Throws EmptyArchive.
    [[nodiscard]] auto sample(std::size_t count, RandomStream& rng) const -> std::vector<Solution>;

    [[nodiscard]] auto tessellation() const noexcept -> const CvtTessellation& { return *tessellation_; }
    [[nodiscard]] auto num_cells() const noexcept -> std::size_t { return slots_.size(); }
    [[nodiscard]] auto slot(std::size_t cell) const -> const std::optional<Solution>& { return slots_.at(cell); }
    [[nodiscard]] auto coverage() const noexcept -> std::size_t { return occupied_.size(); }
    /// Per-cell score, or nullopt for an empty cell.
    [[nodiscard]] auto cell_fitness(std::size_t cell) const -> std::optional<double>;
    [[nodiscard]] auto cells_consistent() const -> bool;

private:
    std::shared_ptr<const CvtTessellation> tessellation_;
    std::vector<std::optional<Solution>> slots_;
    std::vector<double> scores_;
    std::vector<std::size_t> occupied_;
};

struct SnapshotOptions {
    bool include_genotype = false;
};

/// Line-delimited JSON: one header record (the `header` object with
/// "record":"header" added), then one record per stored solution with
/// cell_index, solution_id, fitness, descriptor and optionally genotype.
auto write_snapshot(std::ostream& os, const MoqdArchive& archive, const std::string& header_json,
                    const SnapshotOptions& options = {}) -> void;

struct SnapshotRecord {
    std::size_t cell_index = 0;
    SolutionId solution_id = 0;
    FitnessVector fitness;
    DescriptorVector descriptor;
    std::optional<Genotype> genotype;
};

/// Reads the records back (header skipped). Throws IoError on malformed lines.
[[nodiscard]] auto read_snapshot(std::istream& is) -> std::vector<SnapshotRecord>;

} // namespace mome
