#pragma once

#include "mome/core.hpp"
#include "mome/random.hpp"

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace mome {

enum class DominanceRule {
    /// a dominates b iff a_i > b_i for every objective.
    Strict,
    /// Conventional Pareto: a_i >= b_i for all i and a_j > b_j for some j.
    Weak,
};

enum class DuplicatePolicy {
    /// Reject a candidate whose fitness and genotype equal a stored member.
    Drop,
    Keep,
};

struct FrontPolicy {
    DominanceRule dominance = DominanceRule::Strict;
    DuplicatePolicy duplicates = DuplicatePolicy::Drop;
};

/// Throws InvalidArgument on length mismatch or empty vectors.
[[nodiscard]] auto dominates(const FitnessVector& a, const FitnessVector& b,
                             DominanceRule rule = DominanceRule::Strict) -> bool;

struct InsertionReport {
    bool added = false;
    std::vector<SolutionId> removed_ids;
};

/// Bounded set of mutually non-dominated solutions.
///
/// A candidate dominated by any member is dropped. Otherwise it is added and
/// every member it dominates is removed. If the front then exceeds its
/// capacity, incumbents (never the candidate itself) are evicted uniformly at
/// random until the size is back to capacity.
class ParetoFront {
public:
    explicit ParetoFront(std::size_t capacity, FrontPolicy policy = {});

    auto insert(Solution candidate, RandomStream& rng) -> InsertionReport;

    [[nodiscard]] auto members() const noexcept -> const std::vector<Solution>& { return members_; }
    [[nodiscard]] auto size() const noexcept -> std::size_t { return members_.size(); }
    [[nodiscard]] auto empty() const noexcept -> bool { return members_.empty(); }
    [[nodiscard]] auto capacity() const noexcept -> std::size_t { return capacity_; }
    [[nodiscard]] auto policy() const noexcept -> const FrontPolicy& { return policy_; }
    [[nodiscard]] auto fitnesses() const -> std::vector<FitnessVector>;

private:
    std::size_t capacity_;
    FrontPolicy policy_;
    std::vector<Solution> members_;
};

/// Exact two-objective hypervolume of the region dominated by `points` and
/// bounded below by `reference`. Points that do not strictly improve on the
/// reference in both objectives contribute nothing. Throws
/// UnsupportedDimension when the reference is not two-dimensional.
[[nodiscard]] auto hypervolume(std::span<const FitnessVector> points, const FitnessVector& reference) -> double;
[[nodiscard]] auto hypervolume(const ParetoFront& front, const FitnessVector& reference) -> double;

/// Non-dominated subset of `solutions`, sorted by id.
[[nodiscard]] auto pareto_front_of(std::span<const Solution> solutions,
                                   DominanceRule rule = DominanceRule::Strict) -> std::vector<Solution>;

[[nodiscard]] auto to_string(DominanceRule rule) -> std::string_view;
[[nodiscard]] auto to_string(DuplicatePolicy policy) -> std::string_view;

} // namespace mome
