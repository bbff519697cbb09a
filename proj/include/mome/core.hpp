#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace mome {

/// Fixed-length real vector tagged with its role so genotypes, fitnesses and
/// descriptors cannot be mixed up.
template <typename Tag>
class RealVector {
public:
    RealVector() = default;
    explicit RealVector(std::vector<double> values) : values_(std::move(values)) {}
    RealVector(std::initializer_list<double> values) : values_(values) {}
    explicit RealVector(std::size_t n, double fill = 0.0) : values_(n, fill) {}

    [[nodiscard]] auto size() const noexcept -> std::size_t { return values_.size(); }
    [[nodiscard]] auto empty() const noexcept -> bool { return values_.empty(); }
    auto operator[](std::size_t i) -> double& { return values_[i]; }
    auto operator[](std::size_t i) const -> double { return values_[i]; }

    [[nodiscard]] auto begin() noexcept { return values_.begin(); }
    [[nodiscard]] auto end() noexcept { return values_.end(); }
    [[nodiscard]] auto begin() const noexcept { return values_.begin(); }
    [[nodiscard]] auto end() const noexcept { return values_.end(); }

    [[nodiscard]] auto span() const noexcept -> std::span<const double> { return values_; }
    [[nodiscard]] auto values() const noexcept -> const std::vector<double>& { return values_; }

    friend auto operator==(const RealVector&, const RealVector&) -> bool = default;

private:
    std::vector<double> values_;
};

struct GenotypeTag {};
struct FitnessTag {};
struct DescriptorTag {};

/// Point in the search space.
using Genotype = RealVector<GenotypeTag>;
/// Objective values, every component maximized.
using FitnessVector = RealVector<FitnessTag>;
using DescriptorVector = RealVector<DescriptorTag>;

using SolutionId = std::uint64_t;

/// An evaluated genotype. Immutable once scored.
struct Solution {
    Genotype genotype;
    FitnessVector fitness;
    DescriptorVector descriptor;
    SolutionId id = 0;

    [[nodiscard]] auto fitness_sum() const -> double;
};

struct Bounds {
    double min = 0.0;
    double max = 0.0;

    [[nodiscard]] auto clamp(double v) const -> double { return v < min ? min : (v > max ? max : v); }
    [[nodiscard]] auto contains(double v) const -> bool { return v >= min && v <= max; }
    friend auto operator==(const Bounds&, const Bounds&) -> bool = default;
};

struct Evaluation {
    FitnessVector fitness;
    DescriptorVector descriptor;
};

/// A benchmark problem. `evaluate` must be pure: it may be called
/// concurrently from several threads on the same definition.
struct ProblemDefinition {
    std::string name;
    std::size_t search_dim = 0;
    std::size_t num_objectives = 0;
    std::size_t descriptor_dim = 0;
    std::vector<Bounds> genotype_bounds;
    std::vector<Bounds> descriptor_bounds;
    FitnessVector hypervolume_reference;
    std::function<Evaluation(const Genotype&)> evaluate;
};

/// Per-run monotonic id source.
class IdCounter {
public:
    explicit IdCounter(SolutionId first = 0) : next_(first) {}
    auto take(std::size_t n) -> SolutionId
    {
        const auto first = next_;
        next_ += n;
        return first;
    }
    [[nodiscard]] auto peek() const noexcept -> SolutionId { return next_; }

private:
    SolutionId next_;
};

struct EvaluationOptions {
    /// Worker threads used for evaluation; 0 or 1 evaluates inline.
    unsigned threads = 1;
};

/// Scores every genotype and assigns consecutive ids in input order.
/// Output order and content never depend on `options.threads`.
///
/// Throws InvalidArgument naming the first genotype whose length differs
/// from `problem.search_dim`.
auto evaluate_batch(const ProblemDefinition& problem, std::span<const Genotype> genotypes, IdCounter& ids,
                    const EvaluationOptions& options = {}) -> std::vector<Solution>;

/// Uniform random genotype within the problem's bounds.
class RandomStream;
auto random_genotype(const ProblemDefinition& problem, RandomStream& rng) -> Genotype;

} // namespace mome
