#pragma once

#include "mome/core.hpp"
#include "mome/random.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace mome {

enum class MutationKind { Polynomial, None };
enum class CrossoverKind { Blend, Sbx, IsoLineDD };

struct VariationConfig {
    /// Fraction of each batch produced by mutation; the rest by crossover.
    double p_mut = 0.5;
    /// Polynomial mutation distribution index.
    double eta = 1.0;
    /// Per-gene mutation probability; nullopt means 1/n.
    std::optional<double> per_gene_mut_prob;
    double iso_sigma = 0.005;
    double line_sigma = 0.05;
    double sbx_eta = 15.0;
    MutationKind mutation = MutationKind::Polynomial;
    CrossoverKind crossover = CrossoverKind::Blend;
    std::vector<Bounds> genotype_bounds;

    /// Throws InvalidArgument when a probability or scale is out of range.
    auto validate() const -> void;
    [[nodiscard]] auto gene_mut_prob(std::size_t n) const -> double;
};

/// Bounded polynomial mutation. Each gene mutates with probability
/// `gene_mut_prob(n)`; u < 0.5 pulls towards the lower bound, u >= 0.5
/// towards the upper bound.
[[nodiscard]] auto polynomial_mutation(const Genotype& x, const VariationConfig& cfg, RandomStream& rng) -> Genotype;

/// Single-gene perturbation for a given draw `u`; exposed for testing.
[[nodiscard]] auto polynomial_perturb(double x, double u, double eta, const Bounds& b) -> double;

/// child = x1 + iso_sigma * N(0, I) + line_sigma * N(0, 1) * (x2 - x1), clipped.
[[nodiscard]] auto iso_line_dd(const Genotype& x1, const Genotype& x2, const VariationConfig& cfg, RandomStream& rng)
    -> Genotype;

/// child_i = a_i * x1_i + (1 - a_i) * x2_i with a_i ~ U(0, 1), clipped.
[[nodiscard]] auto crossover_blend(const Genotype& x1, const Genotype& x2, const VariationConfig& cfg,
                                   RandomStream& rng) -> Genotype;

/// Simulated binary crossover; returns the first child.
[[nodiscard]] auto crossover_sbx(const Genotype& x1, const Genotype& x2, const VariationConfig& cfg,
                                 RandomStream& rng) -> Genotype;

/// Number of mutants in a batch of `batch_size`: round(p_mut * B).
[[nodiscard]] auto mutant_count(double p_mut, std::size_t batch_size) -> std::size_t;

/// Parents needed for a batch: mutants + 2 * crossovers.
[[nodiscard]] auto parents_needed(double p_mut, std::size_t batch_size) -> std::size_t;

/// Builds `batch_size` offspring. The first mutant_count(...) come from
/// mutating single parents, the rest from crossing consecutive parent pairs.
/// Offspring i draws from `rng.substream(i)`, so the result does not depend
/// on evaluation order. Throws InvalidArgument on a parent-count mismatch.
[[nodiscard]] auto make_offspring(std::span<const Genotype> parents, std::size_t batch_size,
                                  const VariationConfig& cfg, const RandomStream& rng) -> std::vector<Genotype>;

[[nodiscard]] auto to_string(CrossoverKind kind) -> std::string_view;
[[nodiscard]] auto to_string(MutationKind kind) -> std::string_view;

} // namespace mome
