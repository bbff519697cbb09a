#include "mome/variation.hpp"

#include "mome/errors.hpp"

#include <cmath>
#include <string>

namespace mome {

namespace {

auto check_pair(const Genotype& x1, const Genotype& x2, const VariationConfig& cfg) -> void
{
    if (x1.size() != x2.size()) {
        throw InvalidArgument("crossover parents have lengths " + std::to_string(x1.size()) + " and " +
                              std::to_string(x2.size()));
    }
    if (cfg.genotype_bounds.size() != x1.size()) {
        throw InvalidArgument("variation bounds length differs from genotype length");
    }
}

auto clip(Genotype& g, const std::vector<Bounds>& bounds) -> void
{
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = bounds[i].clamp(g[i]);
}

} // namespace

auto VariationConfig::validate() const -> void
{
    const auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (!prob(p_mut)) throw InvalidArgument("p_mut must lie in [0, 1]");
    if (per_gene_mut_prob && !prob(*per_gene_mut_prob)) throw InvalidArgument("per_gene_mut_prob must lie in [0, 1]");
    if (!(eta > 0.0)) throw InvalidArgument("eta must be positive");
    if (!(sbx_eta > 0.0)) throw InvalidArgument("sbx_eta must be positive");
    if (iso_sigma < 0.0 || line_sigma < 0.0) throw InvalidArgument("sigmas must be non-negative");
    for (const auto& b : genotype_bounds) {
        if (!(b.min <= b.max)) throw InvalidArgument("genotype bounds must satisfy min <= max");
    }
}

auto VariationConfig::gene_mut_prob(std::size_t n) const -> double
{
    if (per_gene_mut_prob) return *per_gene_mut_prob;
    return n == 0 ? 0.0 : 1.0 / static_cast<double>(n);
}

auto polynomial_perturb(double x, double u, double eta, const Bounds& b) -> double
{
    const auto power = 1.0 / (eta + 1.0);
    double y = x;
    if (u < 0.5) {
        const auto delta = std::pow(2.0 * u, power) - 1.0;
        y = x + delta * (x - b.min);
    } else {
        const auto delta = 1.0 - std::pow(2.0 * (1.0 - u), power);
        y = x + delta * (b.max - x);
    }
    return b.clamp(y);
}

auto polynomial_mutation(const Genotype& x, const VariationConfig& cfg, RandomStream& rng) -> Genotype
{
    if (cfg.genotype_bounds.size() != x.size()) {
        throw InvalidArgument("variation bounds length differs from genotype length");
    }
    const auto p = cfg.gene_mut_prob(x.size());
    Genotype y = x;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (rng.uniform() < p) y[i] = polynomial_perturb(x[i], rng.uniform(), cfg.eta, cfg.genotype_bounds[i]);
    }
    return y;
}

auto iso_line_dd(const Genotype& x1, const Genotype& x2, const VariationConfig& cfg, RandomStream& rng) -> Genotype
{
    check_pair(x1, x2, cfg);
    const auto line = cfg.line_sigma * rng.normal();
    Genotype child = x1;
    for (std::size_t i = 0; i < x1.size(); ++i) {
        child[i] = x1[i] + cfg.iso_sigma * rng.normal() + line * (x2[i] - x1[i]);
    }
    clip(child, cfg.genotype_bounds);
    return child;
}

auto crossover_blend(const Genotype& x1, const Genotype& x2, const VariationConfig& cfg, RandomStream& rng)
    -> Genotype
{
    check_pair(x1, x2, cfg);
    Genotype child = x1;
    for (std::size_t i = 0; i < x1.size(); ++i) {
        const auto a = rng.uniform();
        child[i] = a * x1[i] + (1.0 - a) * x2[i];
    }
    clip(child, cfg.genotype_bounds);
    return child;
}

auto crossover_sbx(const Genotype& x1, const Genotype& x2, const VariationConfig& cfg, RandomStream& rng) -> Genotype
{
    check_pair(x1, x2, cfg);
    const auto power = 1.0 / (cfg.sbx_eta + 1.0);
    Genotype child = x1;
    for (std::size_t i = 0; i < x1.size(); ++i) {
        const auto u = rng.uniform();
        const auto beta = u <= 0.5 ? std::pow(2.0 * u, power) : std::pow(1.0 / (2.0 * (1.0 - u)), power);
        child[i] = 0.5 * ((1.0 + beta) * x1[i] + (1.0 - beta) * x2[i]);
    }
    clip(child, cfg.genotype_bounds);
    return child;
}

auto mutant_count(double p_mut, std::size_t batch_size) -> std::size_t
{
    return static_cast<std::size_t>(std::lround(p_mut * static_cast<double>(batch_size)));
}

auto parents_needed(double p_mut, std::size_t batch_size) -> std::size_t
{
    const auto mutants = mutant_count(p_mut, batch_size);
    return mutants + 2 * (batch_size - mutants);
}

auto make_offspring(std::span<const Genotype> parents, std::size_t batch_size, const VariationConfig& cfg,
                    const RandomStream& rng) -> std::vector<Genotype>
{
    const auto mutants = mutant_count(cfg.p_mut, batch_size);
    const auto needed = mutants + 2 * (batch_size - mutants);
    if (parents.size() != needed) {
        throw InvalidArgument("make_offspring: got " + std::to_string(parents.size()) + " parents, expected " +
                              std::to_string(needed));
    }

    std::vector<Genotype> children;
    children.reserve(batch_size);
    for (std::size_t i = 0; i < mutants; ++i) {
        auto stream = rng.substream(i);
        if (cfg.mutation == MutationKind::Polynomial) {
            children.push_back(polynomial_mutation(parents[i], cfg, stream));
        } else {
            children.push_back(parents[i]);
        }
    }
    for (std::size_t c = 0; mutants + c < batch_size; ++c) {
        auto stream = rng.substream(mutants + c);
        const auto& a = parents[mutants + 2 * c];
        const auto& b = parents[mutants + 2 * c + 1];
        switch (cfg.crossover) {
        case CrossoverKind::Blend: children.push_back(crossover_blend(a, b, cfg, stream)); break;
        case CrossoverKind::Sbx: children.push_back(crossover_sbx(a, b, cfg, stream)); break;
        case CrossoverKind::IsoLineDD: children.push_back(iso_line_dd(a, b, cfg, stream)); break;
        }
    }
    return children;
}

auto to_string(CrossoverKind kind) -> std::string_view
{
    switch (kind) {
    case CrossoverKind::Blend: return "blend";
    case CrossoverKind::Sbx: return "sbx";
    case CrossoverKind::IsoLineDD: return "iso_line_dd";
    }
    return "unknown";
}

auto to_string(MutationKind kind) -> std::string_view
{
    return kind == MutationKind::Polynomial ? "polynomial" : "none";
}

} // namespace mome
