#include "mome/domains.hpp"

#include "mome/errors.hpp"

#include <cmath>
#include <numbers>

namespace mome {

auto RastriginConfig::validate() const -> void
{
    if (n < 2) throw InvalidArgument("rastrigin needs at least 2 dimensions");
    if (lambda1 == lambda2) throw InvalidArgument("rastrigin shifts must differ");
    if (!(clip.min < clip.max)) throw InvalidArgument("rastrigin clip range is empty");
    if (variant == RastriginVariant::Proj && n % 2 != 0) {
        throw InvalidArgument("rastrigin_proj needs an even dimension, got " + std::to_string(n));
    }
}

auto rastrigin_objectives(const Genotype& x, const RastriginConfig& cfg) -> FitnessVector
{
    constexpr auto two_pi = 2.0 * std::numbers::pi;
    double f1 = 0.0;
    double f2 = 0.0;
    for (const auto v : x) {
        const auto a = v - cfg.lambda1;
        const auto b = v - cfg.lambda2;
        f1 += a * a - 10.0 * std::cos(two_pi * a);
        f2 += b * b - 10.0 * std::cos(two_pi * b);
    }
    return FitnessVector{-f1, -f2};
}

auto rastrigin_multi_descriptor(const Genotype& x, const RastriginConfig& cfg) -> DescriptorVector
{
    if (x.size() < 2) throw InvalidArgument("rastrigin_multi descriptor needs at least 2 genes");
    return DescriptorVector{cfg.clip.clamp(x[0]), cfg.clip.clamp(x[1])};
}

auto rastrigin_proj_descriptor(const Genotype& x, const RastriginConfig& cfg) -> DescriptorVector
{
    if (x.size() % 2 != 0 || x.empty()) {
        throw InvalidArgument("rastrigin_proj descriptor needs an even, non-zero length, got " +
                              std::to_string(x.size()));
    }
    const auto half = x.size() / 2;
    double first = 0.0;
    double second = 0.0;
    for (std::size_t i = 0; i < half; ++i) first += cfg.clip.clamp(x[i]);
    for (std::size_t i = half; i < x.size(); ++i) second += cfg.clip.clamp(x[i]);
    return DescriptorVector{first / static_cast<double>(half), second / static_cast<double>(half)};
}

auto make_rastrigin_problem(const RastriginConfig& cfg) -> ProblemDefinition
{
    cfg.validate();
    ProblemDefinition p;
    p.name = cfg.variant == RastriginVariant::Multi ? "rastrigin_multi" : "rastrigin_proj";
    p.search_dim = cfg.n;
    p.num_objectives = 2;
    p.descriptor_dim = 2;
    p.genotype_bounds.assign(cfg.n, cfg.genotype_bounds);
    p.descriptor_bounds.assign(2, cfg.clip);
    // The calibrated point is for n = 100; worst values scale linearly with n.
    const auto scale = static_cast<double>(cfg.n) / 100.0;
    p.hypervolume_reference = FitnessVector{kRastriginReference1 * scale, kRastriginReference2 * scale};
    if (cfg.variant == RastriginVariant::Multi) {
        p.evaluate = [cfg](const Genotype& x) {
            return Evaluation{rastrigin_objectives(x, cfg), rastrigin_multi_descriptor(x, cfg)};
        };
    } else {
        p.evaluate = [cfg](const Genotype& x) {
            return Evaluation{rastrigin_objectives(x, cfg), rastrigin_proj_descriptor(x, cfg)};
        };
    }
    return p;
}

auto ProblemRegistry::with_builtins() -> ProblemRegistry
{
    ProblemRegistry r;
    for (const auto variant : {RastriginVariant::Multi, RastriginVariant::Proj}) {
        const auto name = variant == RastriginVariant::Multi ? "rastrigin_multi" : "rastrigin_proj";
        r.add(name, [variant](const ProblemOptions& o) {
            RastriginConfig cfg;
            cfg.variant = variant;
            if (o.search_dim) cfg.n = *o.search_dim;
            return make_rastrigin_problem(cfg);
        });
    }
    return r;
}

auto ProblemRegistry::add(const std::string& name, ProblemFactory factory) -> void
{
    factories_[name] = std::move(factory);
}

auto ProblemRegistry::contains(const std::string& name) const -> bool
{
    return factories_.contains(name);
}

auto ProblemRegistry::make(const std::string& name, const ProblemOptions& options) const -> ProblemDefinition
{
    const auto it = factories_.find(name);
    if (it == factories_.end()) throw ConfigError("unknown problem '" + name + "'");
    return it->second(options);
}

auto ProblemRegistry::names() const -> std::vector<std::string>
{
    std::vector<std::string> out;
    for (const auto& [k, v] : factories_) out.push_back(k);
    return out;
}

} // namespace mome
