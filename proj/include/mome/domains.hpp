#pragma once

#include "mome/core.hpp"

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace mome {

enum class RastriginVariant {
    /// Descriptor = first two genes, clipped.
    Multi,
    /// Descriptor = mean of the clipped first and second halves.
    Proj,
};

struct RastriginConfig {
    std::size_t n = 100;
    double lambda1 = 0.0;
    double lambda2 = 2.2;
    Bounds clip{-2.0, 4.0};
    Bounds genotype_bounds{-5.12, 5.12};
    RastriginVariant variant = RastriginVariant::Multi;

    auto validate() const -> void;
};

/// Calibrated hypervolume reference for the Rastrigin objectives at n = 100;
/// see data/reference_points.json and `mome calibrate-ref`.
inline constexpr double kRastriginReference1 = -1400.0;
inline constexpr double kRastriginReference2 = -2200.0;

/// Two shifted Rastrigin objectives, negated so that lambda_j is the maximizer
/// of f_j: f_j(x) = -sum_i [(x_i - lambda_j)^2 - 10 cos(2 pi (x_i - lambda_j))].
[[nodiscard]] auto rastrigin_objectives(const Genotype& x, const RastriginConfig& cfg) -> FitnessVector;

[[nodiscard]] auto rastrigin_multi_descriptor(const Genotype& x, const RastriginConfig& cfg) -> DescriptorVector;

/// Throws InvalidArgument for odd n.
[[nodiscard]] auto rastrigin_proj_descriptor(const Genotype& x, const RastriginConfig& cfg) -> DescriptorVector;

[[nodiscard]] auto make_rastrigin_problem(const RastriginConfig& cfg) -> ProblemDefinition;

/// Options a registered problem factory may honour.
struct ProblemOptions {
    std::optional<std::size_t> search_dim;
};

using ProblemFactory = std::function<ProblemDefinition(const ProblemOptions&)>;

/// Name-keyed problem registry. Ships with "rastrigin_multi" and "rastrigin_proj".
class ProblemRegistry {
public:
    [[nodiscard]] static auto with_builtins() -> ProblemRegistry;

    auto add(const std::string& name, ProblemFactory factory) -> void;
    [[nodiscard]] auto contains(const std::string& name) const -> bool;
    /// Throws ConfigError for an unknown name.
    [[nodiscard]] auto make(const std::string& name, const ProblemOptions& options = {}) const -> ProblemDefinition;
    [[nodiscard]] auto names() const -> std::vector<std::string>;

private:
    std::map<std::string, ProblemFactory> factories_;
};

} // namespace mome
