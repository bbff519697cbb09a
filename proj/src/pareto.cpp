#include "mome/pareto.hpp"

#include "mome/errors.hpp"

#include <algorithm>
#include <string>

namespace mome {

auto dominates(const FitnessVector& a, const FitnessVector& b, DominanceRule rule) -> bool
{
    if (a.size() != b.size() || a.empty()) {
        throw InvalidArgument("dominates: fitness lengths " + std::to_string(a.size()) + " and " +
                              std::to_string(b.size()) + " are incompatible");
    }
    if (rule == DominanceRule::Strict) {
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (!(a[i] > b[i])) return false;
        }
        return true;
    }
    bool better_somewhere = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] < b[i]) return false;
        if (a[i] > b[i]) better_somewhere = true;
    }
    return better_somewhere;
}

ParetoFront::ParetoFront(std::size_t capacity, FrontPolicy policy) : capacity_(capacity), policy_(policy)
{
    if (capacity == 0) throw InvalidArgument("ParetoFront capacity must be positive");
    members_.reserve(capacity + 1);
}

auto ParetoFront::insert(Solution candidate, RandomStream& rng) -> InsertionReport
{
    InsertionReport report;
    for (const auto& m : members_) {
        if (dominates(m.fitness, candidate.fitness, policy_.dominance)) return report;
        if (policy_.duplicates == DuplicatePolicy::Drop && m.fitness == candidate.fitness &&
            m.genotype == candidate.genotype) {
            return report;
        }
    }

    std::erase_if(members_, [&](const Solution& m) {
        if (dominates(candidate.fitness, m.fitness, policy_.dominance)) {
            report.removed_ids.push_back(m.id);
            return true;
        }
        return false;
    });

    members_.push_back(std::move(candidate));
    report.added = true;

    while (members_.size() > capacity_) {
        // The candidate sits at the back; only incumbents are eligible.
        const auto victim = rng.index(members_.size() - 1);
        report.removed_ids.push_back(members_[victim].id);
        members_.erase(members_.begin() + static_cast<std::ptrdiff_t>(victim));
    }
    return report;
}

auto ParetoFront::fitnesses() const -> std::vector<FitnessVector>
{
    std::vector<FitnessVector> out;
    out.reserve(members_.size());
    for (const auto& m : members_) out.push_back(m.fitness);
    return out;
}

auto hypervolume(std::span<const FitnessVector> points, const FitnessVector& reference) -> double
{
    if (reference.size() != 2) {
        throw UnsupportedDimension("exact hypervolume requires 2 objectives, got " +
                                   std::to_string(reference.size()));
    }
    std::vector<std::pair<double, double>> pts;
    pts.reserve(points.size());
    for (const auto& p : points) {
        if (p.size() != 2) throw InvalidArgument("hypervolume: point length differs from reference length");
        if (p[0] > reference[0] && p[1] > reference[1]) pts.emplace_back(p[0], p[1]);
    }
    // Sweep from the largest first objective; each point adds the strip above
    // the best second objective seen so far.
    std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
        return a.first > b.first || (a.first == b.first && a.second > b.second);
    });
    double area = 0.0;
    double ceiling = reference[1];
    for (const auto& [x, y] : pts) {
        if (y > ceiling) {
            area += (x - reference[0]) * (y - ceiling);
            ceiling = y;
        }
    }
    return area;
}

auto hypervolume(const ParetoFront& front, const FitnessVector& reference) -> double
{
    const auto f = front.fitnesses();
    return hypervolume(f, reference);
}

auto pareto_front_of(std::span<const Solution> solutions, DominanceRule rule) -> std::vector<Solution>
{
    std::vector<Solution> out;
    for (std::size_t i = 0; i < solutions.size(); ++i) {
        bool dominated = false;
        for (std::size_t j = 0; j < solutions.size() && !dominated; ++j) {
            dominated = j != i && dominates(solutions[j].fitness, solutions[i].fitness, rule);
        }
        if (!dominated) out.push_back(solutions[i]);
    }
    std::stable_sort(out.begin(), out.end(), [](const Solution& a, const Solution& b) { return a.id < b.id; });
    return out;
}

auto to_string(DominanceRule rule) -> std::string_view
{
    return rule == DominanceRule::Strict ? "strict" : "weak";
}

auto to_string(DuplicatePolicy policy) -> std::string_view
{
    return policy == DuplicatePolicy::Drop ? "drop" : "keep";
}

} // namespace mome
