#include "mome/core.hpp"

#include "mome/errors.hpp"
#include "mome/random.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <string>
#include <thread>

namespace mome {

auto Solution::fitness_sum() const -> double
{
    return std::accumulate(fitness.begin(), fitness.end(), 0.0);
}

namespace {

auto check_finite(const Solution& s, std::size_t index) -> void
{
    const auto finite = [](double v) { return std::isfinite(v); };
    if (!std::all_of(s.fitness.begin(), s.fitness.end(), finite) ||
        !std::all_of(s.descriptor.begin(), s.descriptor.end(), finite)) {
        throw InvalidArgument("evaluation of genotype " + std::to_string(index) + " produced a non-finite value");
    }
}

} // namespace

auto evaluate_batch(const ProblemDefinition& problem, std::span<const Genotype> genotypes, IdCounter& ids,
                    const EvaluationOptions& options) -> std::vector<Solution>
{
    for (std::size_t i = 0; i < genotypes.size(); ++i) {
        if (genotypes[i].size() != problem.search_dim) {
            throw InvalidArgument("genotype " + std::to_string(i) + " has length " +
                                  std::to_string(genotypes[i].size()) + ", expected " +
                                  std::to_string(problem.search_dim));
        }
    }

    const auto first_id = ids.take(genotypes.size());
    std::vector<Solution> out(genotypes.size());

    auto work = [&](std::size_t begin, std::size_t end) {
        for (auto i = begin; i < end; ++i) {
            auto eval = problem.evaluate(genotypes[i]);
            out[i] = Solution{genotypes[i], std::move(eval.fitness), std::move(eval.descriptor), first_id + i};
        }
    };

    const auto workers = std::min<std::size_t>(std::max(1U, options.threads), genotypes.size());
    if (workers <= 1) {
        work(0, genotypes.size());
    } else {
        // Contiguous chunks; each slot is written by exactly one worker.
        std::vector<std::exception_ptr> errors(workers);
        {
            std::vector<std::jthread> pool;
            pool.reserve(workers);
            const auto chunk = (genotypes.size() + workers - 1) / workers;
            for (std::size_t w = 0; w < workers; ++w) {
                const auto begin = w * chunk;
                const auto end = std::min(genotypes.size(), begin + chunk);
                pool.emplace_back([&, w, begin, end] {
                    try {
                        work(begin, end);
                    } catch (...) {
                        errors[w] = std::current_exception();
                    }
                });
            }
        }
        for (const auto& e : errors) {
            if (e) std::rethrow_exception(e);
        }
    }

    for (std::size_t i = 0; i < out.size(); ++i) check_finite(out[i], i);
    return out;
}

auto random_genotype(const ProblemDefinition& problem, RandomStream& rng) -> Genotype
{
    Genotype g(problem.search_dim);
    for (std::size_t i = 0; i < problem.search_dim; ++i) {
        const auto& b = problem.genotype_bounds[i];
        g[i] = rng.uniform(b.min, b.max);
    }
    return g;
}

} // namespace mome
