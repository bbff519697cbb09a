#include "mome/algorithms.hpp"

#include "mome/errors.hpp"
#include "mome/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace mome {

auto to_string(AlgorithmKind kind) -> std::string_view
{
    switch (kind) {
    case AlgorithmKind::Mome: return "mome";
    case AlgorithmKind::MapElites: return "map_elites";
    case AlgorithmKind::Nsga2: return "nsga2";
    case AlgorithmKind::Spea2: return "spea2";
    }
    return "unknown";
}

auto parse_algorithm(std::string_view name) -> AlgorithmKind
{
    for (const auto k : {AlgorithmKind::Mome, AlgorithmKind::MapElites, AlgorithmKind::Nsga2, AlgorithmKind::Spea2}) {
        if (to_string(k) == name) return k;
    }
    throw ConfigError("unknown algorithm '" + std::string(name) + "'");
}

RunStreams::RunStreams(std::uint64_t seed)
    : init(RandomStream::named(seed, "init"))
    , selection(RandomStream::named(seed, "selection"))
    , variation(RandomStream::named(seed, "variation"))
    , eviction(RandomStream::named(seed, "eviction"))
    , cvt(RandomStream::named(seed, "cvt"))
    , scalar_cvt(RandomStream::named(seed, "cvt_scalar"))
{}

auto build_grid(const ProblemDefinition& problem, std::size_t cells, std::uint64_t seed, const CvtOptions& options)
    -> std::shared_ptr<const CvtTessellation>
{
    auto rng = RunStreams(seed).cvt;
    return std::make_shared<const CvtTessellation>(build_cvt(cells, problem.descriptor_bounds, rng, options));
}

auto build_scalar_grid(const ProblemDefinition& problem, std::size_t cells, std::uint64_t seed,
                       const CvtOptions& options) -> std::shared_ptr<const CvtTessellation>
{
    auto rng = RunStreams(seed).scalar_cvt;
    return std::make_shared<const CvtTessellation>(build_cvt(cells, problem.descriptor_bounds, rng, options));
}

// ---------------------------------------------------------------------------

Algorithm::Algorithm(ProblemDefinition problem, AlgorithmConfig config, std::uint64_t seed, EvaluationOptions eval)
    : problem_(std::move(problem)), config_(std::move(config)), streams_(seed), eval_(eval)
{
    if (config_.num_cells == 0 || config_.front_capacity == 0 || config_.batch_size == 0) {
        throw InvalidArgument("cells, front capacity and batch size must all be positive");
    }
    if (config_.initial_population() == 0) throw InvalidArgument("initial population must be positive");
    if (config_.variation.genotype_bounds.empty()) config_.variation.genotype_bounds = problem_.genotype_bounds;
    if (config_.variation.genotype_bounds.size() != problem_.search_dim) {
        throw InvalidArgument("variation bounds length differs from the search dimension");
    }
    config_.variation.validate();
}

auto Algorithm::step() -> void
{
    generation_step();
    ++generation_;
}

auto Algorithm::evaluate(std::span<const Genotype> genotypes) -> std::vector<Solution>
{
    auto out = evaluate_batch(problem_, genotypes, ids_, eval_);
    evaluations_ += out.size();
    return out;
}

auto Algorithm::random_population(std::size_t count) -> std::vector<Genotype>
{
    std::vector<Genotype> g;
    g.reserve(count);
    for (std::size_t i = 0; i < count; ++i) g.push_back(random_genotype(problem_, streams_.init));
    return g;
}

auto Algorithm::vary(std::span<const Solution> parents) -> std::vector<Genotype>
{
    std::vector<Genotype> genotypes;
    genotypes.reserve(parents.size());
    for (const auto& p : parents) genotypes.push_back(p.genotype);
    const auto generation_stream = streams_.variation.split();
    return make_offspring(genotypes, config_.batch_size, config_.variation, generation_stream);
}

auto Algorithm::parents_per_generation() const -> std::size_t
{
    return parents_needed(config_.variation.p_mut, config_.batch_size);
}

auto make_algorithm(AlgorithmKind kind, const ProblemDefinition& problem, const AlgorithmConfig& config,
                    std::uint64_t seed, const EvaluationOptions& eval, const AlgorithmResources& resources)
    -> std::unique_ptr<Algorithm>
{
    auto grid = resources.grid ? resources.grid : build_grid(problem, config.num_cells, seed, config.cvt);
    if (grid->num_cells() != config.num_cells) throw InvalidArgument("supplied grid has the wrong number of cells");

    std::unique_ptr<Algorithm> algo;
    switch (kind) {
    case AlgorithmKind::Mome: algo = std::make_unique<MomeAlgorithm>(problem, config, seed, eval, grid); break;
    case AlgorithmKind::MapElites: {
        auto scalar = resources.scalar_grid
                          ? resources.scalar_grid
                          : build_scalar_grid(problem, config.population_size(), seed, config.cvt);
        if (scalar->num_cells() != config.population_size()) {
            throw InvalidArgument("supplied MAP-Elites grid must have cells * front_capacity cells");
        }
        algo = std::make_unique<MapElitesAlgorithm>(problem, config, seed, eval, grid, scalar);
        break;
    }
    case AlgorithmKind::Nsga2: algo = std::make_unique<Nsga2Algorithm>(problem, config, seed, eval, grid); break;
    case AlgorithmKind::Spea2: algo = std::make_unique<Spea2Algorithm>(problem, config, seed, eval, grid); break;
    }
    algo->initialize();
    return algo;
}

// ---------------------------------------------------------------------------
// MOME

MomeAlgorithm::MomeAlgorithm(const ProblemDefinition& problem, const AlgorithmConfig& config, std::uint64_t seed,
                             const EvaluationOptions& eval, std::shared_ptr<const CvtTessellation> grid)
    : Algorithm(problem, config, seed, eval)
    , archive_(std::move(grid), config.front_capacity, config.front_policy, streams_.eviction)
{}

auto MomeAlgorithm::initialize() -> void
{
    const auto genotypes = random_population(config_.initial_population());
    const auto solutions = evaluate(genotypes);
    archive_.insert(solutions);
}

auto MomeAlgorithm::generation_step() -> void
{
    const auto parents = archive_.sample(parents_per_generation(), streams_.selection);
    const auto offspring = vary(parents);
    const auto solutions = evaluate(offspring);
    archive_.insert(solutions);
}

auto MomeAlgorithm::max_sum() const -> double
{
    return mome::max_sum(archive_);
}

PassiveInstrumented::PassiveInstrumented(const ProblemDefinition& problem, const AlgorithmConfig& config,
                                         std::uint64_t seed, const EvaluationOptions& eval,
                                         std::shared_ptr<const CvtTessellation> grid)
    : Algorithm(problem, config, seed, eval)
    , passive_(std::make_unique<MoqdArchive>(std::move(grid), config.front_capacity, config.front_policy,
                                             streams_.eviction))
    , sink_(*passive_)
{}

// ---------------------------------------------------------------------------
// MAP-Elites

MapElitesAlgorithm::MapElitesAlgorithm(const ProblemDefinition& problem, const AlgorithmConfig& config,
                                       std::uint64_t seed, const EvaluationOptions& eval,
                                       std::shared_ptr<const CvtTessellation> grid,
                                       std::shared_ptr<const CvtTessellation> scalar_grid)
    : PassiveInstrumented(problem, config, seed, eval, std::move(grid)), grid_(std::move(scalar_grid))
{}

auto MapElitesAlgorithm::initialize() -> void
{
    const auto solutions = evaluate(random_population(config_.initial_population()));
    grid_.insert(solutions);
    mirror(solutions);
}

auto MapElitesAlgorithm::generation_step() -> void
{
    const auto parents = grid_.sample(parents_per_generation(), streams_.selection);
    const auto solutions = evaluate(vary(parents));
    grid_.insert(solutions);
    mirror(solutions);
}

auto MapElitesAlgorithm::max_sum() const -> double
{
    return mome::max_sum(grid_);
}

// ---------------------------------------------------------------------------
// NSGA-II

auto non_dominated_sort(std::span<const FitnessVector> fitness, DominanceRule rule)
    -> std::vector<std::vector<std::size_t>>
{
    const auto n = fitness.size();
    std::vector<std::vector<std::size_t>> dominated_by_me(n);
    std::vector<std::size_t> counter(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (dominates(fitness[i], fitness[j], rule)) {
                dominated_by_me[i].push_back(j);
                ++counter[j];
            } else if (dominates(fitness[j], fitness[i], rule)) {
                dominated_by_me[j].push_back(i);
                ++counter[i];
            }
        }
    }
    std::vector<std::vector<std::size_t>> fronts;
    std::vector<std::size_t> current;
    for (std::size_t i = 0; i < n; ++i) {
        if (counter[i] == 0) current.push_back(i);
    }
    while (!current.empty()) {
        std::vector<std::size_t> next;
        for (const auto i : current) {
            for (const auto j : dominated_by_me[i]) {
                if (--counter[j] == 0) next.push_back(j);
            }
        }
        std::sort(next.begin(), next.end());
        fronts.push_back(std::move(current));
        current = std::move(next);
    }
    return fronts;
}

auto crowding_distances(std::span<const FitnessVector> fitness, std::span<const std::size_t> front)
    -> std::vector<double>
{
    const auto m = front.size();
    std::vector<double> distance(m, 0.0);
    if (m == 0) return distance;
    constexpr auto inf = std::numeric_limits<double>::infinity();
    if (m <= 2) {
        std::fill(distance.begin(), distance.end(), inf);
        return distance;
    }
    const auto k = fitness[front[0]].size();
    std::vector<std::size_t> order(m);
    for (std::size_t obj = 0; obj < k; ++obj) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](auto a, auto b) { return fitness[front[a]][obj] < fitness[front[b]][obj]; });
        const auto lo = fitness[front[order.front()]][obj];
        const auto hi = fitness[front[order.back()]][obj];
        distance[order.front()] = inf;
        distance[order.back()] = inf;
        if (hi == lo) continue;
        for (std::size_t r = 1; r + 1 < m; ++r) {
            distance[order[r]] +=
                (fitness[front[order[r + 1]]][obj] - fitness[front[order[r - 1]]][obj]) / (hi - lo);
        }
    }
    return distance;
}

auto Nsga2Population::survive(std::vector<Solution> offspring) -> void
{
    std::vector<Solution> pool = std::move(members_);
    pool.insert(pool.end(), std::make_move_iterator(offspring.begin()), std::make_move_iterator(offspring.end()));

    std::vector<FitnessVector> fit;
    fit.reserve(pool.size());
    for (const auto& s : pool) fit.push_back(s.fitness);

    members_.clear();
    rank_.clear();
    crowding_.clear();
    const auto fronts = non_dominated_sort(fit, rule_);
    for (std::size_t r = 0; r < fronts.size() && members_.size() < capacity_; ++r) {
        const auto& front = fronts[r];
        const auto dist = crowding_distances(fit, front);
        std::vector<std::size_t> order(front.size());
        std::iota(order.begin(), order.end(), 0);
        const auto room = capacity_ - members_.size();
        if (front.size() > room) {
            std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return dist[a] > dist[b]; });
            order.resize(room);
        }
        for (const auto o : order) {
            members_.push_back(pool[front[o]]);
            rank_.push_back(r);
            crowding_.push_back(dist[o]);
        }
    }
}

auto Nsga2Population::select_parents(std::size_t count, RandomStream& rng) const -> std::vector<Solution>
{
    if (members_.empty()) throw EmptyArchive();
    std::vector<Solution> out;
    out.reserve(count);
    for (std::size_t n = 0; n < count; ++n) {
        const auto a = rng.index(members_.size());
        const auto b = rng.index(members_.size());
        const bool a_wins = rank_[a] < rank_[b] || (rank_[a] == rank_[b] && crowding_[a] >= crowding_[b]);
        out.push_back(members_[a_wins ? a : b]);
    }
    return out;
}

Nsga2Algorithm::Nsga2Algorithm(const ProblemDefinition& problem, const AlgorithmConfig& config, std::uint64_t seed,
                               const EvaluationOptions& eval, std::shared_ptr<const CvtTessellation> grid)
    : PassiveInstrumented(problem, config, seed, eval, std::move(grid))
    , population_(config.population_size(), config.front_policy.dominance)
{}

auto Nsga2Algorithm::initialize() -> void
{
    auto solutions = evaluate(random_population(config_.initial_population()));
    population_.survive(solutions);
    mirror(solutions);
}

auto Nsga2Algorithm::generation_step() -> void
{
    const auto parents = population_.select_parents(parents_per_generation(), streams_.selection);
    auto solutions = evaluate(vary(parents));
    population_.survive(solutions);
    mirror(solutions);
}

auto Nsga2Algorithm::max_sum() const -> double
{
    return mome::max_sum(population_.members());
}

// ---------------------------------------------------------------------------
// SPEA2

auto domination_counts(std::span<const FitnessVector> fitness, DominanceRule rule) -> std::vector<std::size_t>
{
    std::vector<std::size_t> counts(fitness.size(), 0);
    for (std::size_t i = 0; i < fitness.size(); ++i) {
        for (std::size_t j = 0; j < fitness.size(); ++j) {
            if (i != j && dominates(fitness[j], fitness[i], rule)) ++counts[i];
        }
    }
    return counts;
}

namespace {

auto objective_distance(const FitnessVector& a, const FitnessVector& b) -> double
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const auto d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

} // namespace

auto spea2_scores(std::span<const FitnessVector> fitness, DominanceRule rule, bool simple_count) -> Spea2Scores
{
    const auto n = fitness.size();
    Spea2Scores s;
    s.raw.assign(n, 0.0);
    s.density.assign(n, 0.0);
    s.fitness.assign(n, 0.0);
    if (n == 0) return s;

    std::vector<std::vector<bool>> dom(n, std::vector<bool>(n, false));
    std::vector<double> strength(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i != j && dominates(fitness[i], fitness[j], rule)) {
                dom[i][j] = true;
                strength[i] += 1.0;
            }
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (dom[j][i]) s.raw[i] += simple_count ? 1.0 : strength[j];
        }
    }

    const auto k = std::min<std::size_t>(static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(n)))),
                                         n - 1);
    std::vector<double> d;
    for (std::size_t i = 0; i < n; ++i) {
        double sigma = 0.0;
        if (k > 0) {
            d.clear();
            for (std::size_t j = 0; j < n; ++j) {
                if (j != i) d.push_back(objective_distance(fitness[i], fitness[j]));
            }
            std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k - 1), d.end());
            sigma = d[k - 1];
        }
        s.density[i] = 1.0 / (sigma + 2.0);
        s.fitness[i] = s.raw[i] + s.density[i];
    }
    return s;
}

auto spea2_environmental_selection(std::span<const FitnessVector> fitness, const Spea2Scores& scores,
                                   std::size_t capacity) -> std::vector<std::size_t>
{
    const auto n = fitness.size();
    std::vector<std::size_t> chosen;
    for (std::size_t i = 0; i < n; ++i) {
        if (scores.raw[i] == 0.0) chosen.push_back(i);
    }

    if (chosen.size() < capacity) {
        std::vector<std::size_t> rest;
        for (std::size_t i = 0; i < n; ++i) {
            if (scores.raw[i] != 0.0) rest.push_back(i);
        }
        std::stable_sort(rest.begin(), rest.end(),
                         [&](auto a, auto b) { return scores.fitness[a] < scores.fitness[b]; });
        const auto take = std::min(rest.size(), capacity - chosen.size());
        chosen.insert(chosen.end(), rest.begin(), rest.begin() + static_cast<std::ptrdiff_t>(take));
    } else if (chosen.size() > capacity) {
        // Iteratively drop the point whose sorted neighbour-distance list is
        // lexicographically smallest (ties: lowest position).
        // Only the closest `kept_neighbours` entries are stored up front; a
        // list is completed on demand if a comparison runs past its end.
        const auto m = chosen.size();
        constexpr std::size_t kept_neighbours = 64;
        std::vector<std::vector<std::pair<double, std::size_t>>> nearest(m);
        std::vector<bool> complete(m, false);
        const auto fill = [&](std::size_t a, std::size_t limit) {
            auto& list = nearest[a];
            list.clear();
            list.reserve(m - 1);
            for (std::size_t b = 0; b < m; ++b) {
                if (a != b) list.emplace_back(objective_distance(fitness[chosen[a]], fitness[chosen[b]]), b);
            }
            if (limit < list.size()) {
                std::partial_sort(list.begin(), list.begin() + static_cast<std::ptrdiff_t>(limit), list.end());
                list.resize(limit);
            } else {
                std::sort(list.begin(), list.end());
                complete[a] = true;
            }
        };
        for (std::size_t a = 0; a < m; ++a) fill(a, kept_neighbours);

        std::vector<bool> removed(m, false);
        std::vector<std::size_t> head(m, 0);
        const auto advance = [&](std::size_t a, std::size_t pos) {
            while (true) {
                while (pos < nearest[a].size() && removed[nearest[a][pos].second]) ++pos;
                if (pos < nearest[a].size() || complete[a]) return pos;
                // (distance, index) pairs are totally ordered, so the stored
                // prefix equals the full list's prefix and `pos` stays valid.
                fill(a, m);
            }
        };
        const auto less = [&](std::size_t a, std::size_t b) {
            auto pa = head[a];
            auto pb = head[b];
            while (true) {
                pa = advance(a, pa);
                pb = advance(b, pb);
                if (pa >= nearest[a].size() || pb >= nearest[b].size()) return false;
                if (nearest[a][pa].first != nearest[b][pb].first) return nearest[a][pa].first < nearest[b][pb].first;
                ++pa;
                ++pb;
            }
        };
        for (auto remaining = m; remaining > capacity; --remaining) {
            std::size_t victim = m;
            for (std::size_t a = 0; a < m; ++a) {
                if (removed[a]) continue;
                head[a] = advance(a, head[a]);
                if (victim == m || less(a, victim)) victim = a;
            }
            removed[victim] = true;
        }
        std::vector<std::size_t> kept;
        for (std::size_t a = 0; a < m; ++a) {
            if (!removed[a]) kept.push_back(chosen[a]);
        }
        chosen = std::move(kept);
    }
    std::sort(chosen.begin(), chosen.end());
    return chosen;
}

auto Spea2Population::survive(std::vector<Solution> offspring) -> void
{
    std::vector<Solution> pool = std::move(members_);
    pool.insert(pool.end(), std::make_move_iterator(offspring.begin()), std::make_move_iterator(offspring.end()));
    std::vector<FitnessVector> fit;
    fit.reserve(pool.size());
    for (const auto& s : pool) fit.push_back(s.fitness);

    const auto scores = spea2_scores(fit, rule_, simple_count_);
    const auto keep = spea2_environmental_selection(fit, scores, capacity_);
    members_.clear();
    fitness_.clear();
    for (const auto i : keep) {
        members_.push_back(std::move(pool[i]));
        fitness_.push_back(scores.fitness[i]);
    }
}

auto Spea2Population::select_parents(std::size_t count, RandomStream& rng) const -> std::vector<Solution>
{
    if (members_.empty()) throw EmptyArchive();
    std::vector<Solution> out;
    out.reserve(count);
    for (std::size_t n = 0; n < count; ++n) {
        const auto a = rng.index(members_.size());
        const auto b = rng.index(members_.size());
        out.push_back(members_[fitness_[a] <= fitness_[b] ? a : b]);
    }
    return out;
}

Spea2Algorithm::Spea2Algorithm(const ProblemDefinition& problem, const AlgorithmConfig& config, std::uint64_t seed,
                               const EvaluationOptions& eval, std::shared_ptr<const CvtTessellation> grid)
    : PassiveInstrumented(problem, config, seed, eval, std::move(grid))
    , population_(config.population_size(), config.front_policy.dominance, config.spea2_simple_count)
{}

auto Spea2Algorithm::initialize() -> void
{
    auto solutions = evaluate(random_population(config_.initial_population()));
    population_.survive(solutions);
    mirror(solutions);
}

auto Spea2Algorithm::generation_step() -> void
{
    const auto parents = population_.select_parents(parents_per_generation(), streams_.selection);
    auto solutions = evaluate(vary(parents));
    population_.survive(solutions);
    mirror(solutions);
}

auto Spea2Algorithm::max_sum() const -> double
{
    return mome::max_sum(population_.members());
}

} // namespace mome
