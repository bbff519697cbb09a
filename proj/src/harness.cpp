#include "mome/harness.hpp"

#include "mome/errors.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#ifndef MOME_BUILD_ID
#define MOME_BUILD_ID "unknown"
#endif

namespace mome {

auto build_id() -> std::string
{
    return MOME_BUILD_ID;
}

auto set_reference_point(const ProblemDefinition& problem, const RunConfig& cfg) -> FitnessVector
{
    if (!cfg.reference) return problem.hypervolume_reference;
    if (cfg.reference->size() != problem.num_objectives) {
        throw ConfigError("metrics.reference has " + std::to_string(cfg.reference->size()) + " components, problem '" +
                          problem.name + "' has " + std::to_string(problem.num_objectives) + " objectives");
    }
    return *cfg.reference;
}

namespace {

/// Process-wide memo of tessellations; building one is the most expensive
/// part of a short run and every algorithm of a given seed shares it.
auto cached_grid(const ProblemDefinition& problem, std::size_t cells, std::uint64_t seed, const CvtOptions& options,
                 bool scalar) -> std::shared_ptr<const CvtTessellation>
{
    using Key = std::tuple<std::string, std::size_t, std::size_t, std::uint64_t, std::size_t, std::size_t, bool>;
    static std::mutex mutex;
    static std::map<Key, std::shared_ptr<const CvtTessellation>> cache;
    const Key key{problem.name, problem.search_dim, cells, seed, options.num_init_samples, options.kmeans_iters,
                  scalar};
    {
        std::scoped_lock lock(mutex);
        if (const auto it = cache.find(key); it != cache.end()) return it->second;
    }
    auto grid = scalar ? build_scalar_grid(problem, cells, seed, options) : build_grid(problem, cells, seed, options);
    std::scoped_lock lock(mutex);
    return cache.emplace(key, std::move(grid)).first->second;
}

auto make_problem(const RunConfig& cfg, const ProblemRegistry& registry) -> ProblemDefinition
{
    ProblemOptions opts;
    opts.search_dim = cfg.search_dim;
    try {
        return registry.make(cfg.problem, opts);
    } catch (const InvalidArgument& e) {
        throw ConfigError("problem '" + cfg.problem + "': " + e.what());
    }
}

struct SeedRun {
    std::vector<MetricsRecord> rows;
    std::unique_ptr<Algorithm> algorithm;
    FitnessVector reference;
    double wall_time_s = 0.0;
};

auto execute(const RunConfig& cfg, std::uint64_t seed, const ProblemRegistry& registry, const RunObserver& observer)
    -> SeedRun
{
    const auto problem = make_problem(cfg, registry);
    const auto kind = parse_algorithm(cfg.algorithm);
    SeedRun run;
    run.reference = set_reference_point(problem, cfg);

    AlgorithmResources resources;
    resources.grid = cached_grid(problem, cfg.algo.num_cells, seed, cfg.algo.cvt, false);
    if (kind == AlgorithmKind::MapElites) {
        resources.scalar_grid = cached_grid(problem, cfg.algo.population_size(), seed, cfg.algo.cvt, true);
    }

    const auto start = std::chrono::steady_clock::now();
    const auto elapsed = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    };

    EvaluationOptions eval;
    eval.threads = cfg.threads;
    run.algorithm = make_algorithm(kind, problem, cfg.algo, seed, eval, resources);
    auto& algo = *run.algorithm;
    const auto dominance = cfg.algo.front_policy.dominance;

    const auto log = [&] {
        auto r = compute_metrics(algo.metrics_archive(), run.reference, algo.generation(), algo.evaluations(),
                                 algo.max_sum(), dominance);
        if (cfg.record_wall_time) r.wall_time_s = elapsed();
        run.rows.push_back(r);
        if (observer) observer(algo, r);
    };

    log();
    const auto batch = cfg.algo.batch_size;
    while (algo.evaluations() + batch <= cfg.total_evaluations) {
        algo.step();
        const bool last = algo.evaluations() + batch > cfg.total_evaluations;
        if (last || algo.generation() % cfg.log_interval == 0) log();
    }
    run.wall_time_s = elapsed();
    return run;
}

auto provenance_line(const std::string& hash, std::uint64_t seed, const RunConfig& cfg,
                     const FitnessVector& reference) -> std::string
{
    return fmt::format("# config_hash={} seed={} algorithm={} problem={} reference={}", hash, seed, cfg.algorithm,
                       cfg.problem, fmt::join(reference.values(), ","));
}

auto open_out(const std::filesystem::path& path) -> std::ofstream
{
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot write '" + path.string() + "'");
    return os;
}

auto write_seed(const RunConfig& cfg, const std::string& hash, std::uint64_t seed, const SeedRun& run) -> SeedOutput
{
    const auto stem = fmt::format("{}_{}_seed{}", cfg.algorithm, cfg.problem, seed);
    SeedOutput out;
    out.seed = seed;
    out.metrics_csv = cfg.output_dir / (stem + "_metrics.csv");
    out.snapshot = cfg.output_dir / (stem + "_archive.jsonl");
    out.global_front = cfg.output_dir / (stem + "_global_front.csv");
    out.centroids = cfg.output_dir / (stem + "_centroids.csv");
    out.metadata = cfg.output_dir / (stem + "_metadata.json");
    out.final_metrics = run.rows.back();

    const auto& algo = *run.algorithm;
    const auto& archive = algo.metrics_archive();
    const auto prov = provenance_line(hash, seed, cfg, run.reference);

    {
        auto os = open_out(out.metrics_csv);
        os << prov << '\n' << kMetricsCsvHeader << '\n';
        for (const auto& r : run.rows) os << to_csv_row(r) << '\n';
    }
    {
        nlohmann::json header;
        header["config_hash"] = hash;
        header["seed"] = seed;
        header["algorithm"] = cfg.algorithm;
        header["problem"] = cfg.problem;
        header["reference"] = run.reference.values();
        auto os = open_out(out.snapshot);
        SnapshotOptions snap;
        snap.include_genotype = cfg.include_genotype;
        write_snapshot(os, archive, header.dump(), snap);
    }
    {
        auto os = open_out(out.global_front);
        os << prov << '\n';
        std::vector<SnapshotRecord> records;
        for (std::size_t c = 0; c < archive.num_cells(); ++c) {
            for (const auto& s : archive.front(c).members()) {
                records.push_back({c, s.id, s.fitness, s.descriptor, std::nullopt});
            }
        }
        export_front(os, records, cfg.algo.front_policy.dominance);
    }
    {
        auto os = open_out(out.centroids);
        os << prov << '\n';
        archive.tessellation().write_csv(os);
    }
    {
        nlohmann::json meta;
        meta["config"] = nlohmann::json::parse(config_to_json(cfg));
        meta["config_hash"] = hash;
        meta["seed"] = seed;
        meta["build_id"] = build_id();
        meta["reference"] = run.reference.values();
        meta["generations"] = algo.generation();
        meta["evaluations"] = algo.evaluations();
        meta["wall_time_s"] = run.wall_time_s;
        meta["decisions"] = {
            {"dominance", to_string(cfg.algo.front_policy.dominance)},
            {"duplicates", to_string(cfg.algo.front_policy.duplicates)},
            {"eviction_excludes_new_candidate", true},
            {"parent_sampling", "uniform over non-empty cells, then uniform within front"},
            {"crossover", to_string(cfg.algo.variation.crossover)},
            {"mutation", to_string(cfg.algo.variation.mutation)},
            {"initial_population", cfg.algo.initial_population()},
            {"spea2_raw_fitness", cfg.algo.spea2_simple_count ? "dominator count" : "summed strengths"},
            {"objectives", "maximized; Rastrigin objectives negated"},
            {"metrics_archive", algo.kind() == AlgorithmKind::Mome ? "own grid" : "passive archive"},
        };
        const auto& f = out.final_metrics;
        meta["final_metrics"] = {{"moqd_score", f.moqd_score},
                                 {"coverage_count", f.coverage_count},
                                 {"coverage_fraction", f.coverage_fraction},
                                 {"global_hypervolume", f.global_hypervolume},
                                 {"max_sum", f.max_sum},
                                 {"total_solutions", f.total_solutions}};
        auto os = open_out(out.metadata);
        os << meta.dump(2) << '\n';
    }
    return out;
}

} // namespace

auto run_single(const RunConfig& cfg, std::uint64_t seed, const ProblemRegistry& registry,
                const RunObserver& observer) -> std::vector<MetricsRecord>
{
    cfg.validate();
    return execute(cfg, seed, registry, observer).rows;
}

auto run_experiment(const RunConfig& cfg, const ProblemRegistry& registry) -> ExperimentResult
{
    cfg.validate();
    if (!registry.contains(cfg.problem)) throw ConfigError("unknown problem '" + cfg.problem + "'");
    (void)set_reference_point(make_problem(cfg, registry), cfg);

    std::error_code ec;
    std::filesystem::create_directories(cfg.output_dir, ec);
    if (ec || !std::filesystem::is_directory(cfg.output_dir)) {
        throw IoError("cannot create output directory '" + cfg.output_dir.string() + "'");
    }
    {
        const auto probe = cfg.output_dir / ".write_probe";
        std::ofstream os(probe);
        if (!os) throw IoError("output directory '" + cfg.output_dir.string() + "' is not writable");
        os.close();
        std::filesystem::remove(probe, ec);
    }

    ExperimentResult result;
    result.config_hash = config_hash(cfg);
    result.seeds.resize(cfg.seeds.size());

    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(cfg.seeds.size());
    const auto worker = [&] {
        for (auto i = next++; i < cfg.seeds.size(); i = next++) {
            try {
                const auto run = execute(cfg, cfg.seeds[i], registry, {});
                result.seeds[i] = write_seed(cfg, result.config_hash, cfg.seeds[i], run);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const auto jobs = std::clamp<std::size_t>(cfg.jobs, 1, cfg.seeds.size());
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return result;
}

// ---------------------------------------------------------------------------

auto read_metrics_csv(const std::filesystem::path& path) -> MetricsFile
{
    std::ifstream is(path);
    if (!is) throw IoError("cannot read '" + path.string() + "'");
    MetricsFile file;
    std::string line;
    bool seen_seed = false;
    bool seen_header = false;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line.front() == '#') {
            std::istringstream tokens(line.substr(1));
            std::string token;
            while (tokens >> token) {
                const auto eq = token.find('=');
                if (eq == std::string::npos) continue;
                const auto key = token.substr(0, eq);
                const auto value = token.substr(eq + 1);
                if (key == "seed") {
                    file.seed = std::stoull(value);
                    seen_seed = true;
                } else if (key == "config_hash") {
                    file.config_hash = value;
                }
            }
            continue;
        }
        if (!seen_header) {
            if (line != kMetricsCsvHeader) throw IoError("'" + path.string() + "' has an unexpected header");
            seen_header = true;
            continue;
        }
        file.rows.push_back(parse_csv_row(line));
    }
    if (!seen_seed) throw IoError("'" + path.string() + "' has no seed provenance line");
    if (file.rows.empty()) throw IoError("'" + path.string() + "' has no metric rows");
    return file;
}

auto metric_value(const MetricsRecord& r, const std::string& metric) -> double
{
    if (metric == "moqd_score") return r.moqd_score;
    if (metric == "coverage_count") return static_cast<double>(r.coverage_count);
    if (metric == "coverage_fraction") return r.coverage_fraction;
    if (metric == "global_hypervolume") return r.global_hypervolume;
    if (metric == "max_sum") return r.max_sum;
    if (metric == "total_solutions") return static_cast<double>(r.total_solutions);
    if (metric == "evaluations") return static_cast<double>(r.evaluations);
    throw InvalidArgument("unknown metric '" + metric + "'");
}

namespace {

auto summarize(std::vector<double> values) -> SampleSummary
{
    SampleSummary s;
    s.median = quantile(values, 0.5);
    s.q1 = quantile(values, 0.25);
    s.q3 = quantile(values, 0.75);
    s.values = std::move(values);
    return s;
}

auto final_by_seed(const std::vector<std::filesystem::path>& files, const std::string& metric)
    -> std::map<std::uint64_t, double>
{
    std::map<std::uint64_t, double> out;
    for (const auto& f : files) {
        const auto m = read_metrics_csv(f);
        if (!out.emplace(m.seed, metric_value(m.rows.back(), metric)).second) {
            throw InvalidArgument("seed " + std::to_string(m.seed) + " appears twice in one group");
        }
    }
    return out;
}

} // namespace

auto compare_samples(const std::vector<std::uint64_t>& seeds, std::vector<double> a, std::vector<double> b,
                     const std::string& metric, PairedTest test) -> ComparisonReport
{
    ComparisonReport report;
    report.metric = metric;
    report.test = test;
    report.seeds = seeds;
    try {
        report.result = test == PairedTest::SignedRank ? wilcoxon_signed_rank(a, b) : wilcoxon_rank_sum(a, b);
    } catch (const DegenerateSample&) {
        // Identical samples carry no evidence of a difference.
        report.degenerate = true;
        report.result = TestResult{0.0, 1.0, 0, true};
    }
    report.a = summarize(std::move(a));
    report.b = summarize(std::move(b));
    return report;
}

auto compare_runs(const std::vector<std::filesystem::path>& files_a, const std::vector<std::filesystem::path>& files_b,
                  const std::string& metric, PairedTest test) -> ComparisonReport
{
    const auto a = final_by_seed(files_a, metric);
    const auto b = final_by_seed(files_b, metric);
    std::vector<std::uint64_t> seeds;
    for (const auto& [seed, v] : a) {
        if (!b.contains(seed)) throw InvalidArgument("seed " + std::to_string(seed) + " missing from group B");
        seeds.push_back(seed);
    }
    if (a.size() != b.size()) throw InvalidArgument("group B has seeds that group A lacks");
    if (seeds.size() < 6) throw InvalidArgument("comparison needs at least 6 matched seeds");

    std::vector<double> va;
    std::vector<double> vb;
    for (const auto s : seeds) {
        va.push_back(a.at(s));
        vb.push_back(b.at(s));
    }
    return compare_samples(seeds, std::move(va), std::move(vb), metric, test);
}

auto ComparisonReport::to_json() const -> std::string
{
    const auto side = [](const SampleSummary& s) {
        return nlohmann::json{{"median", s.median}, {"q1", s.q1}, {"q3", s.q3}, {"values", s.values}};
    };
    nlohmann::json j;
    j["metric"] = metric;
    j["test"] = test == PairedTest::SignedRank ? "wilcoxon_signed_rank" : "wilcoxon_rank_sum";
    j["seeds"] = seeds;
    j["a"] = side(a);
    j["b"] = side(b);
    j["statistic"] = result.statistic;
    j["p_value"] = result.p_value;
    j["exact"] = result.exact;
    j["n"] = result.n;
    j["degenerate"] = degenerate;
    return j.dump(2);
}

// ---------------------------------------------------------------------------

auto calibrate_reference(const ProblemDefinition& problem, std::size_t samples, std::uint64_t seed, double round_to,
                         unsigned threads) -> Calibration
{
    if (samples == 0) throw InvalidArgument("calibration needs at least one sample");
    if (!(round_to > 0.0)) throw InvalidArgument("round_to must be positive");
    Calibration c;
    c.samples = samples;
    c.seed = seed;
    c.round_to = round_to;
    c.minimum = FitnessVector(problem.num_objectives, std::numeric_limits<double>::infinity());

    auto rng = RandomStream::named(seed, "calibration");
    IdCounter ids;
    EvaluationOptions eval;
    eval.threads = threads;
    constexpr std::size_t chunk = 8192;
    std::vector<Genotype> batch;
    for (std::size_t done = 0; done < samples;) {
        const auto n = std::min(chunk, samples - done);
        batch.clear();
        for (std::size_t i = 0; i < n; ++i) batch.push_back(random_genotype(problem, rng));
        for (const auto& s : evaluate_batch(problem, batch, ids, eval)) {
            for (std::size_t k = 0; k < s.fitness.size(); ++k) c.minimum[k] = std::min(c.minimum[k], s.fitness[k]);
        }
        done += n;
    }
    c.reference = FitnessVector(problem.num_objectives);
    for (std::size_t k = 0; k < problem.num_objectives; ++k) {
        c.reference[k] = std::floor(c.minimum[k] / round_to) * round_to;
    }
    return c;
}

auto calibration_to_json(const ProblemDefinition& problem, const Calibration& c) -> std::string
{
    nlohmann::json j;
    j["problem"] = problem.name;
    j["search_dim"] = problem.search_dim;
    j["method"] = "uniform random search over the genotype box; per-objective minimum rounded down";
    j["samples"] = c.samples;
    j["seed"] = c.seed;
    j["round_to"] = c.round_to;
    j["minimum_fitness"] = c.minimum.values();
    j["reference"] = c.reference.values();
    j["build_id"] = build_id();
    return j.dump(2);
}

auto read_centroids_csv(const std::filesystem::path& path, const std::vector<Bounds>& bounds) -> CvtTessellation
{
    std::ifstream is(path);
    if (!is) throw IoError("cannot read '" + path.string() + "'");
    std::vector<std::vector<double>> centroids;
    std::string line;
    bool header = false;
    while (std::getline(is, line)) {
        if (line.empty() || line.front() == '#') continue;
        if (!header) {
            header = true;
            continue;
        }
        std::stringstream ss(line);
        std::string field;
        std::getline(ss, field, ',');
        std::vector<double> c;
        while (std::getline(ss, field, ',')) c.push_back(std::stod(field));
        centroids.push_back(std::move(c));
    }
    if (centroids.empty()) throw IoError("'" + path.string() + "' has no centroids");
    auto b = bounds;
    if (b.empty()) {
        // Bounds are not stored in the CSV; fall back to the centroid box.
        b.assign(centroids.front().size(), Bounds{std::numeric_limits<double>::infinity(),
                                                  -std::numeric_limits<double>::infinity()});
        for (const auto& c : centroids) {
            for (std::size_t k = 0; k < c.size(); ++k) {
                b[k].min = std::min(b[k].min, c[k]);
                b[k].max = std::max(b[k].max, c[k]);
            }
        }
    }
    return CvtTessellation(std::move(centroids), std::move(b));
}

auto export_grid(std::ostream& os, const std::vector<SnapshotRecord>& records, const CvtTessellation& tessellation,
                 const FitnessVector& reference) -> void
{
    std::vector<std::vector<FitnessVector>> cells(tessellation.num_cells());
    for (const auto& r : records) {
        if (r.cell_index >= cells.size()) throw InvalidArgument("snapshot cell index exceeds the tessellation");
        cells[r.cell_index].push_back(r.fitness);
    }
    os << "cell_index";
    for (std::size_t k = 0; k < tessellation.dim(); ++k) os << ",c" << k;
    os << ",hypervolume,front_size\n";
    for (std::size_t i = 0; i < cells.size(); ++i) {
        os << i;
        for (const auto v : tessellation.centroid(i)) os << fmt::format(",{}", v);
        os << fmt::format(",{},{}\n", cells[i].empty() ? 0.0 : hypervolume(cells[i], reference), cells[i].size());
    }
}

auto export_front(std::ostream& os, const std::vector<SnapshotRecord>& records, DominanceRule rule) -> void
{
    std::vector<Solution> all;
    std::map<SolutionId, std::size_t> cell_of;
    all.reserve(records.size());
    for (const auto& r : records) {
        all.push_back(Solution{Genotype{}, r.fitness, r.descriptor, r.solution_id});
        cell_of[r.solution_id] = r.cell_index;
    }
    const auto front = pareto_front_of(all, rule);
    const auto k = records.empty() ? 0 : records.front().fitness.size();
    const auto d = records.empty() ? 0 : records.front().descriptor.size();
    os << "solution_id,cell_index";
    for (std::size_t i = 0; i < k; ++i) os << ",f" << i;
    for (std::size_t i = 0; i < d; ++i) os << ",d" << i;
    os << '\n';
    for (const auto& s : front) {
        os << s.id << ',' << cell_of[s.id];
        for (const auto v : s.fitness) os << fmt::format(",{}", v);
        for (const auto v : s.descriptor) os << fmt::format(",{}", v);
        os << '\n';
    }
}

} // namespace mome
