// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.
// Set MOME_ACCEPTANCE_JOBS to run the desk-scale seeds on several threads.

#include "mome/algorithms.hpp"
#include "mome/domains.hpp"
#include "mome/errors.hpp"
#include "mome/harness.hpp"
#include "mome/metrics.hpp"
#include "mome/pareto.hpp"

#include "oracles.hpp"

#include <fmt/core.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

using namespace mome;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

auto report(int id, bool pass, const std::string& summary) -> void
{
    if (!pass) ++g_failures;
    fmt::print("[{}] criterion {}: {}\n", pass ? "PASS" : "FAIL", id, summary);
    std::fflush(stdout);
}

auto note(const std::string& line) -> void
{
    fmt::print("    {}\n", line);
    std::fflush(stdout);
}

// ---------------------------------------------------------------------------
// Desk-scale benchmark shared by criteria 1, 2, 3 and 6.

constexpr const char* kProblems[] = {"rastrigin_proj", "rastrigin_multi"};
constexpr const char* kAlgorithms[] = {"mome", "map_elites", "nsga2", "spea2"};
constexpr std::uint64_t kSeeds = 10;

auto desk_config(const std::string& problem, const std::string& algorithm) -> RunConfig
{
    RunConfig cfg;
    apply_preset(cfg, "desk");
    cfg.problem = problem;
    cfg.algorithm = algorithm;
    cfg.algo.num_cells = 32;
    cfg.algo.front_capacity = 10;
    cfg.algo.batch_size = 256;
    cfg.total_evaluations = 100'000;
    cfg.log_interval = 10;
    return cfg;
}

struct InvariantLog {
    std::size_t checks = 0;
    std::vector<std::string> violations;
};

struct DeskResults {
    // [problem][algorithm] -> final row per seed
    std::map<std::string, std::map<std::string, std::vector<MetricsRecord>>> finals;
    InvariantLog invariants;
};

auto run_desk() -> DeskResults
{
    const auto registry = ProblemRegistry::with_builtins();
    struct Job {
        std::string problem;
        std::string algorithm;
        std::uint64_t seed;
    };
    std::vector<Job> jobs;
    for (const auto* p : kProblems) {
        for (const auto* a : kAlgorithms) {
            for (std::uint64_t s = 0; s < kSeeds; ++s) jobs.push_back({p, a, s});
        }
    }

    std::vector<MetricsRecord> finals(jobs.size());
    std::vector<InvariantLog> logs(jobs.size());
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (auto i = next++; i < jobs.size(); i = next++) {
            const auto& job = jobs[i];
            const auto cfg = desk_config(job.problem, job.algorithm);
            auto& log = logs[i];
            std::size_t coverage = 0;
            std::vector<double> scalar_best;
            const auto observer = [&](const Algorithm& algo, const MetricsRecord& row) {
                const auto where = fmt::format("{} {} seed {} gen {}", job.algorithm, job.problem, job.seed,
                                               row.generation);
                const auto& archive = algo.metrics_archive();
                ++log.checks;
                if (!archive.cells_consistent()) log.violations.push_back(where + ": descriptor/cell mismatch");
                if (archive.coverage() < coverage) log.violations.push_back(where + ": coverage decreased");
                coverage = archive.coverage();
                if (const auto* me = dynamic_cast<const MapElitesAlgorithm*>(&algo)) {
                    const auto& grid = me->grid();
                    if (!grid.cells_consistent()) log.violations.push_back(where + ": scalar cell mismatch");
                    scalar_best.resize(grid.num_cells(), -std::numeric_limits<double>::infinity());
                    for (std::size_t c = 0; c < grid.num_cells(); ++c) {
                        if (const auto f = grid.cell_fitness(c)) {
                            if (*f < scalar_best[c]) log.violations.push_back(where + ": scalar fitness decreased");
                            scalar_best[c] = *f;
                        }
                    }
                }
            };
            finals[i] = run_single(cfg, job.seed, registry, observer).back();
        }
    };
    unsigned threads = 1;
    if (const char* env = std::getenv("MOME_ACCEPTANCE_JOBS")) threads = std::max(1, std::atoi(env));
    {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    }

    DeskResults out;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        out.finals[jobs[i].problem][jobs[i].algorithm].push_back(finals[i]);
        out.invariants.checks += logs[i].checks;
        for (auto& v : logs[i].violations) out.invariants.violations.push_back(std::move(v));
    }
    return out;
}

auto column(const std::vector<MetricsRecord>& rows, const std::string& metric) -> std::vector<double>
{
    std::vector<double> v;
    for (const auto& r : rows) v.push_back(metric_value(r, metric));
    return v;
}

auto median(const std::vector<MetricsRecord>& rows, const std::string& metric) -> double
{
    return quantile(column(rows, metric), 0.5);
}

auto seed_list() -> std::vector<std::uint64_t>
{
    std::vector<std::uint64_t> s(kSeeds);
    for (std::uint64_t i = 0; i < kSeeds; ++i) s[i] = i;
    return s;
}

auto criterion1(const DeskResults& d) -> void
{
    bool pass = true;
    for (const auto* p : kProblems) {
        const auto& mome = d.finals.at(p).at("mome");
        for (const auto* a : {"map_elites", "nsga2", "spea2"}) {
            const auto& other = d.finals.at(p).at(a);
            const auto r = compare_samples(seed_list(), column(mome, "moqd_score"), column(other, "moqd_score"),
                                           "moqd_score");
            const bool ok = !r.degenerate && r.a.median > r.b.median && r.result.p_value < 0.05;
            pass = pass && ok;
            note(fmt::format("{:<15} mome vs {:<10} median {:.4e} vs {:.4e}  p={:.4g}  {}", p, a, r.a.median,
                             r.b.median, r.result.p_value, ok ? "ok" : "NOT MET"));
        }
    }
    report(1, pass, "MOME MOQD score higher median and Wilcoxon p < 0.05 vs MAP-Elites, NSGA-II, SPEA2 (desk scale)");
}

auto criterion2(const DeskResults& d) -> void
{
    const auto& f = d.finals.at("rastrigin_proj");
    const auto mome = median(f.at("mome"), "coverage_count");
    const auto nsga = median(f.at("nsga2"), "coverage_count");
    const auto spea = median(f.at("spea2"), "coverage_count");
    note(fmt::format("rastrigin_proj median coverage: mome {} nsga2 {} spea2 {}", mome, nsga, spea));
    report(2, mome > nsga && mome > spea, "MOME coverage exceeds NSGA-II and SPEA2 passive coverage on rastrigin_proj");
}

auto criterion3(const DeskResults& d) -> void
{
    bool pass = true;
    for (const auto* p : kProblems) {
        const auto& f = d.finals.at(p);
        const auto mome = median(f.at("mome"), "global_hypervolume");
        const auto best = std::max(median(f.at("nsga2"), "global_hypervolume"),
                                   median(f.at("spea2"), "global_hypervolume"));
        const auto gap = (best - mome) / best;
        const bool ok = mome >= 0.85 * best;
        pass = pass && ok;
        note(fmt::format("{:<15} global HV median mome {:.4e}, best baseline {:.4e}, gap {:.2f}%", p, mome, best,
                         100.0 * gap));
    }
    report(3, pass, "MOME global hypervolume within 15% of the best NSGA-II/SPEA2 median");
}

auto criterion6(const DeskResults& d) -> void
{
    const auto& inv = d.invariants;
    for (std::size_t i = 0; i < std::min<std::size_t>(inv.violations.size(), 10); ++i) note(inv.violations[i]);
    note(fmt::format("{} logged snapshots scanned over {} runs", inv.checks, 2 * 4 * kSeeds));
    report(6, inv.violations.empty() && inv.checks > 0,
           "archive descriptor/cell consistency, coverage monotone, scalar per-cell fitness monotone");
}

// ---------------------------------------------------------------------------

auto random_front(RandomStream& rng, std::size_t n) -> std::vector<FitnessVector>
{
    std::vector<double> xs(n);
    std::vector<double> ys(n);
    for (auto& x : xs) x = rng.uniform(0.0, 100.0);
    for (auto& y : ys) y = rng.uniform(0.0, 100.0);
    std::sort(xs.begin(), xs.end());
    std::sort(ys.begin(), ys.end(), std::greater<>());
    std::vector<FitnessVector> pts;
    for (std::size_t i = 0; i < n; ++i) pts.push_back({xs[i], ys[i]});
    return pts;
}

auto criterion4() -> void
{
    RandomStream rng(2024);
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
        const auto pts = random_front(rng, 1 + rng.index(50));
        const FitnessVector ref{-rng.uniform(0.0, 20.0), -rng.uniform(0.0, 20.0)};
        const auto exact = hypervolume(pts, ref);
        const auto mc = oracle::monte_carlo_hv(pts, ref, 1'000'000, rng);
        worst = std::max(worst, std::abs(mc - exact) / exact);
    }
    note(fmt::format("worst Monte-Carlo relative error over 100 fronts: {:.4f}%", 100.0 * worst));

    std::size_t mismatches = 0;
    std::size_t small = 0;
    const FitnessVector origin{0.0, 0.0};
    const std::vector<std::pair<std::vector<FitnessVector>, double>> hand{
        {{{2, 2}}, 4.0}, {{{1, 3}, {3, 1}}, 5.0}, {{}, 0.0}, {{{1, 3}, {2, 2}, {3, 1}}, 6.0}};
    for (const auto& [pts, value] : hand) {
        ++small;
        if (hypervolume(pts, origin) != value || oracle::inclusion_exclusion_hv(pts, origin) != value) ++mismatches;
    }
    for (int t = 0; t < 5000; ++t) {
        std::vector<FitnessVector> pts;
        const auto n = 1 + rng.index(3);
        for (std::size_t i = 0; i < n; ++i) {
            pts.push_back({std::floor(rng.uniform(-3, 12)), std::floor(rng.uniform(-3, 12))});
        }
        ++small;
        if (hypervolume(pts, origin) != oracle::inclusion_exclusion_hv(pts, origin)) ++mismatches;
    }
    note(fmt::format("inclusion-exclusion mismatches on {} fronts of <= 3 points: {}", small, mismatches));
    report(4, worst < 0.01 && mismatches == 0, "exact 2-D hypervolume vs Monte-Carlo (1%) and inclusion-exclusion");
}

auto criterion5() -> void
{
    RandomStream rng(55);
    std::size_t insert_failures = 0;
    for (int seq = 0; seq < 10'000; ++seq) {
        const auto cap = 1 + rng.index(10);
        const bool coarse = seq % 2 == 0;
        ParetoFront f(cap);
        for (SolutionId id = 0; id < 40; ++id) {
            const auto draw = [&] { return coarse ? std::floor(rng.uniform(0, 8)) : rng.uniform(0, 8); };
            (void)f.insert(oracle::make_solution(id, {draw(), draw()}), rng);
            const auto fit = f.fitnesses();
            if (f.size() > cap || oracle::non_dominated(fit).size() != fit.size()) ++insert_failures;
        }
    }
    note(fmt::format("front insertion violations over 10000 sequences: {}", insert_failures));

    std::size_t front_failures = 0;
    for (int t = 0; t < 1000; ++t) {
        std::vector<Solution> s;
        std::vector<FitnessVector> fit;
        for (SolutionId id = 0; id < 30; ++id) {
            const FitnessVector f{std::floor(rng.uniform(0, 10)), std::floor(rng.uniform(0, 10))};
            s.push_back(oracle::make_solution(id, f));
            fit.push_back(f);
        }
        std::vector<SolutionId> expected;
        for (const auto i : oracle::non_dominated(fit)) expected.push_back(s[i].id);
        std::vector<SolutionId> got;
        for (const auto& x : pareto_front_of(s)) got.push_back(x.id);
        std::sort(got.begin(), got.end());
        if (got != expected) ++front_failures;
    }
    note(fmt::format("pareto_front_of mismatches over 1000 sets of 30: {}", front_failures));

    std::size_t order_failures = 0;
    for (const auto rule : {DominanceRule::Strict, DominanceRule::Weak}) {
        for (int t = 0; t < 100'000; ++t) {
            const auto draw = [&] { return FitnessVector{std::floor(rng.uniform(0, 4)), std::floor(rng.uniform(0, 4))}; };
            const auto a = draw();
            const auto b = draw();
            const auto c = draw();
            if (dominates(a, a, rule)) ++order_failures;
            if (dominates(a, b, rule) && dominates(b, a, rule)) ++order_failures;
            if (dominates(a, b, rule) && dominates(b, c, rule) && !dominates(a, c, rule)) ++order_failures;
            if (rule == DominanceRule::Strict && dominates(a, b, rule) != oracle::strictly_better(a, b)) ++order_failures;
        }
    }
    note(fmt::format("dominance order violations over 200000 triples: {}", order_failures));
    report(5, insert_failures == 0 && front_failures == 0 && order_failures == 0,
           "front insertion, pareto_front_of and dominance order properties");
}

auto criterion7() -> void
{
    RandomStream rng(7);
    std::size_t sort_failures = 0;
    for (int t = 0; t < 200; ++t) {
        const auto n = 1 + rng.index(30);
        std::vector<FitnessVector> pts;
        for (std::size_t i = 0; i < n; ++i) pts.push_back({std::floor(rng.uniform(0, 8)), std::floor(rng.uniform(0, 8))});
        const auto fronts = non_dominated_sort(pts);
        std::vector<std::size_t> rank(n, n + 1);
        for (std::size_t r = 0; r < fronts.size(); ++r) {
            for (const auto i : fronts[r]) rank[i] = r;
        }
        if (rank != oracle::peel_ranks(pts)) ++sort_failures;
    }
    note(fmt::format("non-dominated sort mismatches over 200 populations: {}", sort_failures));

    // (1,1) is dominated by exactly two points; (0,5) and (4,4) by none.
    const std::vector<FitnessVector> a{{3, 3}, {4, 4}, {1, 1}, {0, 5}};
    const std::vector<FitnessVector> b{{5, 5}, {4, 4}, {3, 3}, {2, 6}};
    const bool counts_ok = domination_counts(a) == std::vector<std::size_t>{1, 0, 2, 0} &&
                           domination_counts(b) == std::vector<std::size_t>{0, 1, 2, 0};
    note(fmt::format("SPEA2 domination counts on constructed cases: {}", counts_ok ? "match" : "MISMATCH"));
    report(7, sort_failures == 0 && counts_ok, "NSGA-II sorting vs domination-counter oracle; SPEA2 counts");
}

auto slurp(const fs::path& p) -> std::string
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

auto criterion8(const fs::path& root) -> void
{
    std::size_t compared = 0;
    std::size_t differing = 0;
    for (const auto* p : kProblems) {
        for (const auto* a : kAlgorithms) {
            auto cfg = desk_config(p, a);
            cfg.total_evaluations = 30'000;
            cfg.seeds = {0, 1};
            cfg.output_dir = root / "det_serial";
            const auto first = run_experiment(cfg);
            cfg.output_dir = root / "det_parallel";
            cfg.threads = 4;
            cfg.jobs = 2;
            const auto second = run_experiment(cfg);
            for (std::size_t i = 0; i < first.seeds.size(); ++i) {
                ++compared;
                const auto x = slurp(first.seeds[i].metrics_csv);
                if (x.empty() || x != slurp(second.seeds[i].metrics_csv)) ++differing;
            }
        }
    }
    note(fmt::format("{} metrics CSV pairs compared (1 thread vs 4 threads, 2 jobs), {} differ", compared, differing));
    report(8, differing == 0, "byte-identical metrics CSVs across executions and parallelism levels");
}

auto criterion9(const fs::path& root) -> void
{
    auto cfg = desk_config("rastrigin_proj", "mome");
    cfg.output_dir = root / "front";
    std::size_t best = 0;
    std::uint64_t seed = 0;
    for (; seed < kSeeds && best < 2; ++seed) {
        cfg.seeds = {seed};
        const auto r = run_experiment(cfg);
        std::ifstream in(r.seeds[0].global_front);
        std::string line;
        std::set<std::string> cells;
        while (std::getline(in, line)) {
            if (line.empty() || line[0] == '#' || line.rfind("solution_id", 0) == 0) continue;
            const auto a = line.find(',');
            const auto b = line.find(',', a + 1);
            cells.insert(line.substr(a + 1, b - a - 1));
        }
        best = std::max(best, cells.size());
        note(fmt::format("seed {}: exported global front spans {} cells", seed, cells.size()));
    }
    report(9, best >= 2, "exported global Pareto front mixes solutions from >= 2 cells on rastrigin_proj");
}

} // namespace

auto main() -> int
{
    try {
        const auto root = fs::temp_directory_path() / "mome_acceptance";
        fs::remove_all(root);
        fs::create_directories(root);

        const auto start = std::chrono::steady_clock::now();
        fmt::print("desk-scale benchmark: 2 problems x 4 algorithms x {} seeds, M=32 P=10 B=256, 100000 evaluations\n",
                   kSeeds);
        std::fflush(stdout);
        const auto desk = run_desk();
        criterion1(desk);
        criterion2(desk);
        criterion3(desk);
        criterion4();
        criterion5();
        criterion6(desk);
        criterion7();
        criterion8(root);
        criterion9(root);
        fs::remove_all(root);

        const auto secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        fmt::print("{} of 9 criteria failed ({:.0f} s)\n", g_failures, secs);
        return g_failures == 0 ? 0 : 1;
    } catch (const std::exception& e) {
        fmt::print("acceptance suite aborted: {}\n", e.what());
        return 2;
    }
}
