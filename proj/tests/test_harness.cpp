#include "mome/errors.hpp"
#include "mome/harness.hpp"

#include <doctest.h>
#include <json.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <numeric>
#include <sstream>

using namespace mome;
namespace fs = std::filesystem;

namespace {

auto scratch(const std::string& name) -> fs::path
{
    const auto p = fs::temp_directory_path() / ("mome_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

auto tiny(const fs::path& out) -> RunConfig
{
    RunConfig cfg;
    cfg.problem = "rastrigin_proj";
    cfg.search_dim = 10;
    cfg.algo.num_cells = 8;
    cfg.algo.front_capacity = 4;
    cfg.algo.batch_size = 16;
    cfg.algo.cvt = CvtOptions{2000, 20};
    cfg.total_evaluations = 400;
    cfg.log_interval = 5;
    cfg.seeds = {0, 1, 2, 3, 4, 5};
    cfg.output_dir = out;
    return cfg;
}

auto slurp(const fs::path& p) -> std::string
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

auto write_file(const fs::path& p, const std::string& text) -> void
{
    std::ofstream(p) << text;
}

auto metrics_files(const ExperimentResult& r) -> std::vector<fs::path>
{
    std::vector<fs::path> out;
    for (const auto& s : r.seeds) out.push_back(s.metrics_csv);
    return out;
}

auto cli(const std::string& args) -> int
{
    const auto status = std::system((std::string(MOME_CLI_PATH) + " " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

} // namespace

TEST_CASE("presets and config keys")
{
    RunConfig cfg;
    apply_preset(cfg, "desk");
    CHECK(cfg.algo.num_cells == 32);
    CHECK(cfg.algo.front_capacity == 10);
    CHECK(cfg.total_evaluations == 100'000);
    CHECK(cfg.seeds.size() == 10);
    apply_preset(cfg, "paper");
    CHECK(cfg.algo.num_cells == 128);
    CHECK(cfg.algo.front_capacity == 50);
    CHECK(cfg.total_evaluations == 1'000'000);
    CHECK(cfg.seeds.size() == 50);
    CHECK_THROWS_AS(apply_preset(cfg, "huge"), ConfigError);

    const auto& keys = ConfigKeys::instance();
    keys.apply(cfg, "archive.cells", "64");
    keys.apply(cfg, "run.seeds", "3,7,9");
    keys.apply(cfg, "metrics.reference", "-10,-20");
    keys.apply(cfg, "variation.crossover", "iso_line_dd");
    CHECK(cfg.algo.num_cells == 64);
    CHECK(cfg.seeds == std::vector<std::uint64_t>{3, 7, 9});
    CHECK(cfg.reference == FitnessVector{-10, -20});
    CHECK(cfg.algo.variation.crossover == CrossoverKind::IsoLineDD);
    CHECK(keys.entries().at("archive.cells").get(cfg) == "64");
    CHECK_THROWS_AS(keys.apply(cfg, "archive.cellz", "1"), ConfigError);
    CHECK_THROWS_AS(keys.apply(cfg, "archive.cells", "many"), ConfigError);
    CHECK_THROWS_AS(keys.apply(cfg, "archive.dominance", "sometimes"), ConfigError);
}

TEST_CASE("config file")
{
    const auto dir = scratch("ini");
    write_file(dir / "run.ini", "[run]\nalgorithm = nsga2\nseeds = 0-2\n\n[archive]\ncells = 16\n");
    const auto kv = read_config_file(dir / "run.ini");
    CHECK(kv.at("run.algorithm") == "nsga2");
    CHECK(kv.at("archive.cells") == "16");

    // File over preset, explicit override over file.
    RunConfig cfg;
    apply_preset(cfg, "desk");
    for (const auto& [k, v] : kv) ConfigKeys::instance().apply(cfg, k, v);
    ConfigKeys::instance().apply(cfg, "archive.cells", "24");
    CHECK(cfg.algorithm == "nsga2");
    CHECK(cfg.seeds == std::vector<std::uint64_t>{0, 1, 2});
    CHECK(cfg.algo.num_cells == 24);
    CHECK(cfg.algo.front_capacity == 10);

    CHECK_THROWS_AS((void)read_config_file(dir / "missing.ini"), ConfigError);
}

TEST_CASE("config validation and hashing")
{
    RunConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    const auto h = config_hash(cfg);
    CHECK(h.size() == 16);
    CHECK(config_hash(cfg) == h);

    auto knobs = cfg;
    knobs.seeds = {4, 5};
    knobs.output_dir = "elsewhere";
    knobs.threads = 8;
    knobs.jobs = 3;
    CHECK(config_hash(knobs) == h);

    auto changed = cfg;
    changed.algo.front_capacity = 49;
    CHECK(config_hash(changed) != h);

    auto bad = cfg;
    bad.algo.num_cells = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = cfg;
    bad.seeds.clear();
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = cfg;
    bad.algorithm = "cmaes";
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("reference point")
{
    const auto p = ProblemRegistry::with_builtins().make("rastrigin_multi");
    RunConfig cfg;
    CHECK(set_reference_point(p, cfg) == p.hypervolume_reference);
    cfg.reference = FitnessVector{-1, -1};
    CHECK(set_reference_point(p, cfg) == FitnessVector{-1, -1});
    cfg.reference = FitnessVector{-1, -1, -1};
    CHECK_THROWS_AS((void)set_reference_point(p, cfg), ConfigError);
}

TEST_CASE("run_single logs rows on the interval and at the end")
{
    auto cfg = tiny(scratch("single"));
    const auto rows = run_single(cfg, 0, ProblemRegistry::with_builtins());
    // 16 initial + 24 generations of 16 = 400 evaluations.
    REQUIRE(rows.size() == 6);
    CHECK(rows.front().generation == 0);
    CHECK(rows.front().evaluations == 16);
    CHECK(rows[1].generation == 5);
    CHECK(rows.back().generation == 24);
    CHECK(rows.back().evaluations == 400);
    for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].coverage_count >= rows[i - 1].coverage_count);

    std::size_t calls = 0;
    (void)run_single(cfg, 0, ProblemRegistry::with_builtins(), [&](const Algorithm& a, const MetricsRecord& r) {
        CHECK(a.evaluations() == r.evaluations);
        ++calls;
    });
    CHECK(calls == rows.size());
}

TEST_CASE("experiment outputs")
{
    const auto dir = scratch("experiment");
    auto cfg = tiny(dir / "a");
    const auto first = run_experiment(cfg);
    REQUIRE(first.seeds.size() == 6);
    for (const auto& s : first.seeds) {
        CHECK(fs::exists(s.metrics_csv));
        CHECK(fs::exists(s.snapshot));
        CHECK(fs::exists(s.global_front));
        CHECK(fs::exists(s.centroids));
        CHECK(fs::exists(s.metadata));
    }
    CHECK(first.seeds[2].metrics_csv.filename() == "mome_rastrigin_proj_seed2_metrics.csv");

    SUBCASE("metrics csv carries provenance and parses back")
    {
        const auto text = slurp(first.seeds[0].metrics_csv);
        CHECK(text.rfind("# config_hash=" + first.config_hash + " seed=0", 0) == 0);
        const auto m = read_metrics_csv(first.seeds[0].metrics_csv);
        CHECK(m.seed == 0);
        CHECK(m.config_hash == first.config_hash);
        REQUIRE_FALSE(m.rows.empty());
        CHECK(m.rows.back().moqd_score == first.seeds[0].final_metrics.moqd_score);
    }
    SUBCASE("rerun and parallel jobs are byte identical")
    {
        auto again = cfg;
        again.output_dir = dir / "b";
        again.jobs = 3;
        again.threads = 2;
        const auto second = run_experiment(again);
        for (std::size_t i = 0; i < first.seeds.size(); ++i) {
            CHECK(slurp(first.seeds[i].metrics_csv) == slurp(second.seeds[i].metrics_csv));
            CHECK(slurp(first.seeds[i].snapshot) == slurp(second.seeds[i].snapshot));
            CHECK(slurp(first.seeds[i].global_front) == slurp(second.seeds[i].global_front));
        }
    }
    SUBCASE("grid export agrees with the logged score")
    {
        const auto& s = first.seeds[1];
        std::ifstream snap(s.snapshot);
        const auto records = read_snapshot(snap);
        const auto problem = ProblemRegistry::with_builtins().make("rastrigin_proj", ProblemOptions{10});
        const auto tess = read_centroids_csv(s.centroids, problem.descriptor_bounds);
        CHECK(tess.num_cells() == 8);
        std::ostringstream grid;
        export_grid(grid, records, tess, set_reference_point(problem, cfg));
        std::istringstream lines(grid.str());
        std::string line;
        std::getline(lines, line);
        CHECK(line == "cell_index,c0,c1,hypervolume,front_size");
        double total = 0.0;
        std::size_t rows = 0;
        while (std::getline(lines, line)) {
            ++rows;
            std::vector<std::string> cols;
            std::stringstream ls(line);
            for (std::string c; std::getline(ls, c, ',');) cols.push_back(c);
            REQUIRE(cols.size() == 5);
            total += std::stod(cols[3]);
        }
        CHECK(rows == 8);
        CHECK(total == doctest::Approx(s.final_metrics.moqd_score));

        std::ostringstream front;
        export_front(front, records);
        const auto front_text = front.str();
        CHECK(front_text.rfind("solution_id,cell_index,f0,f1,d0,d1\n", 0) == 0);
        const auto front_rows = std::count(front_text.begin(), front_text.end(), '\n') - 1;
        CHECK(front_rows >= 1);
        CHECK(static_cast<std::size_t>(front_rows) <= records.size());
    }
    SUBCASE("comparisons")
    {
        const auto files = metrics_files(first);
        const auto same = compare_runs(files, files, "moqd_score");
        CHECK(same.degenerate);
        CHECK(same.result.p_value == 1.0);
        CHECK(same.seeds.size() == 6);

        auto other = cfg;
        other.algorithm = "map_elites";
        other.output_dir = dir / "c";
        const auto me = run_experiment(other);
        const auto r = compare_runs(files, metrics_files(me), "coverage_count");
        CHECK(r.metric == "coverage_count");
        CHECK(r.a.values.size() == 6);
        CHECK(r.result.p_value > 0.0);
        CHECK(r.result.p_value <= 1.0);
        const auto j = nlohmann::json::parse(r.to_json());
        CHECK(j.at("metric") == "coverage_count");

        auto fewer = files;
        fewer.pop_back();
        CHECK_THROWS_AS((void)compare_runs(fewer, metrics_files(me), "moqd_score"), InvalidArgument);
        CHECK_THROWS_AS((void)compare_runs(fewer, fewer, "moqd_score"), InvalidArgument);
        CHECK_THROWS((void)compare_runs(files, files, "no_such_metric"));
    }
}

TEST_CASE("experiment errors")
{
    const auto dir = scratch("errors");
    auto cfg = tiny(dir / "out");
    cfg.problem = "zdt1";
    CHECK_THROWS_AS((void)run_experiment(cfg), ConfigError);
    CHECK_FALSE(fs::exists(dir / "out"));

    cfg = tiny(dir / "out");
    cfg.algorithm = "moead";
    CHECK_THROWS_AS((void)run_experiment(cfg), ConfigError);

    write_file(dir / "blocker", "not a directory");
    cfg = tiny(dir / "blocker" / "sub");
    CHECK_THROWS_AS((void)run_experiment(cfg), IoError);
}

TEST_CASE("reference calibration")
{
    const auto p = ProblemRegistry::with_builtins().make("rastrigin_multi", ProblemOptions{10});
    const auto c = calibrate_reference(p, 20000, 0);
    CHECK(c.samples == 20000);
    for (std::size_t j = 0; j < 2; ++j) {
        CHECK(c.reference[j] <= c.minimum[j]);
        CHECK(std::fmod(c.reference[j], 100.0) == 0.0);
        CHECK(c.minimum[j] - c.reference[j] < 100.0);
    }
    const auto threaded = calibrate_reference(p, 20000, 0, 100.0, 3);
    CHECK(threaded.minimum == c.minimum);
    CHECK(nlohmann::json::parse(calibration_to_json(p, c)).at("samples") == 20000);
}

TEST_CASE("command line exit codes")
{
    const auto dir = scratch("cli");
    CHECK(cli("run --preset enormous") == 2);
    CHECK(cli("run --archive.cells lots") == 2);
    CHECK(cli("run --no-such-flag") == 2);
    CHECK(cli("compare -a " + (dir / "nothing").string() + " -b " + (dir / "nothing").string()) != 0);
    write_file(dir / "tiny.ini",
               "[run]\nsearch_dim = 10\ntotal_evaluations = 200\nseeds = 0\noutput_dir = " + (dir / "out").string() +
                   "\n[archive]\ncells = 4\nfront_capacity = 2\n[algorithm]\nbatch_size = 16\n"
                   "[tessellation]\nnum_init_samples = 500\nkmeans_iters = 5\n");
    CHECK(cli("run -c " + (dir / "tiny.ini").string()) == 0);
    CHECK(fs::exists(dir / "out" / "mome_rastrigin_proj_seed0_metrics.csv"));
}
