// mome: run, compare and export multi-objective quality-diversity experiments.

#include "mome/errors.hpp"
#include "mome/harness.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

constexpr int kConfigErrorExit = 2;
constexpr int kRuntimeErrorExit = 3;

// Long-standing shorthands for the most used keys.
const std::map<std::string, std::string> kAliases{
    {"problem", "run.problem"},
    {"algorithm", "run.algorithm"},
    {"seeds", "run.seeds"},
    {"evals", "run.total_evaluations"},
    {"out", "run.output_dir"},
    {"threads", "run.threads"},
    {"jobs", "run.jobs"},
};

auto expand_metric_files(const std::vector<std::string>& args) -> std::vector<fs::path>
{
    std::vector<fs::path> out;
    for (const auto& a : args) {
        if (fs::is_directory(a)) {
            std::vector<fs::path> found;
            for (const auto& e : fs::directory_iterator(a)) {
                if (e.path().filename().string().ends_with("_metrics.csv")) found.push_back(e.path());
            }
            std::sort(found.begin(), found.end());
            out.insert(out.end(), found.begin(), found.end());
        } else {
            out.emplace_back(a);
        }
    }
    return out;
}

auto to_fitness(const std::vector<double>& v) -> mome::FitnessVector
{
    mome::FitnessVector r(v.size());
    std::copy(v.begin(), v.end(), r.begin());
    return r;
}

auto parse_reference(const std::string& text) -> mome::FitnessVector
{
    std::vector<double> v;
    std::stringstream ss(text);
    std::string field;
    while (std::getline(ss, field, ',')) {
        try {
            v.push_back(std::stod(field));
        } catch (const std::exception&) {
            throw mome::ConfigError("bad reference component '" + field + "'");
        }
    }
    if (v.empty()) throw mome::ConfigError("empty reference point");
    return to_fitness(v);
}

struct SnapshotInput {
    nlohmann::json header;
    std::vector<mome::SnapshotRecord> records;
};

auto load_snapshot(const fs::path& path) -> SnapshotInput
{
    std::ifstream is(path);
    if (!is) throw mome::IoError("cannot read '" + path.string() + "'");
    SnapshotInput in;
    std::string first;
    std::getline(is, first);
    try {
        in.header = nlohmann::json::parse(first);
    } catch (const nlohmann::json::exception&) {
        throw mome::IoError("'" + path.string() + "' does not start with a header record");
    }
    is.clear();
    is.seekg(0);
    in.records = mome::read_snapshot(is);
    return in;
}

auto with_output(const std::string& path, const std::function<void(std::ostream&)>& body) -> void
{
    if (path.empty() || path == "-") {
        body(std::cout);
        return;
    }
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw mome::IoError("cannot write '" + path + "'");
    body(os);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Multi-objective MAP-Elites and baselines on a common benchmark harness"};
    app.require_subcommand(1);
    app.set_version_flag("--version", mome::build_id());

    // run ---------------------------------------------------------------
    auto* run = app.add_subcommand("run", "Execute an experiment over one or more seeds");
    std::string config_path;
    std::string preset;
    run->add_option("-c,--config", config_path, "INI config file ([section] key = value)")->check(CLI::ExistingFile);
    run->add_option("--preset", preset, "Base preset")->check(CLI::IsMember({"smoke", "desk", "paper"}));
    std::map<std::string, std::string> overrides;
    for (const auto& [key, entry] : mome::ConfigKeys::instance().entries()) {
        run->add_option_function<std::string>(
               "--" + key, [&overrides, k = key](const std::string& v) { overrides[k] = v; }, entry.help)
            ->group("Overrides");
    }
    for (const auto& [alias, key] : kAliases) {
        run->add_option_function<std::string>(
               "--" + alias, [&overrides, k = key](const std::string& v) { overrides[k] = v; }, "Same as --" + key)
            ->group("Shorthands");
    }
    bool print_config = false;
    run->add_flag("--print-config", print_config, "Print the resolved config as JSON and exit");

    // compare -----------------------------------------------------------
    auto* compare = app.add_subcommand("compare", "Paired Wilcoxon comparison of final-generation metrics");
    std::vector<std::string> group_a;
    std::vector<std::string> group_b;
    std::string metric = "moqd_score";
    std::string test_name = "signed-rank";
    std::string compare_out;
    compare->add_option("-a,--a", group_a, "Metrics CSVs (or directories) of method A")->required();
    compare->add_option("-b,--b", group_b, "Metrics CSVs (or directories) of method B")->required();
    compare->add_option("-m,--metric", metric, "Metric column")
        ->check(CLI::IsMember({"moqd_score", "coverage_count", "coverage_fraction", "global_hypervolume", "max_sum",
                               "total_solutions"}));
    compare->add_option("--test", test_name, "signed-rank (paired) or rank-sum")
        ->check(CLI::IsMember({"signed-rank", "rank-sum"}));
    compare->add_option("-o,--out", compare_out, "Report path (stdout if omitted)");

    // export-grid -------------------------------------------------------
    auto* grid = app.add_subcommand("export-grid", "Per-cell hypervolume table of an archive snapshot");
    std::string snapshot_path;
    std::string centroids_path;
    std::string reference_text;
    std::string grid_out;
    grid->add_option("-s,--snapshot", snapshot_path, "Archive snapshot (.jsonl)")->required()->check(CLI::ExistingFile);
    grid->add_option("--centroids", centroids_path, "Centroids CSV of the same run")
        ->required()
        ->check(CLI::ExistingFile);
    grid->add_option("-r,--reference", reference_text, "Reference point, comma separated (default: from snapshot)");
    grid->add_option("-o,--out", grid_out, "Output CSV (stdout if omitted)");

    // export-front ------------------------------------------------------
    auto* front = app.add_subcommand("export-front", "Global Pareto front of an archive snapshot");
    std::string front_snapshot;
    std::string front_out;
    std::string front_rule = "strict";
    front->add_option("-s,--snapshot", front_snapshot, "Archive snapshot (.jsonl)")
        ->required()
        ->check(CLI::ExistingFile);
    front->add_option("--dominance", front_rule, "strict or weak")->check(CLI::IsMember({"strict", "weak"}));
    front->add_option("-o,--out", front_out, "Output CSV (stdout if omitted)");

    // calibrate-ref -----------------------------------------------------
    auto* calib = app.add_subcommand("calibrate-ref", "Reference point from random search minima");
    std::string calib_problem = "rastrigin_proj";
    std::size_t calib_samples = 1'000'000;
    std::uint64_t calib_seed = 0;
    double round_to = 100.0;
    std::optional<std::size_t> calib_dim;
    unsigned calib_threads = 1;
    std::string calib_out;
    calib->add_option("-p,--problem", calib_problem, "Registered problem");
    calib->add_option("-n,--samples", calib_samples, "Random genotypes to evaluate")->check(CLI::PositiveNumber);
    calib->add_option("--seed", calib_seed, "Master seed");
    calib->add_option("--round-to", round_to, "Round minima down to a multiple of this")->check(CLI::PositiveNumber);
    calib->add_option("--search-dim", calib_dim, "Override the problem's search dimension");
    calib->add_option("--threads", calib_threads, "Evaluation threads")->check(CLI::PositiveNumber);
    calib->add_option("-o,--out", calib_out, "Output JSON (stdout if omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const auto code = app.exit(e);
        return code == 0 ? 0 : kConfigErrorExit;
    }

    const auto registry = mome::ProblemRegistry::with_builtins();
    try {
        if (*run) {
            mome::RunConfig cfg;
            if (!preset.empty()) mome::apply_preset(cfg, preset);
            const auto& keys = mome::ConfigKeys::instance();
            if (!config_path.empty()) {
                const auto file = mome::read_config_file(config_path);
                // A preset named in the file is a base layer under the rest of the file.
                if (const auto it = file.find("run.preset"); it != file.end() && preset.empty()) {
                    mome::apply_preset(cfg, it->second);
                }
                for (const auto& [k, v] : file) {
                    if (k != "run.preset") keys.apply(cfg, k, v);
                }
            }
            for (const auto& [k, v] : overrides) keys.apply(cfg, k, v);
            cfg.validate();
            if (print_config) {
                std::cout << mome::config_to_json(cfg) << '\n';
                return 0;
            }
            const auto result = mome::run_experiment(cfg, registry);
            for (const auto& s : result.seeds) {
                const auto& f = s.final_metrics;
                fmt::print("seed {:>4}  gen {:>6}  evals {:>9}  moqd {:.6g}  coverage {}  global_hv {:.6g}  -> {}\n",
                           s.seed, f.generation, f.evaluations, f.moqd_score, f.coverage_count, f.global_hypervolume,
                           s.metrics_csv.string());
            }
            fmt::print("config_hash {}\n", result.config_hash);
        } else if (*compare) {
            const auto test = test_name == "rank-sum" ? mome::PairedTest::RankSum : mome::PairedTest::SignedRank;
            const auto report =
                mome::compare_runs(expand_metric_files(group_a), expand_metric_files(group_b), metric, test);
            with_output(compare_out, [&](std::ostream& os) { os << report.to_json() << '\n'; });
        } else if (*grid) {
            const auto snap = load_snapshot(snapshot_path);
            mome::FitnessVector reference;
            if (!reference_text.empty()) {
                reference = parse_reference(reference_text);
            } else if (snap.header.contains("reference")) {
                reference = to_fitness(snap.header["reference"].get<std::vector<double>>());
            } else {
                throw mome::ConfigError("snapshot has no reference point; pass --reference");
            }
            std::vector<mome::Bounds> bounds;
            if (snap.header.contains("problem")) {
                const auto name = snap.header["problem"].get<std::string>();
                if (registry.contains(name)) bounds = registry.make(name).descriptor_bounds;
            }
            const auto tess = mome::read_centroids_csv(centroids_path, bounds);
            with_output(grid_out, [&](std::ostream& os) { mome::export_grid(os, snap.records, tess, reference); });
        } else if (*front) {
            const auto snap = load_snapshot(front_snapshot);
            const auto rule = front_rule == "weak" ? mome::DominanceRule::Weak : mome::DominanceRule::Strict;
            with_output(front_out, [&](std::ostream& os) { mome::export_front(os, snap.records, rule); });
        } else if (*calib) {
            if (!registry.contains(calib_problem)) throw mome::ConfigError("unknown problem '" + calib_problem + "'");
            mome::ProblemOptions opts;
            opts.search_dim = calib_dim;
            const auto problem = registry.make(calib_problem, opts);
            const auto c = mome::calibrate_reference(problem, calib_samples, calib_seed, round_to, calib_threads);
            with_output(calib_out, [&](std::ostream& os) { os << mome::calibration_to_json(problem, c) << '\n'; });
        }
    } catch (const mome::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigErrorExit;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kRuntimeErrorExit;
    }
    return 0;
}
