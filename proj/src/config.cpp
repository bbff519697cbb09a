#include "mome/errors.hpp"
#include "mome/harness.hpp"
#include "mome/random.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include <charconv>
#include <set>
#include <sstream>

namespace mome {

namespace {

auto trim(const std::string& s) -> std::string
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

auto split(const std::string& s, char sep) -> std::vector<std::string>
{
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(trim(item));
    return out;
}

auto parse_u64(const std::string& key, const std::string& text) -> std::uint64_t
{
    std::uint64_t v = 0;
    const auto t = trim(text);
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size()) {
        throw ConfigError(key + ": expected a non-negative integer, got '" + text + "'");
    }
    return v;
}

auto parse_real(const std::string& key, const std::string& text) -> double
{
    const auto t = trim(text);
    try {
        std::size_t used = 0;
        const auto v = std::stod(t, &used);
        if (used != t.size()) throw std::invalid_argument(t);
        return v;
    } catch (const std::exception&) {
        throw ConfigError(key + ": expected a number, got '" + text + "'");
    }
}

auto parse_bool(const std::string& key, const std::string& text) -> bool
{
    const auto t = trim(text);
    if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
    if (t == "false" || t == "0" || t == "no" || t == "off") return false;
    throw ConfigError(key + ": expected a boolean, got '" + text + "'");
}

/// "0,1,2", "0-9" or a mix such as "0-4,10".
auto parse_seeds(const std::string& key, const std::string& text) -> std::vector<std::uint64_t>
{
    std::vector<std::uint64_t> seeds;
    for (const auto& part : split(text, ',')) {
        if (part.empty()) continue;
        const auto dash = part.find('-');
        if (dash == std::string::npos) {
            seeds.push_back(parse_u64(key, part));
            continue;
        }
        const auto lo = parse_u64(key, part.substr(0, dash));
        const auto hi = parse_u64(key, part.substr(dash + 1));
        if (hi < lo) throw ConfigError(key + ": empty seed range '" + part + "'");
        for (auto s = lo; s <= hi; ++s) seeds.push_back(s);
    }
    if (seeds.empty()) throw ConfigError(key + ": no seeds given");
    return seeds;
}

auto join_seeds(const std::vector<std::uint64_t>& seeds) -> std::string
{
    return fmt::format("{}", fmt::join(seeds, ","));
}

} // namespace

auto RunConfig::validate() const -> void
{
    if (algo.num_cells == 0) throw ConfigError("archive.cells must be positive");
    if (algo.front_capacity == 0) throw ConfigError("archive.front_capacity must be positive");
    if (algo.batch_size == 0) throw ConfigError("algorithm.batch_size must be positive");
    if (total_evaluations < algo.batch_size) throw ConfigError("run.total_evaluations must be at least the batch size");
    if (total_evaluations < algo.initial_population()) {
        throw ConfigError("run.total_evaluations must cover the initial population");
    }
    if (seeds.empty()) throw ConfigError("run.seeds is empty");
    if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size()) {
        throw ConfigError("run.seeds contains duplicates");
    }
    if (log_interval == 0) throw ConfigError("run.log_interval must be positive");
    if (algo.cvt.num_init_samples < algo.num_cells) {
        throw ConfigError("tessellation.num_init_samples must be at least archive.cells");
    }
    try {
        algo.variation.validate();
    } catch (const InvalidArgument& e) {
        throw ConfigError(std::string("variation: ") + e.what());
    }
    (void)parse_algorithm(algorithm);
}

auto apply_preset(RunConfig& cfg, const std::string& name) -> void
{
    if (name == "smoke") {
        cfg.problem = "rastrigin_proj";
        cfg.algorithm = "mome";
        cfg.algo.num_cells = 32;
        cfg.algo.front_capacity = 10;
        cfg.algo.batch_size = 256;
        cfg.total_evaluations = 20'000;
        cfg.seeds = {0, 1, 2};
    } else if (name == "desk") {
        cfg.algo.num_cells = 32;
        cfg.algo.front_capacity = 10;
        cfg.algo.batch_size = 256;
        cfg.total_evaluations = 100'000;
        cfg.seeds = parse_seeds("preset", "0-9");
    } else if (name == "paper") {
        cfg.algo.num_cells = 128;
        cfg.algo.front_capacity = 50;
        // Initial population = batch = M * P, so the baselines start full.
        cfg.algo.batch_size = 6400;
        cfg.total_evaluations = 1'000'000;
        cfg.seeds = parse_seeds("preset", "0-49");
    } else {
        throw ConfigError("unknown preset '" + name + "' (expected smoke, desk or paper)");
    }
}

ConfigKeys::ConfigKeys()
{
    const auto u64 = [](std::uint64_t v) { return fmt::format("{}", v); };
    const auto real = [](double v) { return fmt::format("{}", v); };
    const auto boolean = [](bool v) { return std::string(v ? "true" : "false"); };

    auto add = [this](std::string key, std::string help, Setter set, Getter get) {
        entries_.emplace(std::move(key), Entry{std::move(help), std::move(set), std::move(get)});
    };

    add("run.problem", "problem name", [](RunConfig& c, const std::string& v) { c.problem = trim(v); },
        [](const RunConfig& c) { return c.problem; });
    add("run.algorithm", "mome | map_elites | nsga2 | spea2",
        [](RunConfig& c, const std::string& v) { c.algorithm = trim(v); },
        [](const RunConfig& c) { return c.algorithm; });
    add("run.search_dim", "search dimension override, or auto",
        [](RunConfig& c, const std::string& v) {
            if (trim(v) == "auto") {
                c.search_dim.reset();
            } else {
                c.search_dim = parse_u64("run.search_dim", v);
            }
        },
        [u64](const RunConfig& c) { return c.search_dim ? u64(*c.search_dim) : std::string("auto"); });
    add("run.total_evaluations", "evaluation budget",
        [](RunConfig& c, const std::string& v) { c.total_evaluations = parse_u64("run.total_evaluations", v); },
        [u64](const RunConfig& c) { return u64(c.total_evaluations); });
    add("run.seeds", "seed list, e.g. 0-9 or 1,5,7",
        [](RunConfig& c, const std::string& v) { c.seeds = parse_seeds("run.seeds", v); },
        [](const RunConfig& c) { return join_seeds(c.seeds); });
    add("run.log_interval", "generations between metric rows",
        [](RunConfig& c, const std::string& v) { c.log_interval = parse_u64("run.log_interval", v); },
        [u64](const RunConfig& c) { return u64(c.log_interval); });
    add("run.output_dir", "output directory",
        [](RunConfig& c, const std::string& v) { c.output_dir = trim(v); },
        [](const RunConfig& c) { return c.output_dir.string(); });
    add("run.threads", "evaluation threads per run",
        [](RunConfig& c, const std::string& v) {
            c.threads = static_cast<unsigned>(parse_u64("run.threads", v));
        },
        [u64](const RunConfig& c) { return u64(c.threads); });
    add("run.jobs", "seeds run concurrently",
        [](RunConfig& c, const std::string& v) { c.jobs = static_cast<unsigned>(parse_u64("run.jobs", v)); },
        [u64](const RunConfig& c) { return u64(c.jobs); });
    add("run.record_wall_time", "write real wall time into metrics rows (breaks byte-identity)",
        [](RunConfig& c, const std::string& v) { c.record_wall_time = parse_bool("run.record_wall_time", v); },
        [boolean](const RunConfig& c) { return boolean(c.record_wall_time); });
    add("run.include_genotype", "store genotypes in archive snapshots",
        [](RunConfig& c, const std::string& v) { c.include_genotype = parse_bool("run.include_genotype", v); },
        [boolean](const RunConfig& c) { return boolean(c.include_genotype); });

    add("archive.cells", "CVT cells M",
        [](RunConfig& c, const std::string& v) { c.algo.num_cells = parse_u64("archive.cells", v); },
        [u64](const RunConfig& c) { return u64(c.algo.num_cells); });
    add("archive.front_capacity", "maximum front size P",
        [](RunConfig& c, const std::string& v) {
            c.algo.front_capacity = parse_u64("archive.front_capacity", v);
        },
        [u64](const RunConfig& c) { return u64(c.algo.front_capacity); });
    add("archive.dominance", "strict | weak",
        [](RunConfig& c, const std::string& v) {
            const auto t = trim(v);
            if (t == "strict") {
                c.algo.front_policy.dominance = DominanceRule::Strict;
            } else if (t == "weak") {
                c.algo.front_policy.dominance = DominanceRule::Weak;
            } else {
                throw ConfigError("archive.dominance: expected strict or weak, got '" + v + "'");
            }
        },
        [](const RunConfig& c) { return std::string(to_string(c.algo.front_policy.dominance)); });
    add("archive.duplicates", "drop | keep exact duplicates",
        [](RunConfig& c, const std::string& v) {
            const auto t = trim(v);
            if (t == "drop") {
                c.algo.front_policy.duplicates = DuplicatePolicy::Drop;
            } else if (t == "keep") {
                c.algo.front_policy.duplicates = DuplicatePolicy::Keep;
            } else {
                throw ConfigError("archive.duplicates: expected drop or keep, got '" + v + "'");
            }
        },
        [](const RunConfig& c) { return std::string(to_string(c.algo.front_policy.duplicates)); });

    add("algorithm.batch_size", "offspring per generation B",
        [](RunConfig& c, const std::string& v) { c.algo.batch_size = parse_u64("algorithm.batch_size", v); },
        [u64](const RunConfig& c) { return u64(c.algo.batch_size); });
    add("algorithm.init_pop", "initial population, or auto (= batch size)",
        [](RunConfig& c, const std::string& v) {
            if (trim(v) == "auto") {
                c.algo.init_pop.reset();
            } else {
                c.algo.init_pop = parse_u64("algorithm.init_pop", v);
            }
        },
        [u64](const RunConfig& c) { return c.algo.init_pop ? u64(*c.algo.init_pop) : std::string("auto"); });
    add("algorithm.spea2_simple_count", "SPEA2 raw fitness = dominator count",
        [](RunConfig& c, const std::string& v) {
            c.algo.spea2_simple_count = parse_bool("algorithm.spea2_simple_count", v);
        },
        [boolean](const RunConfig& c) { return boolean(c.algo.spea2_simple_count); });

    add("variation.p_mut", "fraction of offspring from mutation",
        [](RunConfig& c, const std::string& v) { c.algo.variation.p_mut = parse_real("variation.p_mut", v); },
        [real](const RunConfig& c) { return real(c.algo.variation.p_mut); });
    add("variation.eta", "polynomial mutation index",
        [](RunConfig& c, const std::string& v) { c.algo.variation.eta = parse_real("variation.eta", v); },
        [real](const RunConfig& c) { return real(c.algo.variation.eta); });
    add("variation.per_gene_mut_prob", "per-gene mutation probability, or auto (= 1/n)",
        [](RunConfig& c, const std::string& v) {
            if (trim(v) == "auto") {
                c.algo.variation.per_gene_mut_prob.reset();
            } else {
                c.algo.variation.per_gene_mut_prob = parse_real("variation.per_gene_mut_prob", v);
            }
        },
        [real](const RunConfig& c) {
            return c.algo.variation.per_gene_mut_prob ? real(*c.algo.variation.per_gene_mut_prob)
                                                      : std::string("auto");
        });
    add("variation.iso_sigma", "Iso+LineDD isotropic sigma",
        [](RunConfig& c, const std::string& v) {
            c.algo.variation.iso_sigma = parse_real("variation.iso_sigma", v);
        },
        [real](const RunConfig& c) { return real(c.algo.variation.iso_sigma); });
    add("variation.line_sigma", "Iso+LineDD line sigma",
        [](RunConfig& c, const std::string& v) {
            c.algo.variation.line_sigma = parse_real("variation.line_sigma", v);
        },
        [real](const RunConfig& c) { return real(c.algo.variation.line_sigma); });
    add("variation.sbx_eta", "SBX distribution index",
        [](RunConfig& c, const std::string& v) { c.algo.variation.sbx_eta = parse_real("variation.sbx_eta", v); },
        [real](const RunConfig& c) { return real(c.algo.variation.sbx_eta); });
    add("variation.mutation", "polynomial | none",
        [](RunConfig& c, const std::string& v) {
            const auto t = trim(v);
            if (t == "polynomial") {
                c.algo.variation.mutation = MutationKind::Polynomial;
            } else if (t == "none") {
                c.algo.variation.mutation = MutationKind::None;
            } else {
                throw ConfigError("variation.mutation: expected polynomial or none, got '" + v + "'");
            }
        },
        [](const RunConfig& c) { return std::string(to_string(c.algo.variation.mutation)); });
    add("variation.crossover", "blend | sbx | iso_line_dd",
        [](RunConfig& c, const std::string& v) {
            const auto t = trim(v);
            if (t == "blend") {
                c.algo.variation.crossover = CrossoverKind::Blend;
            } else if (t == "sbx") {
                c.algo.variation.crossover = CrossoverKind::Sbx;
            } else if (t == "iso_line_dd") {
                c.algo.variation.crossover = CrossoverKind::IsoLineDD;
            } else {
                throw ConfigError("variation.crossover: expected blend, sbx or iso_line_dd, got '" + v + "'");
            }
        },
        [](const RunConfig& c) { return std::string(to_string(c.algo.variation.crossover)); });

    add("tessellation.num_init_samples", "k-means sample count",
        [](RunConfig& c, const std::string& v) {
            c.algo.cvt.num_init_samples = parse_u64("tessellation.num_init_samples", v);
        },
        [u64](const RunConfig& c) { return u64(c.algo.cvt.num_init_samples); });
    add("tessellation.kmeans_iters", "Lloyd iterations",
        [](RunConfig& c, const std::string& v) {
            c.algo.cvt.kmeans_iters = parse_u64("tessellation.kmeans_iters", v);
        },
        [u64](const RunConfig& c) { return u64(c.algo.cvt.kmeans_iters); });

    add("metrics.reference", "hypervolume reference 'r1,r2', or auto (problem default)",
        [](RunConfig& c, const std::string& v) {
            if (trim(v) == "auto") {
                c.reference.reset();
                return;
            }
            std::vector<double> r;
            for (const auto& part : split(v, ',')) r.push_back(parse_real("metrics.reference", part));
            c.reference = FitnessVector(std::move(r));
        },
        [](const RunConfig& c) {
            return c.reference ? fmt::format("{}", fmt::join(c.reference->values(), ",")) : std::string("auto");
        });
}

auto ConfigKeys::instance() -> const ConfigKeys&
{
    static const ConfigKeys keys;
    return keys;
}

auto ConfigKeys::apply(RunConfig& cfg, const std::string& key, const std::string& value) const -> void
{
    const auto it = entries_.find(key);
    if (it == entries_.end()) throw ConfigError("unknown config key '" + key + "'");
    it->second.set(cfg, value);
}

auto read_config_file(const std::filesystem::path& path) -> std::map<std::string, std::string>
{
    boost::property_tree::ptree tree;
    try {
        boost::property_tree::ini_parser::read_ini(path.string(), tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError("cannot read config '" + path.string() + "': " + e.what());
    }
    std::map<std::string, std::string> flat;
    for (const auto& [section, body] : tree) {
        if (body.empty()) {
            flat[section] = body.data();
            continue;
        }
        for (const auto& [key, value] : body) flat[section + "." + key] = value.data();
    }
    return flat;
}

auto config_to_json(const RunConfig& cfg) -> std::string
{
    nlohmann::json j;
    for (const auto& [key, entry] : ConfigKeys::instance().entries()) j[key] = entry.get(cfg);
    return j.dump();
}

auto config_hash(const RunConfig& cfg) -> std::string
{
    static const std::set<std::string> excluded{"run.seeds", "run.output_dir", "run.threads", "run.jobs"};
    nlohmann::json j;
    for (const auto& [key, entry] : ConfigKeys::instance().entries()) {
        if (!excluded.contains(key)) j[key] = entry.get(cfg);
    }
    return fmt::format("{:016x}", fnv1a64(j.dump()));
}

} // namespace mome
