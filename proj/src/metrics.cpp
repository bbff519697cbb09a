#include "mome/metrics.hpp"

#include "mome/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace mome {

auto moqd_score(const MoqdArchive& archive, const FitnessVector& reference) -> double
{
    double total = 0.0;
    for (const auto& front : archive.fronts()) {
        if (!front.empty()) total += hypervolume(front, reference);
    }
    return total;
}

auto global_pareto_front(const MoqdArchive& archive, DominanceRule rule) -> std::vector<Solution>
{
    const auto all = archive.all_solutions();
    return pareto_front_of(all, rule);
}

auto global_hypervolume(const MoqdArchive& archive, const FitnessVector& reference, DominanceRule rule) -> double
{
    // Hypervolume ignores dominated points, but filtering first keeps the
    // value identical to the exported front.
    const auto front = global_pareto_front(archive, rule);
    std::vector<FitnessVector> f;
    f.reserve(front.size());
    for (const auto& s : front) f.push_back(s.fitness);
    return hypervolume(f, reference);
}

auto max_sum(std::span<const Solution> solutions) -> double
{
    auto best = -std::numeric_limits<double>::infinity();
    for (const auto& s : solutions) best = std::max(best, s.fitness_sum());
    return best;
}

auto max_sum(const MoqdArchive& archive) -> double
{
    auto best = -std::numeric_limits<double>::infinity();
    for (const auto& f : archive.fronts()) best = std::max(best, max_sum(f.members()));
    return best;
}

auto max_sum(const ScalarArchive& archive) -> double
{
    auto best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < archive.num_cells(); ++i) {
        if (const auto v = archive.cell_fitness(i)) best = std::max(best, *v);
    }
    return best;
}

auto compute_metrics(const MoqdArchive& archive, const FitnessVector& reference, std::uint64_t generation,
                     std::uint64_t evaluations, double max_sum_value, DominanceRule rule) -> MetricsRecord
{
    MetricsRecord r;
    r.generation = generation;
    r.evaluations = evaluations;
    r.moqd_score = moqd_score(archive, reference);
    r.coverage_count = archive.coverage();
    r.coverage_fraction = static_cast<double>(r.coverage_count) / static_cast<double>(archive.num_cells());
    r.global_hypervolume = global_hypervolume(archive, reference, rule);
    r.max_sum = max_sum_value;
    r.total_solutions = archive.total_solutions();
    return r;
}

auto to_csv_row(const MetricsRecord& r) -> std::string
{
    return fmt::format("{},{},{},{},{},{},{},{},{}", r.generation, r.evaluations, r.moqd_score, r.coverage_count,
                       r.coverage_fraction, r.global_hypervolume, r.max_sum, r.total_solutions, r.wall_time_s);
}

namespace {

template <typename T>
auto parse_field(std::string_view text) -> T
{
    T value{};
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc{} || ptr != end) throw IoError("bad metrics field '" + std::string(text) + "'");
    return value;
}

auto parse_double(std::string_view text) -> double
{
    // from_chars does not accept "inf".
    if (text == "inf") return std::numeric_limits<double>::infinity();
    if (text == "-inf") return -std::numeric_limits<double>::infinity();
    return parse_field<double>(text);
}

} // namespace

auto parse_csv_row(std::string_view line) -> MetricsRecord
{
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        fields.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    if (fields.size() != 9) throw IoError("metrics row has " + std::to_string(fields.size()) + " fields, expected 9");
    MetricsRecord r;
    r.generation = parse_field<std::uint64_t>(fields[0]);
    r.evaluations = parse_field<std::uint64_t>(fields[1]);
    r.moqd_score = parse_double(fields[2]);
    r.coverage_count = parse_field<std::size_t>(fields[3]);
    r.coverage_fraction = parse_double(fields[4]);
    r.global_hypervolume = parse_double(fields[5]);
    r.max_sum = parse_double(fields[6]);
    r.total_solutions = parse_field<std::size_t>(fields[7]);
    r.wall_time_s = parse_double(fields[8]);
    return r;
}

// ---------------------------------------------------------------------------

namespace {

/// Midranks (1-based) of `values`; also returns sum of (t^3 - t) over tie groups.
auto midranks(const std::vector<double>& values, double& tie_term) -> std::vector<double>
{
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto i, auto j) { return values[i] < values[j]; });
    std::vector<double> ranks(values.size());
    tie_term = 0.0;
    for (std::size_t i = 0; i < order.size();) {
        auto j = i;
        while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
        const auto rank = 0.5 * static_cast<double>(i + j) + 1.0;
        for (auto k = i; k <= j; ++k) ranks[order[k]] = rank;
        const auto t = static_cast<double>(j - i + 1);
        tie_term += t * t * t - t;
        i = j + 1;
    }
    return ranks;
}

auto normal_two_sided(double z) -> double
{
    return std::min(1.0, std::erfc(std::abs(z) / std::sqrt(2.0)));
}

} // namespace

auto wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b) -> TestResult
{
    if (a.size() != b.size()) throw InvalidArgument("signed-rank test needs paired samples of equal length");
    if (a.size() < 6) throw InvalidArgument("signed-rank test needs at least 6 pairs");

    std::vector<double> abs_diff;
    std::vector<bool> positive;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const auto d = a[i] - b[i];
        if (d == 0.0) continue;
        abs_diff.push_back(std::abs(d));
        positive.push_back(d > 0.0);
    }
    if (abs_diff.empty()) throw DegenerateSample("every paired difference is zero");

    double tie_term = 0.0;
    const auto ranks = midranks(abs_diff, tie_term);
    const auto n = ranks.size();
    double w_plus = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (positive[i]) w_plus += ranks[i];
    }
    const auto total = static_cast<double>(n * (n + 1)) / 2.0;
    const auto w_min = std::min(w_plus, total - w_plus);

    TestResult result;
    result.statistic = w_min;
    result.n = n;

    if (n <= 25) {
        // Distribution of doubled W+ over all 2^n sign assignments.
        std::vector<std::size_t> doubled(n);
        std::size_t max_sum = 0;
        for (std::size_t i = 0; i < n; ++i) {
            doubled[i] = static_cast<std::size_t>(std::lround(2.0 * ranks[i]));
            max_sum += doubled[i];
        }
        std::vector<double> count(max_sum + 1, 0.0);
        count[0] = 1.0;
        std::size_t reach = 0;
        for (const auto r : doubled) {
            reach += r;
            for (auto s = reach; s >= r; --s) {
                count[s] += count[s - r];
                if (s == r) break;
            }
        }
        const auto threshold = static_cast<std::size_t>(std::lround(2.0 * w_min));
        double tail = 0.0;
        for (std::size_t s = 0; s <= threshold; ++s) tail += count[s];
        result.p_value = std::min(1.0, 2.0 * tail / std::ldexp(1.0, static_cast<int>(n)));
        result.exact = true;
    } else {
        const auto nd = static_cast<double>(n);
        const auto mean = nd * (nd + 1.0) / 4.0;
        const auto var = nd * (nd + 1.0) * (2.0 * nd + 1.0) / 24.0 - tie_term / 48.0;
        const auto z = std::max(0.0, std::abs(w_plus - mean) - 0.5) / std::sqrt(var);
        result.p_value = normal_two_sided(z);
    }
    return result;
}

auto wilcoxon_rank_sum(std::span<const double> a, std::span<const double> b) -> TestResult
{
    if (a.empty() || b.empty()) throw InvalidArgument("rank-sum test needs two non-empty samples");
    std::vector<double> pooled(a.begin(), a.end());
    pooled.insert(pooled.end(), b.begin(), b.end());
    double tie_term = 0.0;
    const auto ranks = midranks(pooled, tie_term);

    const auto n1 = a.size();
    const auto n2 = b.size();
    const auto n = n1 + n2;
    double rank_sum_a = 0.0;
    for (std::size_t i = 0; i < n1; ++i) rank_sum_a += ranks[i];
    const auto u = rank_sum_a - static_cast<double>(n1 * (n1 + 1)) / 2.0;
    const auto mean = static_cast<double>(n1 * n2) / 2.0;

    TestResult result;
    result.statistic = u;
    result.n = n;

    if (tie_term == 0.0 && n1 <= 25 && n2 <= 25) {
        // count[k][s]: subsets of size k from ranks 1..m with rank sum s.
        const auto max_s = n * (n + 1) / 2;
        std::vector<std::vector<double>> count(n1 + 1, std::vector<double>(max_s + 1, 0.0));
        count[0][0] = 1.0;
        for (std::size_t r = 1; r <= n; ++r) {
            for (auto k = std::min(r, n1); k >= 1; --k) {
                for (auto s = max_s; s >= r; --s) count[k][s] += count[k - 1][s - r];
            }
        }
        const auto offset = n1 * (n1 + 1) / 2;
        const auto u_lo = std::min(u, 2.0 * mean - u);
        double tail = 0.0;
        double total = 0.0;
        for (std::size_t s = offset; s <= max_s; ++s) {
            total += count[n1][s];
            if (static_cast<double>(s - offset) <= u_lo + 1e-9) tail += count[n1][s];
        }
        result.p_value = std::min(1.0, 2.0 * tail / total);
        result.exact = true;
    } else {
        const auto nd = static_cast<double>(n);
        const auto var = static_cast<double>(n1 * n2) / 12.0 * ((nd + 1.0) - tie_term / (nd * (nd - 1.0)));
        if (var <= 0.0) throw DegenerateSample("rank-sum test: every value is tied");
        const auto z = std::max(0.0, std::abs(u - mean) - 0.5) / std::sqrt(var);
        result.p_value = normal_two_sided(z);
    }
    return result;
}

auto quantile(std::vector<double> values, double q) -> double
{
    if (values.empty()) throw InvalidArgument("quantile of an empty sample");
    std::sort(values.begin(), values.end());
    const auto pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    const auto frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

} // namespace mome
