#include "mome/tessellation.hpp"

#include "mome/errors.hpp"

#include <algorithm>
#include <limits>
#include <ostream>
#include <string>

namespace mome {

namespace {

auto squared_distance(std::span<const double> a, std::span<const double> b) -> double
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const auto d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

auto nearest(const std::vector<std::vector<double>>& centers, std::span<const double> p) -> std::size_t
{
    std::size_t best = 0;
    auto best_d = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < centers.size(); ++j) {
        const auto d = squared_distance(centers[j], p);
        if (d < best_d) {
            best_d = d;
            best = j;
        }
    }
    return best;
}

} // namespace

CvtTessellation::CvtTessellation(std::vector<std::vector<double>> centroids, std::vector<Bounds> bounds)
    : centroids_(std::move(centroids)), bounds_(std::move(bounds))
{
    if (centroids_.empty()) throw InvalidArgument("tessellation needs at least one centroid");
    for (const auto& c : centroids_) {
        if (c.size() != bounds_.size()) throw InvalidArgument("centroid dimension differs from bounds dimension");
    }
}

auto CvtTessellation::cell_index(std::span<const double> descriptor) const -> std::size_t
{
    if (descriptor.size() != dim()) {
        throw InvalidArgument("descriptor has length " + std::to_string(descriptor.size()) + ", expected " +
                              std::to_string(dim()));
    }
    return nearest(centroids_, descriptor);
}

auto CvtTessellation::write_csv(std::ostream& os) const -> void
{
    os << "cell_index";
    for (std::size_t k = 0; k < dim(); ++k) os << ",c" << k;
    os << '\n';
    const auto old = os.precision(17);
    for (std::size_t i = 0; i < centroids_.size(); ++i) {
        os << i;
        for (const auto v : centroids_[i]) os << ',' << v;
        os << '\n';
    }
    os.precision(old);
}

auto build_cvt(std::size_t num_cells, std::span<const Bounds> bounds, RandomStream& rng, const CvtOptions& options)
    -> CvtTessellation
{
    if (num_cells == 0) throw InvalidArgument("build_cvt: number of cells must be positive");
    if (num_cells > options.num_init_samples) {
        throw InvalidArgument("build_cvt: " + std::to_string(num_cells) + " cells exceed " +
                              std::to_string(options.num_init_samples) + " samples");
    }
    const auto dim = bounds.size();
    std::vector<std::vector<double>> samples(options.num_init_samples, std::vector<double>(dim));
    for (auto& s : samples) {
        for (std::size_t k = 0; k < dim; ++k) s[k] = rng.uniform(bounds[k].min, bounds[k].max);
    }

    // k-means++ seeding.
    std::vector<std::vector<double>> centers;
    centers.reserve(num_cells);
    centers.push_back(samples[rng.index(samples.size())]);
    std::vector<double> d2(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) d2[i] = squared_distance(samples[i], centers[0]);
    while (centers.size() < num_cells) {
        double total = 0.0;
        for (const auto v : d2) total += v;
        std::size_t pick = samples.size() - 1;
        if (total > 0.0) {
            auto target = rng.uniform() * total;
            for (std::size_t i = 0; i < samples.size(); ++i) {
                target -= d2[i];
                if (target < 0.0 && d2[i] > 0.0) {
                    pick = i;
                    break;
                }
            }
        }
        centers.push_back(samples[pick]);
        for (std::size_t i = 0; i < samples.size(); ++i) {
            d2[i] = std::min(d2[i], squared_distance(samples[i], centers.back()));
        }
    }

    // Lloyd iterations; stop early once assignments are stable.
    std::vector<std::size_t> assignment(samples.size(), num_cells);
    std::vector<std::vector<double>> sums(num_cells, std::vector<double>(dim));
    std::vector<std::size_t> counts(num_cells);
    for (std::size_t it = 0; it < options.kmeans_iters; ++it) {
        bool changed = false;
        for (std::size_t i = 0; i < samples.size(); ++i) {
            const auto j = nearest(centers, samples[i]);
            if (j != assignment[i]) {
                assignment[i] = j;
                changed = true;
            }
        }
        if (!changed) break;
        for (auto& s : sums) std::fill(s.begin(), s.end(), 0.0);
        std::fill(counts.begin(), counts.end(), 0);
        for (std::size_t i = 0; i < samples.size(); ++i) {
            auto& s = sums[assignment[i]];
            for (std::size_t k = 0; k < dim; ++k) s[k] += samples[i][k];
            ++counts[assignment[i]];
        }
        for (std::size_t j = 0; j < num_cells; ++j) {
            // An empty cluster keeps its previous centre.
            if (counts[j] == 0) continue;
            for (std::size_t k = 0; k < dim; ++k) centers[j][k] = sums[j][k] / static_cast<double>(counts[j]);
        }
    }

    return CvtTessellation(std::move(centers), {bounds.begin(), bounds.end()});
}

} // namespace mome
