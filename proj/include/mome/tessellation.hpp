#pragma once

#include "mome/core.hpp"
#include "mome/random.hpp"

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

namespace mome {

struct CvtOptions {
    std::size_t num_init_samples = 50000;
    std::size_t kmeans_iters = 100;
};

/// Centroidal Voronoi tessellation of a box-bounded descriptor space.
/// Immutable after construction.
class CvtTessellation {
public:
    CvtTessellation(std::vector<std::vector<double>> centroids, std::vector<Bounds> bounds);

    [[nodiscard]] auto num_cells() const noexcept -> std::size_t { return centroids_.size(); }
    [[nodiscard]] auto dim() const noexcept -> std::size_t { return bounds_.size(); }
    [[nodiscard]] auto centroids() const noexcept -> const std::vector<std::vector<double>>& { return centroids_; }
    [[nodiscard]] auto centroid(std::size_t i) const -> std::span<const double> { return centroids_[i]; }
    [[nodiscard]] auto bounds() const noexcept -> const std::vector<Bounds>& { return bounds_; }

    /// Nearest centroid by Euclidean distance; lowest index on ties.
    [[nodiscard]] auto cell_index(std::span<const double> descriptor) const -> std::size_t;
    [[nodiscard]] auto cell_index(const DescriptorVector& d) const -> std::size_t { return cell_index(d.span()); }

    /// One row per centroid, `cell_index,c0,c1,...` with a header.
    auto write_csv(std::ostream& os) const -> void;

private:
    std::vector<std::vector<double>> centroids_;
    std::vector<Bounds> bounds_;
};

/// Lloyd's k-means over `options.num_init_samples` uniform samples in
/// `bounds`, seeded with k-means++. Deterministic in (num_cells, bounds, rng
/// state, options).
[[nodiscard]] auto build_cvt(std::size_t num_cells, std::span<const Bounds> bounds, RandomStream& rng,
                             const CvtOptions& options = {}) -> CvtTessellation;

} // namespace mome
