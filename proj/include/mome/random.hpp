#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>

namespace mome {

/// SplitMix64 finalizer; used to derive independent seeds.
[[nodiscard]] constexpr auto mix64(std::uint64_t x) noexcept -> std::uint64_t
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30U)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27U)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31U);
}

/// FNV-1a, 64 bit.
[[nodiscard]] constexpr auto fnv1a64(std::string_view text) noexcept -> std::uint64_t
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const char c : text) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Seeded random stream. Streams are split by name or index rather than by
/// sharing one engine, so the draw sequence seen by any consumer depends only
/// on (master seed, stream path) and never on scheduling.
class RandomStream {
public:
    using engine_type = std::mt19937_64;

    explicit RandomStream(std::uint64_t seed) : seed_(seed), engine_(mix64(seed)) {}

    /// Named substream of a master seed ("init", "selection", "variation", ...).
    [[nodiscard]] static auto named(std::uint64_t master_seed, std::string_view name) -> RandomStream
    {
        return RandomStream(mix64(master_seed ^ fnv1a64(name)));
    }

    /// Child stream indexed by position; independent of how many draws this
    /// stream has already made.
    [[nodiscard]] auto substream(std::uint64_t index) const -> RandomStream
    {
        return RandomStream(mix64(seed_ + 0x632be59bd9b4e019ULL * (index + 1)));
    }

    /// Fresh child keyed by the next draw of this stream; advances this stream.
    [[nodiscard]] auto split() -> RandomStream { return RandomStream(mix64(engine_())); }

    [[nodiscard]] auto seed() const noexcept -> std::uint64_t { return seed_; }

    /// Uniform in [0, 1) with 53 random bits.
    auto uniform() -> double { return static_cast<double>(engine_() >> 11U) * 0x1.0p-53; }

    auto uniform(double lo, double hi) -> double { return lo + (hi - lo) * uniform(); }

    /// Uniform index in [0, n). n must be positive.
    auto index(std::size_t n) -> std::size_t
    {
        std::uniform_int_distribution<std::size_t> dist(0, n - 1);
        return dist(engine_);
    }

    auto normal() -> double { return normal_(engine_); }

    auto engine() -> engine_type& { return engine_; }

private:
    std::uint64_t seed_;
    engine_type engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

} // namespace mome
