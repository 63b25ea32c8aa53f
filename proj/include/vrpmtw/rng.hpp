#pragma once

// Portable seeded randomness.
//
// The engine is std::mt19937_64, whose output sequence is fixed by the
// standard. The standard distributions are not, so every draw used by the
// library goes through the helpers below. Independent concerns (coordinates,
// demands, windows, solver runs, episodes) get their own stream, derived from
// the user seed and a string tag through SplitMix64, so that adding a draw to
// one concern never shifts the values of another.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string_view>

namespace vrpmtw {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// FNV-1a over the tag bytes.
constexpr std::uint64_t tag_hash(std::string_view tag) noexcept {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (char c : tag) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001B3ULL;
    }
    return h;
}

/// Seed of the sub-stream `tag`/`index` of `seed`.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag, std::uint64_t index = 0) noexcept {
    return mix64(mix64(seed ^ tag_hash(tag)) + mix64(index + 0x632BE59BD9B4E019ULL));
}

class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}
    Rng(std::uint64_t seed, std::string_view tag, std::uint64_t index = 0)
        : engine_(derive_seed(seed, tag, index)) {}

    static constexpr result_type min() { return std::mt19937_64::min(); }
    static constexpr result_type max() { return std::mt19937_64::max(); }
    result_type operator()() { return engine_(); }

    /// Uniform in [0, 1), 53 bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n). Rejection sampling, no modulo bias.
    std::uint64_t below(std::uint64_t n) {
        if (n <= 1) return 0;
        const std::uint64_t limit = max() - max() % n;
        std::uint64_t v = engine_();
        while (v >= limit) v = engine_();
        return v % n;
    }

    bool coin() { return (engine_() >> 63) != 0; }

    /// Standard normal via Box-Muller (cosine branch only, so each call
    /// consumes exactly two engine outputs).
    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    /// Normal(mean, stddev) conditioned on [lo, hi], by rejection.
    double truncated_normal(double mean, double stddev, double lo, double hi) {
        for (;;) {
            const double v = normal(mean, stddev);
            if (v >= lo && v <= hi) return v;
        }
    }

    /// Index drawn with probability proportional to `weights[i]`.
    template <class Range>
    std::size_t categorical(const Range& weights) {
        double total = 0.0;
        for (double w : weights) total += w;
        double u = uniform() * total;
        std::size_t i = 0, last = 0;
        for (double w : weights) {
            if (w > 0.0) {
                last = i;
                if (u < w) return i;
                u -= w;
            }
            ++i;
        }
        return last;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace vrpmtw
