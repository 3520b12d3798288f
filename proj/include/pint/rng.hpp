#pragma once

// Platform-stable random streams.
//
// The engine is std::mt19937_64, whose output sequence is fixed by the C++
// standard. The standard distributions are not, so every variate used by the
// library is derived here from raw 64-bit draws:
//
//   uniform01   top 53 bits scaled by 2^-53, in [0, 1)
//   normal      Box-Muller cosine branch, two uniforms per variate, no caching
//   index(n)    Lemire-style multiply with rejection, unbiased on [0, n)
//
// Independent streams are obtained with derive_seed(master, stream), which
// pushes (master, stream) through SplitMix64.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string_view>

namespace pint {

using Seed = std::uint64_t;

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Seed for the `stream`-th independent child of `master`.
constexpr Seed derive_seed(Seed master, std::uint64_t stream) noexcept {
    return splitmix64(splitmix64(master) ^ splitmix64(stream + 0x632BE59BD9B4E019ULL));
}

/// FNV-1a, used to turn stage names into stream ids.
constexpr std::uint64_t fnv1a(std::string_view s) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

constexpr Seed derive_seed(Seed master, std::string_view stage) noexcept {
    return derive_seed(master, fnv1a(stage));
}

class Rng {
public:
    explicit Rng(Seed seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    double normal() {
        const double u1 = 1.0 - uniform01();  // (0, 1]
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    double normal(double mean, double sd) { return mean + sd * normal(); }

    /// Uniform integer on [0, n). n must be positive.
    std::uint64_t index(std::uint64_t n) {
        __uint128_t m = static_cast<__uint128_t>(engine_()) * n;
        auto low = static_cast<std::uint64_t>(m);
        if (low < n) {
            const std::uint64_t threshold = (0 - n) % n;
            while (low < threshold) {
                m = static_cast<__uint128_t>(engine_()) * n;
                low = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    /// Fisher-Yates, back to front.
    template <typename Range>
    void shuffle(Range& r) {
        using std::swap;
        const auto n = static_cast<std::uint64_t>(std::size(r));
        for (std::uint64_t i = n; i > 1; --i) {
            const auto j = index(i);
            swap(r[i - 1], r[j]);
        }
    }

    /// Poisson variate by Knuth's product method; adequate for means below ~50.
    std::uint64_t poisson(double mean) {
        const double limit = std::exp(-mean);
        std::uint64_t k = 0;
        double p = 1.0 - uniform01();
        while (p > limit) {
            ++k;
            p *= 1.0 - uniform01();
        }
        return k;
    }

    /// Gamma variate with integer shape, as a sum of exponentials.
    double gamma_int(unsigned shape, double scale) {
        double s = 0.0;
        for (unsigned i = 0; i < shape; ++i) s -= std::log(1.0 - uniform01());
        return s * scale;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace pint
