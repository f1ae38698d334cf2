#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace pcrlab {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Deterministic RNG stream keyed by (seed, substream ids...).  Replications,
// chains and ladder points each get an independent stream, so results do not
// depend on scheduling order or worker count.  All sampling goes through the
// explicit uniform/normal helpers below; platform-defined std distributions
// are avoided so identical seeds give identical output everywhere.
class RngStream {
public:
    explicit RngStream(std::initializer_list<std::uint64_t> keys) {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (std::uint64_t k : keys) {
            h ^= k;
            h = splitmix64(h);
        }
        std::seed_seq seq{static_cast<std::uint32_t>(h),
                          static_cast<std::uint32_t>(h >> 32),
                          static_cast<std::uint32_t>(splitmix64(h)),
                          static_cast<std::uint32_t>(splitmix64(h) >> 32)};
        gen_.seed(seq);
    }

    std::uint64_t bits() { return gen_(); }

    // Uniform on [0, 1).
    double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    // Uniform on (0, 1] (never zero: safe for logs).
    double uniform01_open() {
        return (static_cast<double>(gen_() >> 11) + 1.0) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Standard normal by Box-Muller (cosine branch only, fully deterministic).
    double normal() {
        const double u1 = uniform01_open();
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * 3.14159265358979323846 * u2);
    }

    double normal(double mean, double sd) { return mean + sd * normal(); }

    double exponential() { return -std::log(uniform01_open()); }

    // Gamma(shape, 1) by Marsaglia-Tsang; integer shapes could use sums of
    // exponentials but a single code path keeps streams easier to reason about.
    double gamma(double shape) {
        if (shape < 1.0) {
            const double u = uniform01_open();
            return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x = normal();
            double v = 1.0 + c * x;
            if (v <= 0.0) continue;
            v = v * v * v;
            const double u = uniform01_open();
            if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) {
                return d * v;
            }
        }
    }

private:
    std::mt19937_64 gen_;
};

// Fold a key tuple into one 64-bit value (the same fold the stream
// constructor applies).  Replication records carry such a derived seed, so a
// single output row pins down every stream that produced it.
inline std::uint64_t mix_keys(std::initializer_list<std::uint64_t> keys) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::uint64_t k : keys) {
        h ^= k;
        h = splitmix64(h);
    }
    return h;
}

} // namespace pcrlab
