#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "pcps/matrix.hpp"

namespace pcps {

// Single project-wide random source. Everything that consumes randomness is
// seeded through this wrapper, so a fixed seed reproduces the same stream bit
// for bit across runs of the same binary. Gaussian and integer draws are
// implemented by hand (rather than via <random> distributions) to keep the
// byte-level output independent of the standard library version.
class Rng {
public:
    explicit Rng(uint64_t seed) : gen_(seed) {}

    uint64_t next_u64() { return gen_(); }

    // uniform in [0, 1), 53 bits
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // standard normal, Box-Muller with one cached value
    double gaussian() {
        if (has_cache_) {
            has_cache_ = false;
            return cache_;
        }
        double u1 = 0.0;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double t = 2.0 * M_PI * u2;
        cache_ = r * std::sin(t);
        has_cache_ = true;
        return r * std::cos(t);
    }

    // uniform integer in [0, n), rejection sampled (no modulo bias)
    uint64_t below(uint64_t n) {
        const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        uint64_t x = next_u64();
        while (x >= limit) x = next_u64();
        return x % n;
    }

    double sign() { return (next_u64() & 1u) ? 1.0 : -1.0; }

private:
    std::mt19937_64 gen_;
    double cache_ = 0.0;
    bool has_cache_ = false;
};

// splitmix64 finalizer; used to derive independent per-purpose seeds from one
// master seed without correlated streams.
inline uint64_t derive_seed(uint64_t master, uint64_t stream) {
    uint64_t z = master + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline Matrix gaussian_matrix(Index n, Index d, Rng& rng) {
    Matrix m(n, d);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < d; ++j) m(i, j) = rng.gaussian();
    return m;
}

}  // namespace pcps
