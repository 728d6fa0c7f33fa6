#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace cmdp {

/// Deterministic RNG wrapper. All sampling helpers are implemented by hand on
/// top of the raw 64-bit stream so that generated tables are bit-identical
/// across platforms and standard-library versions (std::*_distribution is
/// implementation-defined).
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
        : engine_(mix(seed, stream)) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0, 1), 53 random bits.
    double next_double() { return double(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n). n must be >= 1.
    std::uint64_t next_uint(std::uint64_t n) {
        // rejection sampling, unbiased
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

    /// Index sampled from an (unnormalized is not allowed) probability vector
    /// by inverse CDF. Falls back to the last index on accumulated rounding.
    int sample_categorical(std::span<const double> probs) {
        double u = next_double();
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
            acc += probs[i];
            if (u < acc) return int(i);
        }
        return int(probs.size()) - 1;
    }

    /// Uniform point on the probability simplex of dimension n
    /// (Dirichlet(1,...,1) via normalized exponential spacings).
    std::vector<double> sample_simplex(int n) {
        std::vector<double> x(n);
        double total = 0.0;
        for (int i = 0; i < n; ++i) {
            double u = next_double();
            // -log of a (0,1] uniform; 1-u avoids log(0)
            x[i] = -std::log(1.0 - u);
            total += x[i];
        }
        for (int i = 0; i < n; ++i) x[i] /= total;
        return x;
    }

private:
    // splitmix64 over (seed, stream) so sub-streams are decorrelated even for
    // adjacent seeds
    static std::uint64_t mix(std::uint64_t seed, std::uint64_t stream) {
        std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::mt19937_64 engine_;
};

} // namespace cmdp
