#pragma once

// Reproducible random streams: xoshiro256** seeded through splitmix64 from a
// (seed, stream) pair, with samplers built only from uniforms and the
// library's own special functions so draws do not depend on the standard
// library's distribution implementations.

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "bayescal/special_fn.hpp"

namespace bayescal {

/// Bumped whenever any draw sequence below changes.
inline constexpr const char* kRngVersion = "xoshiro256ss/splitmix64/v1";

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

class Xoshiro256 {
public:
    Xoshiro256(std::uint64_t seed, std::uint64_t stream) {
        std::uint64_t sm = seed;
        const std::uint64_t mix = splitmix64(sm) ^ (stream * 0xD1B54A32D192ED03ULL);
        std::uint64_t st = mix;
        for (auto& x : s_) x = splitmix64(st);
    }

    std::uint64_t next() noexcept {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform on the open interval (0,1).
    double uniform() noexcept { return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53; }

    double normal() { return phi_inv(uniform()); }

    double normal(double mean, double sd) { return mean + sd * normal(); }

    /// Gamma(shape, 1) by Marsaglia-Tsang; shapes below one use the U^(1/a) boost.
    double gamma(double shape) {
        if (shape < 1.0) {
            const double g = gamma(shape + 1.0);
            return g * std::pow(uniform(), 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x;
            double v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform();
            if (u < 1.0 - 0.0331 * (x * x) * (x * x)) return d * v;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    double beta(double a, double b) {
        const double x = gamma(a);
        const double y = gamma(b);
        return x / (x + y);
    }

    /// Binomial(n, p) by inversion, walking outward from the mode.
    int binomial(int n, double p) {
        if (n <= 0 || p <= 0.0) return 0;
        if (p >= 1.0) return n;
        const double q = 1.0 - p;
        const int mode = std::min(n, static_cast<int>(std::floor((n + 1) * p)));
        const double pm = binomial_pmf(mode, n, p);
        double u = uniform() - pm;
        if (u <= 0.0) return mode;
        int lo = mode;
        int hi = mode;
        double p_lo = pm;
        double p_hi = pm;
        const double up = p / q;
        const double down = q / p;
        while (lo > 0 || hi < n) {
            if (lo > 0) {
                p_lo *= lo / (n - lo + 1.0) * down;
                --lo;
                u -= p_lo;
                if (u <= 0.0) return lo;
            }
            if (hi < n) {
                p_hi *= (n - hi) / (hi + 1.0) * up;
                ++hi;
                u -= p_hi;
                if (u <= 0.0) return hi;
            }
        }
        return mode;  // only reachable through rounding in the cumulative sum
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }

    std::uint64_t s_[4]{};
};

}  // namespace bayescal
