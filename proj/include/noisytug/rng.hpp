// Counter-seeded random number streams for reproducible Monte Carlo.
//
// Every play of a game draws from its own Rng obtained via Rng::stream(seed,
// stream_id), so results do not depend on thread count or scheduling.  The
// generator is xoshiro256++ seeded through splitmix64; both are fixed
// algorithms, so identical (seed, stream_id) pairs give bit-identical draws
// on any platform with IEEE doubles.
#pragma once

#include <cmath>
#include <cstdint>

#include "noisytug/vec.hpp"

namespace noisytug {

struct SplitMix64 {
    std::uint64_t state;

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
};

class Rng {
  public:
    Rng() : Rng(0x853C49E6748FEA9BULL) {}

    explicit Rng(std::uint64_t seed) {
        SplitMix64 sm{seed};
        for (auto& w : s_) w = sm.next();
    }

    /// Independent stream derived from (seed, stream_id); the per-play
    /// splitting scheme used throughout the estimators.
    static Rng stream(std::uint64_t seed, std::uint64_t stream_id) {
        SplitMix64 sm{seed ^ (0x9E6C63D0876A9A35ULL * (stream_id + 1))};
        Rng r;
        for (auto& w : r.s_) w = sm.next();
        return r;
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform in [0,1) with 53 random bits.
    double u01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * u01(); }

    /// Fair coin; true ~ heads.
    bool coin() { return (next_u64() >> 63) != 0; }

    /// Standard normal (Box-Muller, cosine branch; one draw per call so the
    /// stream consumption is a fixed two u64 words).
    double normal() {
        double u1 = u01();
        if (u1 < 0x1.0p-53) u1 = 0x1.0p-53;
        const double u2 = u01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
    }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::uint64_t s_[4];
};

/// Uniform direction on the unit sphere.  d=2 uses a single angle draw; higher
/// dimensions normalize a Gaussian vector.
template <int D>
Vec<D> sample_unit_vector(Rng& rng) {
    if constexpr (D == 2) {
        const double a = rng.uniform(0.0, 6.283185307179586476925287);
        return Vec<2>(std::cos(a), std::sin(a));
    } else {
        while (true) {
            Vec<D> g;
            for (int i = 0; i < D; ++i) g[i] = rng.normal();
            const double n = g.norm();
            if (n > 1e-12) return g / n;
        }
    }
}

}  // namespace noisytug
