#pragma once

#include <cstdint>
#include <cmath>
#include <random>

#include "fewb/common.hpp"

namespace fewb {

/// Deterministic random stream. Wraps mt19937_64 but derives all variates
/// from raw 64-bit draws so sequences are identical across standard
/// libraries (std::normal_distribution et al. are implementation-defined).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1) with 53-bit resolution.
    real uniform() {
        return static_cast<real>((engine_() >> 11) * (1.0 / 9007199254740992.0));
    }

    /// Uniform in [lo, hi).
    real uniform(real lo, real hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n). n must be positive.
    std::uint64_t uniform_int(std::uint64_t n) {
        // Lemire's multiply-shift with rejection for exactness.
        std::uint64_t x = engine_();
        __uint128_t m = static_cast<__uint128_t>(x) * n;
        auto lo = static_cast<std::uint64_t>(m);
        if (lo < n) {
            std::uint64_t threshold = (-n) % n;
            while (lo < threshold) {
                x = engine_();
                m = static_cast<__uint128_t>(x) * n;
                lo = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    /// Standard normal via Box-Muller (one spare cached).
    real gaussian() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        real u1 = uniform();
        real u2 = uniform();
        while (u1 <= 0) u1 = uniform();
        real r = std::sqrt(real(-2) * std::log(u1));
        real theta = real(2) * real(M_PI) * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    /// Derive an independent child stream (splitmix64 of the next draw).
    Rng split() {
        std::uint64_t z = engine_() + 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return Rng(z ^ (z >> 31));
    }

private:
    std::mt19937_64 engine_;
    real spare_ = 0;
    bool has_spare_ = false;
};

}  // namespace fewb
