#pragma once

#include <cstdint>
#include <cmath>
#include <random>
#include <stdexcept>

namespace driftless {

/// Seeded random stream. All distributions are derived from the raw 64-bit
/// engine output by hand so that a (seed, draw sequence) pair produces the
/// same values on every platform, which the replayable-run contract needs.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0, 1), 53 bits of entropy.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    /// Uniform integer in [0, n). Rejection sampling, no modulo bias.
    std::uint64_t uniform_int(std::uint64_t n) {
        if (n == 0) throw std::invalid_argument("uniform_int: n must be positive");
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v = engine_();
        while (v >= limit) v = engine_();
        return v % n;
    }

    /// Exponential with the given mean (mean = 1/rate).
    double exponential(double mean) {
        return -mean * std::log(1.0 - uniform());
    }

private:
    std::mt19937_64 engine_;
};

} // namespace driftless
