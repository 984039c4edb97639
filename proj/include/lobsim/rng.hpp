#pragma once

#include <cstdint>

namespace lobsim {

// SplitMix64 (Steele, Lea & Flood 2014). Used to expand one master seed
// into per-replica stream seeds; never used inside the simulation loop.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

    std::uint64_t next() noexcept {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t state_;
};

// PCG-XSH-RR 64/32 (O'Neill 2014), single-stream variant with the reference
// increment. All simulation randomness flows through this generator so that
// identical (seed, config) pairs reproduce bit-for-bit on any platform;
// standard-library distributions are deliberately avoided for that reason.
class Pcg32 {
public:
    explicit Pcg32(std::uint64_t seed) noexcept : state_(0) {
        next_u32();
        state_ += seed;
        next_u32();
    }

    std::uint32_t next_u32() noexcept {
        const std::uint64_t old = state_;
        state_ = old * 6364136223846793005ULL + 1442695040888963407ULL;
        const auto xorshifted = static_cast<std::uint32_t>(((old >> 18u) ^ old) >> 27u);
        const auto rot = static_cast<std::uint32_t>(old >> 59u);
        return (xorshifted >> rot) | (xorshifted << ((32u - rot) & 31u));
    }

    // Unbiased draw in [0, n). Lemire's multiply-shift with rejection.
    std::uint32_t uniform_below(std::uint32_t n) noexcept {
        std::uint64_t m = static_cast<std::uint64_t>(next_u32()) * n;
        auto low = static_cast<std::uint32_t>(m);
        if (low < n) {
            const std::uint32_t threshold = (0u - n) % n;
            while (low < threshold) {
                m = static_cast<std::uint64_t>(next_u32()) * n;
                low = static_cast<std::uint32_t>(m);
            }
        }
        return static_cast<std::uint32_t>(m >> 32);
    }

    // Inclusive integer range; requires lo <= hi.
    int uniform_int(int lo, int hi) noexcept {
        const auto span = static_cast<std::uint32_t>(static_cast<std::int64_t>(hi) - lo + 1);
        return lo + static_cast<int>(uniform_below(span));
    }

    // Uniform in [0, 1) with 32-bit resolution.
    double next_double() noexcept {
        return static_cast<double>(next_u32()) * 0x1.0p-32;
    }

    bool bernoulli(double p) noexcept { return next_double() < p; }

    bool coin() noexcept { return uniform_below(2) == 1; }

private:
    std::uint64_t state_;
};

// Replica i draws the i-th value of the SplitMix64 stream seeded with the
// master seed (replica 0 included). Recorded in run metadata so any replica
// can be reproduced standalone.
inline std::uint64_t derive_replica_seed(std::uint64_t master_seed, std::uint64_t replica_index) noexcept {
    SplitMix64 mix(master_seed);
    std::uint64_t s = mix.next();
    for (std::uint64_t i = 0; i < replica_index; ++i) {
        s = mix.next();
    }
    return s;
}

} // namespace lobsim
