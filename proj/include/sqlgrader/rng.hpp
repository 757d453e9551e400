#pragma once

#include <cstdint>

namespace sqlgrader {

// xoshiro256** seeded through splitmix64. Hand-rolled so that the draw
// sequence is identical on every platform and compiler; std::mt19937_64 is
// portable but the standard distributions are not.
class SeededRng {
public:
    explicit SeededRng(std::uint64_t seed);

    std::uint64_t next_u64();

    // Uniform double in [0, 1), 53 mantissa bits.
    double next_double();

    // Uniform double in [lo, hi).
    double uniform(double lo, double hi);

    // Uniform integer in [0, n), n > 0. Unbiased via rejection.
    std::uint64_t next_below(std::uint64_t n);

    std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t seed_;
    std::uint64_t state_[4];
};

// splitmix64 finalizer; used to derive per-fold seeds from a master seed.
std::uint64_t mix64(std::uint64_t x);

}  // namespace sqlgrader
