#pragma once

#include <cstdint>

namespace taskmap {

// splitmix64: the fixed generator behind all synthetic workloads. Chosen over
// std::mt19937_64 so that seeds reproduce the same graphs on every platform
// and standard library. Reference outputs are frozen in the test suite.
class SplitMix64 {
public:
    explicit SplitMix64(uint64_t seed) : state_(seed) {}

    uint64_t next() {
        state_ += 0x9E3779B97F4A7C15ULL;
        uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1), 53 bits of randomness.
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Inclusive integer range via modulo reduction. The bias is below 2^-50
    // for desk-scale ranges, which is irrelevant for workload synthesis.
    uint64_t uniform_u64(uint64_t lo, uint64_t hi) {
        return lo + next() % (hi - lo + 1);
    }

    uint32_t uniform_u32(uint32_t lo, uint32_t hi) {
        return static_cast<uint32_t>(uniform_u64(lo, hi));
    }

    double uniform(double lo, double hi) { return lo + uniform01() * (hi - lo); }

private:
    uint64_t state_;
};

} // namespace taskmap
