#pragma once

#include <array>
#include <cstdint>

namespace vid {

// Seedable, splittable random stream (xoshiro256** core, splitmix64 seeding).
//
// Every stochastic operation in this codebase takes a stream explicitly, and
// workers derive independent child streams with split(), so any draw can be
// replayed in isolation. split() is const: child streams depend only on the
// parent's current state and the key, not on call order.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed);

    std::uint64_t next_u64();

    // Uniform in [0, 1).
    double next_real();

    double uniform_real(double lo, double hi);

    // Uniform integer in [lo, hi], both inclusive. Unbiased (rejection sampling).
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

    double normal(double mean = 0.0, double stddev = 1.0);

    bool bernoulli(double p);

    // Independent child stream keyed by `key`; the parent is not advanced.
    RngStream split(std::uint64_t key) const;

private:
    std::array<std::uint64_t, 4> state_{};
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace vid
