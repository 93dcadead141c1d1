#pragma once

#include <cstdint>
#include <random>

namespace routewise {

// Seeded generator whose output is identical on every platform: the engine
// is mt19937_64 (fully specified by the standard) and the distributions are
// implemented here rather than taken from <random>, whose distribution
// algorithms are implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform on [0, 1) with 53 bits of precision.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // Uniform integer on [0, bound), unbiased via rejection. bound must be > 0.
    std::uint64_t uniform_index(std::uint64_t bound);

    // Standard normal via Box-Muller; the second variate of each pair is
    // cached, so the stream is deterministic for a given call sequence.
    double normal();

private:
    std::mt19937_64 engine_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

}  // namespace routewise
