#pragma once

#include <cstdint>
#include <random>

namespace pk {

// Deterministic uniform sampler.  The engine is seeded explicitly and the
// bits-to-double mapping is spelled out here because distribution classes
// are allowed to differ between standard library implementations; reports
// produced from the same seed must be byte-identical everywhere.
class Rng {
  public:
    explicit Rng(uint64_t seed) : eng_(seed) {}

    // Uniform in [0, 1) with 53 random bits.
    double uniform() { return (eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform over {lo, ..., hi} inclusive.
    int uniform_int(int lo, int hi) {
        return lo + static_cast<int>(eng_() % static_cast<uint64_t>(hi - lo + 1));
    }

    bool coin() { return (eng_() & 1) != 0; }

    uint64_t bits() { return eng_(); }

  private:
    std::mt19937_64 eng_;
};

}  // namespace pk
