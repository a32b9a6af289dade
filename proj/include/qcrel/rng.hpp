#pragma once
// Deterministic random number generation. Everything in the project draws
// through these types so that runs are reproducible for a fixed seed on a
// given build. Independent streams are derived with mix_seed(), never by
// reusing a seed with an offset.

#include <cstdint>
#include <vector>

namespace qcrel::rng {

// SplitMix64, used for seeding and stream derivation.
struct SplitMix64 {
    std::uint64_t state;

    std::uint64_t next() {
        state += 0x9E3779B97F4A7C15ull;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }
};

// Derive a decorrelated stream seed from (seed, stream). Documented contract:
// the same pair always maps to the same stream; nearby stream indices give
// unrelated sequences.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

// xoshiro256++ core generator.
class Xoshiro256pp {
  public:
    explicit Xoshiro256pp(std::uint64_t seed);

    std::uint64_t next();

    // Uniform on the open interval (0,1): 53 random bits plus a half-ulp
    // offset, so Box-Muller and quantile transforms never see 0 or 1.
    double uniform01() {
        return static_cast<double>(next() >> 11) * 0x1.0p-53 + 0x1.0p-54;
    }

    // Standard normal via Box-Muller with a cached spare.
    double normal();

    // Gamma(shape, rate) via Marsaglia-Tsang (boosted for shape < 1).
    double gamma(double shape, double rate);

  private:
    std::uint64_t s_[4];
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace qcrel::rng
