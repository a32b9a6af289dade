#include "qcrel/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qcrel::rng {
namespace {

inline std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    SplitMix64 sm{seed + 0x9E3779B97F4A7C15ull * (stream + 1)};
    sm.next();
    return sm.next();
}

Xoshiro256pp::Xoshiro256pp(std::uint64_t seed) {
    SplitMix64 sm{seed};
    for (auto& s : s_) s = sm.next();
    // all-zero state is the one invalid state
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
}

std::uint64_t Xoshiro256pp::next() {
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

double Xoshiro256pp::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
}

double Xoshiro256pp::gamma(double shape, double rate) {
    if (!(shape > 0.0) || !(rate > 0.0))
        throw std::domain_error("gamma: shape and rate must be positive");
    if (shape < 1.0) {
        const double g = gamma(shape + 1.0, 1.0);
        const double u = uniform01();
        return g * std::pow(u, 1.0 / shape) / rate;
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        const double x = normal();
        const double t = 1.0 + c * x;
        if (t <= 0.0) continue;
        const double v = t * t * t;
        const double u = uniform01();
        // exact log acceptance test (no squeeze shortcut)
        if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v)))
            return d * v / rate;
    }
}

}  // namespace qcrel::rng
