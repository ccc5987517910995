#pragma once

// Deterministic sampling helpers. std::uniform_real_distribution is
// implementation-defined, so uniforms are derived from raw mt19937_64 draws
// to make seeded runs reproducible across standard libraries.

#include <cstdint>
#include <random>

#include "pricegrad/vec.hpp"

namespace pricegrad {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // uniform in [0, 1)
  double uniform01() { return (gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // uniform in the coordinate box [lo, hi]^n
  Vec uniform_vec(std::size_t n, double lo, double hi) {
    Vec r(n);
    for (auto& ri : r) ri = uniform(lo, hi);
    return r;
  }

  // uniform direction on the unit sphere (Gaussian normalization)
  Vec unit_vec(std::size_t n) {
    Vec r(n);
    double s = 0.0;
    do {
      for (auto& ri : r) ri = gaussian();
      s = norm2(r);
    } while (s < 1e-12);
    for (auto& ri : r) ri /= s;
    return r;
  }

  std::uint64_t raw() { return gen_(); }

 private:
  double gaussian() {
    // Box-Muller on deterministic uniforms
    double u1 = uniform01();
    double u2 = uniform01();
    while (u1 <= 1e-300) u1 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  std::mt19937_64 gen_;
};

}  // namespace pricegrad
