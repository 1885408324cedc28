#pragma once

#include <complex>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace risres {

// Deterministic random source. All distribution transforms are implemented
// here (rather than with std:: distributions) because the standard leaves
// their algorithms implementation-defined; this way a seed produces the same
// stream on every platform and compiler.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller; the paired draw is cached.
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]; keeps the log finite
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

  // Circularly-symmetric complex normal with unit variance, CN(0, 1).
  std::complex<double> cgaussian() {
    const double re = gaussian();
    const double im = gaussian();
    return {re * std::numbers::sqrt2 / 2.0, im * std::numbers::sqrt2 / 2.0};
  }

  // Uniform phase in [0, 2*pi).
  double phase() { return 2.0 * std::numbers::pi * uniform(); }

  // Uniform integer in [0, n).
  std::uint64_t integer(std::uint64_t n) {
    // Rejection sampling to avoid modulo bias.
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t raw = engine_();
    while (raw >= limit) raw = engine_();
    return raw % n;
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace risres
