#pragma once

#include <cstddef>

namespace risres {

inline constexpr double kLog2E = 1.4426950408889634;  // log2(e)

// Gaussian tail probability Q(x) = P(N(0,1) > x).
double gaussian_q(double x);

// Inverse of the Gaussian tail probability on (0, 1).
// Throws std::domain_error outside the open interval.
double q_inv(double p);

// Channel dispersion V(gamma) = 1 - (1 + gamma)^-2 for gamma >= 0.
double dispersion(double gamma);

// Parameters of the finite-blocklength rate model.
struct FblParams {
  std::size_t blocklength = 0;  // symbols per block
  double bler = 0.0;            // target block error probability
  double bandwidth_hz = 0.0;
  double omega = 0.0;  // q_inv(bler) * log2(e), cached at construction

  FblParams() = default;
  FblParams(std::size_t blocklength, double bler, double bandwidth_hz);

  // Penalty multiplier omega / sqrt(blocklength) applied to sqrt(V).
  [[nodiscard]] double omega_over_sqrt_eta() const;
};

// Achievable rate in bit/s under the normal approximation,
// B * (log2(1+gamma) - omega * sqrt(V(gamma)/eta)), clamped at zero.
double fbl_rate(double gamma, const FblParams& params);

// Shannon rate B * log2(1 + gamma) in bit/s.
double ibl_rate(double gamma, double bandwidth_hz);

}  // namespace risres
