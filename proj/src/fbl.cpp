#include "risres/fbl.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace risres {

double gaussian_q(double x) {
  // Q(x) = erfc(x / sqrt(2)) / 2; erfc avoids cancellation for large x.
  return 0.5 * std::erfc(x / std::numbers::sqrt2);
}

namespace {

// Density of the standard normal.
double gaussian_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

// Solves Q(x) = p for p in (0, 0.5] by safeguarded Newton iteration.
double q_inv_upper(double p) {
  if (p == 0.5) return 0.0;
  // Initial guess from the tail bound Q(x) <= exp(-x^2/2) / 2.
  double x = std::sqrt(std::max(0.0, -2.0 * std::log(2.0 * p)));
  double lo = 0.0;
  double hi = std::max(x + 2.0, 45.0);  // Q(45) < 1e-300, safe upper bracket
  for (int iter = 0; iter < 200; ++iter) {
    const double err = gaussian_q(x) - p;
    if (err > 0.0) {
      lo = x;
    } else if (err < 0.0) {
      hi = x;
    } else {
      return x;
    }
    const double step = err / gaussian_pdf(x);  // Q'(x) = -pdf(x)
    double next = x + step;
    if (!(next > lo) || !(next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 1e-16 * std::max(1.0, std::abs(x))) return next;
    x = next;
  }
  return x;
}

}  // namespace

double q_inv(double p) {
  if (!(p > 0.0) || !(p < 1.0)) {
    throw std::domain_error("q_inv: probability must lie in (0, 1)");
  }
  return p <= 0.5 ? q_inv_upper(p) : -q_inv_upper(1.0 - p);
}

double dispersion(double gamma) {
  if (gamma < 0.0) throw std::domain_error("dispersion: gamma must be >= 0");
  const double denom = (1.0 + gamma) * (1.0 + gamma);
  return 1.0 - 1.0 / denom;
}

FblParams::FblParams(std::size_t blocklength, double bler, double bandwidth_hz)
    : blocklength(blocklength), bler(bler), bandwidth_hz(bandwidth_hz) {
  if (blocklength == 0) {
    throw std::domain_error("FblParams: blocklength must be positive");
  }
  if (!(bandwidth_hz > 0.0)) {
    throw std::domain_error("FblParams: bandwidth must be positive");
  }
  omega = q_inv(bler) * kLog2E;  // validates bler in (0, 1)
}

double FblParams::omega_over_sqrt_eta() const {
  return omega / std::sqrt(static_cast<double>(blocklength));
}

double fbl_rate(double gamma, const FblParams& params) {
  if (gamma < 0.0) throw std::domain_error("fbl_rate: gamma must be >= 0");
  const double spectral = std::log1p(gamma) * kLog2E;
  const double penalty =
      params.omega_over_sqrt_eta() * std::sqrt(dispersion(gamma));
  return std::max(0.0, params.bandwidth_hz * (spectral - penalty));
}

double ibl_rate(double gamma, double bandwidth_hz) {
  if (gamma < 0.0) throw std::domain_error("ibl_rate: gamma must be >= 0");
  return bandwidth_hz * std::log1p(gamma) * kLog2E;
}

}  // namespace risres
