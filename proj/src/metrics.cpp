#include "risres/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace risres::metrics {

namespace {

double mean_rate_ratio(const RateSnapshot& snapshot, bool capped) {
  const auto k_total = snapshot.rates_bps.size();
  if (k_total == 0 || snapshot.targets_bps.size() != k_total) {
    throw std::invalid_argument("rate snapshot sizes must match and be > 0");
  }
  double sum = 0.0;
  for (Eigen::Index k = 0; k < k_total; ++k) {
    const double target = snapshot.targets_bps(k);
    if (!(target > 0.0)) {
      throw std::invalid_argument("rate targets must be positive");
    }
    const double ratio = snapshot.rates_bps(k) / target;
    sum += capped ? std::min(1.0, ratio) : ratio;
  }
  return sum / static_cast<double>(k_total);
}

}  // namespace

double absorption(const RateSnapshot& snapshot, bool capped) {
  return mean_rate_ratio(snapshot, capped);
}

double adaptation(const RateSnapshot& snapshot, bool capped) {
  return mean_rate_ratio(snapshot, capped);
}

double time_to_recovery(const Timeline& timeline) {
  if (!(timeline.t0_max_s > 0.0)) {
    throw std::invalid_argument("t0_max_s must be positive");
  }
  if (timeline.tq_s < timeline.t0_s) {
    throw std::invalid_argument("tq_s must not precede t0_s");
  }
  const double elapsed = timeline.tq_s - timeline.t0_s;
  return elapsed <= timeline.t0_max_s ? 1.0 : timeline.t0_max_s / elapsed;
}

double resilience(double r_abs, double r_ada, double r_rec,
                  const ResilienceWeights& weights) {
  if (weights.absorption < 0.0 || weights.adaptation < 0.0 ||
      weights.recovery < 0.0) {
    throw std::invalid_argument("resilience weights must be >= 0");
  }
  const double sum =
      weights.absorption + weights.adaptation + weights.recovery;
  if (std::abs(sum - 1.0) > 1e-12) {
    throw std::invalid_argument("resilience weights must sum to 1");
  }
  return weights.absorption * r_abs + weights.adaptation * r_ada +
         weights.recovery * r_rec;
}

double adaptation_gap(const Eigen::VectorXd& rates_bps,
                      const Eigen::VectorXd& targets_bps) {
  if (rates_bps.size() != targets_bps.size() || rates_bps.size() == 0) {
    throw std::invalid_argument("rate/target sizes must match and be > 0");
  }
  double gap = 0.0;
  for (Eigen::Index k = 0; k < rates_bps.size(); ++k) {
    if (!(targets_bps(k) > 0.0)) {
      throw std::invalid_argument("rate targets must be positive");
    }
    gap += std::abs(rates_bps(k) / targets_bps(k) - 1.0);
  }
  return gap;
}

}  // namespace risres::metrics
