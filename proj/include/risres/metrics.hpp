#pragma once

#include <Eigen/Dense>

#include "risres/config.hpp"

namespace risres::metrics {

// Disruption and recovery instants on a common clock.
struct Timeline {
  double t0_s = 0.0;      // disruption
  double tq_s = 0.0;      // recovery complete
  double t0_max_s = 1.0;  // tolerated recovery time T_0
};

// Achieved rates against their targets at one instant.
struct RateSnapshot {
  Eigen::VectorXd rates_bps;
  Eigen::VectorXd targets_bps;
};

// Mean ratio of achieved to target rate; ratios cap at 1 unless disabled.
double absorption(const RateSnapshot& snapshot, bool capped = true);

// Same functional form evaluated on the post-adaptation snapshot.
double adaptation(const RateSnapshot& snapshot, bool capped = true);

// 1 when recovery finished within t0_max_s, else the lateness ratio
// t0_max_s / (tq_s - t0_s).
double time_to_recovery(const Timeline& timeline);

// Weighted sum of the three components; weights must be a convex combination.
double resilience(double r_abs, double r_ada, double r_rec,
                  const ResilienceWeights& weights);

// Sum of |rate/target - 1| over users (uncapped by definition).
double adaptation_gap(const Eigen::VectorXd& rates_bps,
                      const Eigen::VectorXd& targets_bps);

}  // namespace risres::metrics
