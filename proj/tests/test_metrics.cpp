#include <Eigen/Dense>
#include <stdexcept>

#include "doctest.h"
#include "risres/metrics.hpp"

using namespace risres;
using namespace risres::metrics;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> values) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

}  // namespace

TEST_CASE("absorption and adaptation: capped mean of rate ratios") {
  const RateSnapshot snap{vec({10.0, 40.0, 10.0}), vec({20.0, 20.0, 10.0})};
  // capped: mean(0.5, 1, 1) = 5/6
  CHECK(absorption(snap, true) == doctest::Approx(5.0 / 6.0).epsilon(1e-15));
  // uncapped: mean(0.5, 2, 1) = 7/6
  CHECK(absorption(snap, false) == doctest::Approx(7.0 / 6.0).epsilon(1e-15));
  // Identical functional form for the adaptation snapshot.
  CHECK(adaptation(snap, true) == absorption(snap, true));
  CHECK(adaptation(snap, false) == absorption(snap, false));
}

TEST_CASE("rate ratios floor at zero rates and validate targets") {
  const RateSnapshot zero{vec({0.0, 0.0}), vec({5.0, 5.0})};
  CHECK(absorption(zero, true) == 0.0);
  const RateSnapshot bad{vec({1.0}), vec({0.0})};
  CHECK_THROWS_AS(absorption(bad, true), std::invalid_argument);
  const RateSnapshot mismatched{vec({1.0, 2.0}), vec({1.0})};
  CHECK_THROWS_AS(absorption(mismatched, true), std::invalid_argument);
}

TEST_CASE("time to recovery: within budget, boundary, lateness") {
  CHECK(time_to_recovery({0.0, 0.5, 1.0}) == 1.0);
  // Exact boundary t_q - t_0 = T_0 must give exactly 1.
  CHECK(time_to_recovery({1.0, 6.0, 5.0}) == 1.0);
  CHECK(time_to_recovery({0.0, 2.0, 1.0}) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(time_to_recovery({0.0, 10.0, 1.0}) ==
        doctest::Approx(0.1).epsilon(1e-15));
  // Instant recovery.
  CHECK(time_to_recovery({3.0, 3.0, 1.0}) == 1.0);
}

TEST_CASE("resilience: convex combination of the three components") {
  ResilienceWeights w;
  w.absorption = 0.1;
  w.adaptation = 0.5;
  w.recovery = 0.4;
  CHECK(resilience(1.0, 1.0, 1.0, w) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(resilience(0.5, 0.25, 1.0, w) ==
        doctest::Approx(0.1 * 0.5 + 0.5 * 0.25 + 0.4).epsilon(1e-15));
  CHECK(resilience(0.0, 0.0, 0.0, w) == 0.0);
}

TEST_CASE("adaptation gap: sum of absolute relative misses, uncapped") {
  // |0.5 - 1| + |2 - 1| + |1 - 1| = 1.5
  CHECK(adaptation_gap(vec({10.0, 40.0, 10.0}), vec({20.0, 20.0, 10.0})) ==
        doctest::Approx(1.5).epsilon(1e-15));
  // Negative rates are legal inputs (pre-repair iterates can carry them).
  CHECK(adaptation_gap(vec({-10.0}), vec({20.0})) ==
        doctest::Approx(1.5).epsilon(1e-15));
  CHECK(adaptation_gap(vec({20.0, 20.0}), vec({20.0, 20.0})) == 0.0);
  CHECK_THROWS_AS(adaptation_gap(vec({1.0}), vec({-1.0})),
                  std::invalid_argument);
}
