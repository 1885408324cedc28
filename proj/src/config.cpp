#include "risres/config.hpp"

#include <cmath>

namespace risres {

double dbm_to_watts(double dbm) { return 1e-3 * std::pow(10.0, dbm / 10.0); }

double watts_to_dbm(double watts) {
  if (!(watts > 0.0)) {
    throw ConfigError("watts_to_dbm: power must be positive");
  }
  return 10.0 * std::log10(watts / 1e-3);
}

SystemConfig::SystemConfig() {
  noise_power_w = dbm_to_watts(-100.0);
  max_tx_power_w = dbm_to_watts(32.0);
  rate_targets_bps.assign(n_users, 37e6);
}

namespace {

void require(bool ok, const char* message) {
  if (!ok) throw ConfigError(message);
}

}  // namespace

void SystemConfig::validate() const {
  require(n_aps >= 1, "n_aps must be >= 1");
  require(n_aps <= 4, "n_aps must be <= 4 (one AP per quadrant)");
  require(antennas_per_ap >= 1, "antennas_per_ap must be >= 1");
  require(n_users >= 1, "n_users must be >= 1");
  require(n_ris_elements >= 1, "n_ris_elements must be >= 1");
  require(bandwidth_hz > 0.0, "bandwidth_hz must be positive");
  require(noise_power_w > 0.0, "noise_power_w must be positive");
  // Zero is the silent network (nothing transmits), which the scenario layer
  // handles as a degenerate but valid operating point.
  require(max_tx_power_w >= 0.0, "max_tx_power_w must be >= 0");
  require(carrier_wavelength_m > 0.0, "carrier_wavelength_m must be positive");
  require(element_spacing_m > 0.0, "element_spacing_m must be positive");
  require(area_half_extent_m > 0.0, "area_half_extent_m must be positive");
  require(shadowing_std_db >= 0.0, "shadowing_std_db must be >= 0");
  require(bler > 0.0 && bler < 0.5, "bler must lie in (0, 0.5)");
  require(blocklength >= 1, "blocklength must be >= 1");
  require(rate_targets_bps.size() == n_users,
          "rate_targets_bps must have one entry per user");
  for (double r : rate_targets_bps) {
    require(r > 0.0, "rate_targets_bps entries must be positive");
  }
  require(weights.absorption >= 0.0 && weights.adaptation >= 0.0 &&
              weights.recovery >= 0.0,
          "resilience weights must be >= 0");
  const double sum =
      weights.absorption + weights.adaptation + weights.recovery;
  require(std::abs(sum - 1.0) <= 1e-12, "resilience weights must sum to 1");
  require(t0_max_recovery_s > 0.0, "t0_max_recovery_s must be positive");
  require(coherence_time_s > 0.0, "coherence_time_s must be positive");
  require(per_subproblem_time_s > 0.0,
          "per_subproblem_time_s must be positive");
  require(penalty_weight >= 0.0, "penalty_weight must be >= 0");
  require(probe_steps >= 1, "probe_steps must be >= 1");
}

}  // namespace risres
