#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "risres/fbl.hpp"

namespace risres {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

double dbm_to_watts(double dbm);
double watts_to_dbm(double watts);

struct ResilienceWeights {
  double absorption = 0.1;
  double adaptation = 0.5;
  double recovery = 0.4;
};

// Policy for the branch that tolerates a disruption instead of recovering.
enum class IgnorePolicy {
  kStaleBeamformers,  // keep the pre-disruption configuration as-is
  kReoptimize,        // re-optimize under IBL on the blocked channel
};

// Full system parameterization. Power quantities are stored linear (watts);
// loaders convert from dBm at the boundary.
struct SystemConfig {
  std::size_t n_aps = 3;             // N
  std::size_t antennas_per_ap = 8;   // L
  std::size_t n_users = 6;           // K
  std::size_t n_ris_elements = 1000; // M, laid out on a square grid

  double bandwidth_hz = 10e6;             // B
  double noise_power_w = 1e-13;           // sigma^2 (-100 dBm)
  double max_tx_power_w = 1.5848931924611136;  // per AP (32 dBm)
  double carrier_wavelength_m = 0.1;      // lambda_f
  double element_spacing_m = 0.025;       // RIS grid pitch (lambda_f / 4)
  double area_half_extent_m = 500.0;      // square area [-a, a]^2
  double shadowing_std_db = 8.0;

  double bler = 1e-5;            // epsilon
  std::size_t blocklength = 300; // eta

  std::vector<double> rate_targets_bps;  // r_k^des, length K (37 Mbps each)

  ResilienceWeights weights;        // (lambda_1, lambda_2, lambda_3)
  double t0_max_recovery_s = 5.0;   // T_0
  double coherence_time_s = 1.0;    // T_c, wall-clock budget for alternation
  double per_subproblem_time_s = 0.01;  // T_calc
  double penalty_weight = 1e3;          // alpha_v, unit-modulus penalty

  std::uint64_t rng_seed = 1;

  // Behavioral toggles (exposed as CLI flags).
  bool capped_metrics = true;   // cap per-user rate ratios at 1
  bool inject_blockage = true;  // control runs can disable the disruption
  IgnorePolicy ignore_policy = IgnorePolicy::kStaleBeamformers;
  std::size_t probe_steps = 4;  // alternation steps in the recovery probe

  SystemConfig();

  // Throws ConfigError naming the offending field.
  void validate() const;

  [[nodiscard]] FblParams fbl() const {
    return FblParams(blocklength, bler, bandwidth_hz);
  }
};

}  // namespace risres
