#pragma once

#include <Eigen/Dense>
#include <vector>

#include "risres/config.hpp"
#include "risres/rng.hpp"

namespace risres {

inline constexpr double kApHeightM = 10.0;
inline constexpr double kRisHeightM = 5.0;
inline constexpr double kUserHeightM = 1.5;

// Node placement for one drop: APs in the centers of distinct random
// quadrants, users uniform over the occupied quadrants, RIS at the area
// center. RIS elements form a square grid in the vertical plane through the
// array center.
struct Topology {
  std::vector<Eigen::Vector3d> ap_positions_m;        // N
  std::vector<Eigen::Vector3d> user_positions_m;      // K
  Eigen::Vector3d ris_position_m;
  std::vector<Eigen::Vector3d> ris_element_offsets_m;  // M, local offsets

  // Per-AP antenna positions: half-wavelength uniform linear array along x.
  [[nodiscard]] std::vector<Eigen::Vector3d> ap_antenna_positions(
      std::size_t ap, const SystemConfig& config) const;

  [[nodiscard]] std::vector<Eigen::Vector3d> ris_element_positions() const;
};

Topology generate_topology(const SystemConfig& config, Rng& rng);

}  // namespace risres
