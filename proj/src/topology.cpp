#include "risres/topology.hpp"

#include <array>
#include <cmath>

namespace risres {

std::vector<Eigen::Vector3d> Topology::ap_antenna_positions(
    std::size_t ap, const SystemConfig& config) const {
  const std::size_t n = config.antennas_per_ap;
  const double pitch = 0.5 * config.carrier_wavelength_m;
  std::vector<Eigen::Vector3d> out(n);
  for (std::size_t l = 0; l < n; ++l) {
    const double offset =
        (static_cast<double>(l) - 0.5 * static_cast<double>(n - 1)) * pitch;
    out[l] = ap_positions_m[ap] + Eigen::Vector3d(offset, 0.0, 0.0);
  }
  return out;
}

std::vector<Eigen::Vector3d> Topology::ris_element_positions() const {
  std::vector<Eigen::Vector3d> out(ris_element_offsets_m.size());
  for (std::size_t m = 0; m < out.size(); ++m) {
    out[m] = ris_position_m + ris_element_offsets_m[m];
  }
  return out;
}

Topology generate_topology(const SystemConfig& config, Rng& rng) {
  config.validate();
  const double a = config.area_half_extent_m;

  Topology topo;

  // Quadrant centers; a Fisher-Yates shuffle picks N distinct quadrants.
  const std::array<Eigen::Vector2d, 4> centers = {
      Eigen::Vector2d(a / 2, a / 2), Eigen::Vector2d(-a / 2, a / 2),
      Eigen::Vector2d(-a / 2, -a / 2), Eigen::Vector2d(a / 2, -a / 2)};
  std::array<std::size_t, 4> order = {0, 1, 2, 3};
  for (std::size_t i = 3; i > 0; --i) {
    const std::size_t j = rng.integer(i + 1);
    std::swap(order[i], order[j]);
  }

  topo.ap_positions_m.resize(config.n_aps);
  for (std::size_t n = 0; n < config.n_aps; ++n) {
    const Eigen::Vector2d& c = centers[order[n]];
    topo.ap_positions_m[n] = Eigen::Vector3d(c.x(), c.y(), kApHeightM);
  }

  // Users fall uniformly over the occupied quadrants: pick a quadrant, then
  // a uniform point within it.
  topo.user_positions_m.resize(config.n_users);
  for (std::size_t k = 0; k < config.n_users; ++k) {
    const std::size_t q = order[rng.integer(config.n_aps)];
    const Eigen::Vector2d& c = centers[q];
    const double x = rng.uniform(c.x() - a / 2, c.x() + a / 2);
    const double y = rng.uniform(c.y() - a / 2, c.y() + a / 2);
    topo.user_positions_m[k] = Eigen::Vector3d(x, y, kUserHeightM);
  }

  topo.ris_position_m = Eigen::Vector3d(0.0, 0.0, kRisHeightM);

  // Square grid (partial last row when M is not a perfect square), centered,
  // in the x-z plane.
  const std::size_t m_total = config.n_ris_elements;
  const auto side = static_cast<std::size_t>(
      std::ceil(std::sqrt(static_cast<double>(m_total))));
  const double pitch = config.element_spacing_m;
  topo.ris_element_offsets_m.resize(m_total);
  for (std::size_t m = 0; m < m_total; ++m) {
    const std::size_t row = m / side;
    const std::size_t col = m % side;
    const double half = 0.5 * static_cast<double>(side - 1);
    topo.ris_element_offsets_m[m] =
        Eigen::Vector3d((static_cast<double>(col) - half) * pitch, 0.0,
                        (static_cast<double>(row) - half) * pitch);
  }
  return topo;
}

}  // namespace risres
