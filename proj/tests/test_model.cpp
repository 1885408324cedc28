#include <Eigen/Dense>
#include <cmath>
#include <complex>

#include "doctest.h"
#include "risres/channel.hpp"
#include "risres/config.hpp"
#include "risres/rng.hpp"
#include "risres/topology.hpp"

using namespace risres;

namespace {

SystemConfig small_config() {
  SystemConfig config;
  config.n_aps = 2;
  config.antennas_per_ap = 3;
  config.n_users = 2;
  config.n_ris_elements = 6;  // non-square count: 3 x 3 grid, 6 occupied
  config.rate_targets_bps.assign(config.n_users, 37e6);
  return config;
}

}  // namespace

TEST_CASE("pathloss amplitude: reference points and the 1 m clamp") {
  // 30 dB at 1 m -> amplitude 10^(-1.5).
  CHECK(pathloss_amplitude(1.0, 3.5) ==
        doctest::Approx(0.03162277660168379).epsilon(1e-14));
  // 30 + 22*log10(100) = 74 dB.
  CHECK(pathloss_amplitude(100.0, 2.2) ==
        doctest::Approx(1.9952623149688797e-4).epsilon(1e-13));
  CHECK(pathloss_amplitude(0.25, 3.5) == pathloss_amplitude(1.0, 3.5));
  // Monotone decreasing beyond the clamp.
  CHECK(pathloss_amplitude(200.0, 3.5) < pathloss_amplitude(100.0, 3.5));
}

TEST_CASE("topology layout respects the geometry constraints") {
  SystemConfig config = small_config();
  Rng rng(3);
  const Topology topo = generate_topology(config, rng);
  REQUIRE(topo.ap_positions_m.size() == config.n_aps);
  REQUIRE(topo.user_positions_m.size() == config.n_users);
  REQUIRE(topo.ris_element_offsets_m.size() == config.n_ris_elements);
  CHECK(topo.ris_position_m.head<2>().norm() == 0.0);
  CHECK(topo.ris_position_m.z() == kRisHeightM);
  const double a = config.area_half_extent_m;
  for (const auto& p : topo.ap_positions_m) {
    CHECK(std::abs(p.x()) <= a);
    CHECK(std::abs(p.y()) <= a);
    CHECK(p.z() == kApHeightM);
  }
  for (const auto& p : topo.user_positions_m) {
    CHECK(std::abs(p.x()) <= a);
    CHECK(std::abs(p.y()) <= a);
    CHECK(p.z() == kUserHeightM);
  }
  // Antenna arrays: L antennas at half-wavelength pitch around the AP.
  const auto antennas = topo.ap_antenna_positions(0, config);
  REQUIRE(antennas.size() == config.antennas_per_ap);
  CHECK((antennas[1] - antennas[0]).norm() ==
        doctest::Approx(config.carrier_wavelength_m / 2.0).epsilon(1e-12));
  // Element grid pitch.
  const auto elements = topo.ris_element_positions();
  REQUIRE(elements.size() == config.n_ris_elements);
  CHECK((elements[1] - elements[0]).norm() ==
        doctest::Approx(config.element_spacing_m).epsilon(1e-12));
}

TEST_CASE("channel generation is seed-deterministic with the right shapes") {
  SystemConfig config = small_config();
  Rng rng_topo(5);
  const Topology topo = generate_topology(config, rng_topo);
  Rng rng_a(7);
  Rng rng_b(7);
  const ChannelSet a = generate_channels(topo, config, rng_a);
  const ChannelSet b = generate_channels(topo, config, rng_b);
  REQUIRE(a.direct.rows() == 6);
  REQUIRE(a.direct.cols() == 2);
  REQUIRE(a.ap_to_ris.rows() == 6);
  REQUIRE(a.ap_to_ris.cols() == 6);
  REQUIRE(a.ris_to_user.rows() == 6);
  REQUIRE(a.ris_to_user.cols() == 2);
  CHECK(a.direct == b.direct);
  CHECK(a.ap_to_ris == b.ap_to_ris);
  CHECK(a.ris_to_user == b.ris_to_user);
  Rng rng_c(8);
  const ChannelSet c = generate_channels(topo, config, rng_c);
  CHECK(a.direct != c.direct);
}

TEST_CASE("line-of-sight block has the pathloss amplitude and unit phases") {
  SystemConfig config = small_config();
  Rng rng(5);
  const Topology topo = generate_topology(config, rng);
  Rng rng_ch(7);
  const ChannelSet ch = generate_channels(topo, config, rng_ch);
  const double dist = (topo.ap_positions_m[0] - topo.ris_position_m).norm();
  const double amp = pathloss_amplitude(dist, kPathlossExponentRis);
  for (Eigen::Index j = 0; j < 3; ++j) {
    CHECK(std::abs(ch.ap_to_ris(0, j)) == doctest::Approx(amp).epsilon(1e-12));
  }
}

TEST_CASE("effective channel combines direct and reflected paths") {
  SystemConfig config = small_config();
  Rng rng(11);
  const Topology topo = generate_topology(config, rng);
  const ChannelSet ch = generate_channels(topo, config, rng);
  Eigen::VectorXcd v(6);
  for (Eigen::Index m = 0; m < 6; ++m) {
    v(m) = std::polar(1.0, 0.37 * static_cast<double>(m));
  }
  for (std::size_t k = 0; k < 2; ++k) {
    const Eigen::VectorXcd h = effective_channel(ch, v, k);
    const Eigen::VectorXcd ref =
        ch.direct.col(static_cast<Eigen::Index>(k)) +
        ch.ap_to_ris *
            (ch.ris_to_user.col(static_cast<Eigen::Index>(k)).array() *
             v.array())
                .matrix();
    CHECK((h - ref).norm() <= 1e-12 * std::max(1.0, ref.norm()));
  }
  // All-zero phases leave only the direct path.
  const Eigen::VectorXcd off = effective_channel(
      ch, Eigen::VectorXcd::Zero(6), 0);
  CHECK((off - ch.direct.col(0)).norm() == 0.0);
}

TEST_CASE("sinr matches an independent evaluation") {
  SystemConfig config = small_config();
  Rng rng(13);
  const Topology topo = generate_topology(config, rng);
  const ChannelSet ch = generate_channels(topo, config, rng);
  NetworkState state;
  state.phase_vector.resize(6);
  for (Eigen::Index m = 0; m < 6; ++m) {
    state.phase_vector(m) = std::polar(1.0, -0.61 * static_cast<double>(m));
  }
  state.beamformers.resize(6, 2);
  for (Eigen::Index j = 0; j < 2; ++j) {
    for (Eigen::Index i = 0; i < 6; ++i) {
      state.beamformers(i, j) =
          std::complex<double>(0.1 * static_cast<double>(i - j), 0.05) *
          std::polar(1.0, 0.3 * static_cast<double>(i + j));
    }
  }
  const double noise = config.noise_power_w;
  for (std::size_t k = 0; k < 2; ++k) {
    const Eigen::VectorXcd h = effective_channel(ch, state.phase_vector, k);
    const double sig = std::norm(
        h.dot(state.beamformers.col(static_cast<Eigen::Index>(k))));
    double denom = noise;
    for (std::size_t j = 0; j < 2; ++j) {
      if (j == k) continue;
      denom += std::norm(
          h.dot(state.beamformers.col(static_cast<Eigen::Index>(j))));
    }
    const double expected = sig / denom;
    CHECK(sinr(ch, state, noise, k) ==
          doctest::Approx(expected).epsilon(1e-11));
  }
  const Eigen::VectorXd all =
      sinr_all(ch, state.beamformers, state.phase_vector, noise);
  CHECK(all.size() == 2);
  CHECK(all(0) == doctest::Approx(sinr(ch, state, noise, 0)).epsilon(1e-12));
  CHECK(all(1) == doctest::Approx(sinr(ch, state, noise, 1)).epsilon(1e-12));
}

TEST_CASE("blockage removes the strongest direct link and only that") {
  SystemConfig config = small_config();
  Rng rng(17);
  const Topology topo = generate_topology(config, rng);
  const ChannelSet ch = generate_channels(topo, config, rng);

  // Locate the strongest (ap, user) block by hand.
  double best = -1.0;
  std::size_t best_ap = 0;
  std::size_t best_user = 0;
  for (std::size_t ap = 0; ap < 2; ++ap) {
    for (std::size_t k = 0; k < 2; ++k) {
      const double norm2 = ch.direct
                               .block(static_cast<Eigen::Index>(ap * 3),
                                      static_cast<Eigen::Index>(k), 3, 1)
                               .squaredNorm();
      if (norm2 > best) {
        best = norm2;
        best_ap = ap;
        best_user = k;
      }
    }
  }

  const ChannelSet blocked = apply_blockage(ch);
  CHECK(blocked.is_blocked(best_ap, best_user));
  CHECK(blocked.blocked_links.size() == 1);
  CHECK(blocked.direct
            .block(static_cast<Eigen::Index>(best_ap * 3),
                   static_cast<Eigen::Index>(best_user), 3, 1)
            .norm() == 0.0);
  // Reflected paths and the other direct links are untouched.
  CHECK(blocked.ap_to_ris == ch.ap_to_ris);
  CHECK(blocked.ris_to_user == ch.ris_to_user);
  double untouched = 0.0;
  for (std::size_t ap = 0; ap < 2; ++ap) {
    for (std::size_t k = 0; k < 2; ++k) {
      if (ap == best_ap && k == best_user) continue;
      untouched += (blocked.direct.block(static_cast<Eigen::Index>(ap * 3),
                                         static_cast<Eigen::Index>(k), 3, 1) -
                    ch.direct.block(static_cast<Eigen::Index>(ap * 3),
                                    static_cast<Eigen::Index>(k), 3, 1))
                       .norm();
    }
  }
  CHECK(untouched == 0.0);

  // Repeated blockages eventually run out of links.
  ChannelSet cur = blocked;
  cur = apply_blockage(cur);
  cur = apply_blockage(cur);
  CHECK_THROWS_AS(apply_blockage(apply_blockage(cur)), std::runtime_error);
}
