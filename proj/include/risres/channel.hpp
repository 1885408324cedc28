#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <set>
#include <utility>

#include "risres/config.hpp"
#include "risres/kernels.hpp"
#include "risres/rng.hpp"
#include "risres/topology.hpp"

namespace risres {

enum class Regime { kIbl, kFbl };

// One coherence-block channel realization. Direct channels are stacked over
// APs: rows [n*L, (n+1)*L) of `direct` hold h_{n,k} in column k. Blocked
// direct links are zeroed and recorded in `blocked_links`.
struct ChannelSet {
  std::size_t n_aps = 0;
  std::size_t antennas_per_ap = 0;
  std::size_t n_users = 0;
  std::size_t n_ris_elements = 0;

  Eigen::MatrixXcd direct;       // (N*L) x K
  Eigen::MatrixXcd ap_to_ris;    // (N*L) x M, deterministic line of sight
  Eigen::MatrixXcd ris_to_user;  // M x K, spatially correlated
  std::set<std::pair<std::size_t, std::size_t>> blocked_links;  // (n, k)

  [[nodiscard]] std::size_t dims() const { return n_aps * antennas_per_ap; }
  [[nodiscard]] bool is_blocked(std::size_t ap, std::size_t user) const {
    return blocked_links.count({ap, user}) != 0;
  }
};

// Operating point of the network at some instant.
struct NetworkState {
  Eigen::MatrixXcd beamformers;   // (N*L) x K, column k serves user k
  Eigen::VectorXcd phase_vector;  // M RIS coefficients, |v_m| <= 1
  Eigen::VectorXd rates_bps;      // K allocated rates
  Regime regime = Regime::kIbl;
};

// Free-space-style distance power law: 30 dB at 1 m plus 10*alpha*log10(d).
// Returns the linear amplitude factor; distances clamp at 1 m.
double pathloss_amplitude(double distance_m, double exponent);

inline constexpr double kPathlossExponentDirect = 3.5;
inline constexpr double kPathlossExponentRis = 2.2;

// Spatial correlation matrix of the RIS grid, R(m,l) = sinc(2 d_ml / lambda).
Eigen::MatrixXd ris_correlation_matrix(
    const std::vector<Eigen::Vector3d>& element_offsets_m,
    double wavelength_m);

ChannelSet generate_channels(const Topology& topo, const SystemConfig& config,
                             Rng& rng);

// h_k + H diag(g_k) v for user k.
Eigen::VectorXcd effective_channel(const ChannelSet& channels,
                                   const Eigen::VectorXcd& phase_vector,
                                   std::size_t user);

// Zeroes the strongest not-yet-blocked direct link (ties broken toward the
// lexicographically smallest (ap, user) pair) and returns the result.
// Throws std::runtime_error when every link is already blocked.
ChannelSet apply_blockage(const ChannelSet& channels);

// SINR of user k under the given operating point.
double sinr(const ChannelSet& channels, const NetworkState& state,
            double noise_power_w, std::size_t user);

// SINRs of all users; uses the parallel kernels.
Eigen::VectorXd sinr_all(const ChannelSet& channels,
                         const Eigen::MatrixXcd& beamformers,
                         const Eigen::VectorXcd& phase_vector,
                         double noise_power_w);

}  // namespace risres
