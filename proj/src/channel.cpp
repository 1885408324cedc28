#include "risres/channel.hpp"

#include <cmath>
#include <stdexcept>

namespace risres {

double pathloss_amplitude(double distance_m, double exponent) {
  const double d = std::max(distance_m, 1.0);
  const double loss_db = 30.0 + 10.0 * exponent * std::log10(d);
  return std::pow(10.0, -loss_db / 20.0);
}

Eigen::MatrixXd ris_correlation_matrix(
    const std::vector<Eigen::Vector3d>& element_offsets_m,
    double wavelength_m) {
  Eigen::MatrixXd corr;
  kernels::sinc_correlation(element_offsets_m, wavelength_m, corr,
                            kernels::Exec::kParallel);
  return corr;
}

namespace {

// Symmetric PSD square root; tiny negative eigenvalues from roundoff clamp
// to zero.
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& mat) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(mat);
  Eigen::VectorXd vals = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * vals.asDiagonal() *
         eig.eigenvectors().transpose();
}

}  // namespace

ChannelSet generate_channels(const Topology& topo, const SystemConfig& config,
                             Rng& rng) {
  const std::size_t n = config.n_aps;
  const std::size_t l = config.antennas_per_ap;
  const std::size_t k_total = config.n_users;
  const std::size_t m_total = config.n_ris_elements;
  const std::size_t dims = n * l;

  ChannelSet ch;
  ch.n_aps = n;
  ch.antennas_per_ap = l;
  ch.n_users = k_total;
  ch.n_ris_elements = m_total;

  // Direct links: Rayleigh fading with log-normal shadowing. Drawn first so
  // the realization does not depend on the RIS size.
  ch.direct.resize(dims, k_total);
  for (std::size_t k = 0; k < k_total; ++k) {
    for (std::size_t ap = 0; ap < n; ++ap) {
      const double dist =
          (topo.ap_positions_m[ap] - topo.user_positions_m[k]).norm();
      const double shadow_db = rng.gaussian() * config.shadowing_std_db;
      const double amp = pathloss_amplitude(dist, kPathlossExponentDirect) *
                         std::pow(10.0, shadow_db / 20.0);
      for (std::size_t a = 0; a < l; ++a) {
        ch.direct(ap * l + a, k) = amp * rng.cgaussian();
      }
    }
  }

  // AP-to-RIS: deterministic line of sight with exact per-antenna distances.
  const auto elements = topo.ris_element_positions();
  ch.ap_to_ris.resize(dims, m_total);
  for (std::size_t ap = 0; ap < n; ++ap) {
    const double dist = (topo.ap_positions_m[ap] - topo.ris_position_m).norm();
    const double amp = pathloss_amplitude(dist, kPathlossExponentRis);
    kernels::los_phase_matrix(
        topo.ap_antenna_positions(ap, config), elements,
        config.carrier_wavelength_m, amp,
        ch.ap_to_ris.middleRows(static_cast<std::ptrdiff_t>(ap * l),
                                static_cast<std::ptrdiff_t>(l)),
        kernels::Exec::kParallel);
  }

  // RIS-to-user: correlated Rayleigh, g_k = amp * R^(1/2) e_k.
  const Eigen::MatrixXd sqrt_corr = psd_sqrt(ris_correlation_matrix(
      topo.ris_element_offsets_m, config.carrier_wavelength_m));
  ch.ris_to_user.resize(m_total, k_total);
  Eigen::VectorXcd raw(m_total);
  Eigen::VectorXcd mixed(m_total);
  for (std::size_t k = 0; k < k_total; ++k) {
    const double dist =
        (topo.ris_position_m - topo.user_positions_m[k]).norm();
    const double amp = pathloss_amplitude(dist, kPathlossExponentRis);
    for (std::size_t m = 0; m < m_total; ++m) raw(m) = rng.cgaussian();
    kernels::real_matvec(sqrt_corr, raw, mixed, kernels::Exec::kParallel);
    ch.ris_to_user.col(k) = amp * mixed;
  }
  return ch;
}

Eigen::VectorXcd effective_channel(const ChannelSet& channels,
                                   const Eigen::VectorXcd& phase_vector,
                                   std::size_t user) {
  const auto dims = static_cast<std::ptrdiff_t>(channels.dims());
  const auto m_total = static_cast<std::ptrdiff_t>(channels.n_ris_elements);
  const auto k = static_cast<std::ptrdiff_t>(user);
  Eigen::VectorXcd out(dims);
  // Same accumulation order as kernels::effective_channels.
  for (std::ptrdiff_t i = 0; i < dims; ++i) {
    std::complex<double> acc = channels.direct(i, k);
    for (std::ptrdiff_t m = 0; m < m_total; ++m) {
      acc += channels.ap_to_ris(i, m) *
             (channels.ris_to_user(m, k) * phase_vector(m));
    }
    out(i) = acc;
  }
  return out;
}

ChannelSet apply_blockage(const ChannelSet& channels) {
  const std::size_t n = channels.n_aps;
  const std::size_t l = channels.antennas_per_ap;
  const std::size_t k_total = channels.n_users;
  if (channels.blocked_links.size() >= n * k_total) {
    throw std::runtime_error("apply_blockage: all direct links blocked");
  }

  ChannelSet out = channels;
  double best = -1.0;
  std::pair<std::size_t, std::size_t> target{0, 0};
  for (std::size_t ap = 0; ap < n; ++ap) {
    for (std::size_t k = 0; k < k_total; ++k) {
      if (out.is_blocked(ap, k)) continue;
      const double norm2 =
          out.direct
              .block(static_cast<std::ptrdiff_t>(ap * l),
                     static_cast<std::ptrdiff_t>(k),
                     static_cast<std::ptrdiff_t>(l), 1)
              .squaredNorm();
      if (norm2 > best) {  // strict: first maximizer in (ap, k) order wins
        best = norm2;
        target = {ap, k};
      }
    }
  }
  out.direct
      .block(static_cast<std::ptrdiff_t>(target.first * l),
             static_cast<std::ptrdiff_t>(target.second),
             static_cast<std::ptrdiff_t>(l), 1)
      .setZero();
  out.blocked_links.insert(target);
  return out;
}

double sinr(const ChannelSet& channels, const NetworkState& state,
            double noise_power_w, std::size_t user) {
  const Eigen::VectorXcd heff =
      effective_channel(channels, state.phase_vector, user);
  double signal = 0.0;
  double interference = 0.0;
  for (std::ptrdiff_t i = 0; i < state.beamformers.cols(); ++i) {
    const double power = std::norm(heff.dot(state.beamformers.col(i)));
    if (static_cast<std::size_t>(i) == user) {
      signal = power;
    } else {
      interference += power;
    }
  }
  return signal / (interference + noise_power_w);
}

Eigen::VectorXd sinr_all(const ChannelSet& channels,
                         const Eigen::MatrixXcd& beamformers,
                         const Eigen::VectorXcd& phase_vector,
                         double noise_power_w) {
  Eigen::MatrixXcd heff;
  kernels::effective_channels(channels.direct, channels.ap_to_ris,
                              channels.ris_to_user, phase_vector, heff,
                              kernels::Exec::kParallel);
  Eigen::VectorXd out;
  kernels::sinr_all(heff, beamformers, noise_power_w, out,
                    kernels::Exec::kParallel);
  return out;
}

}  // namespace risres
