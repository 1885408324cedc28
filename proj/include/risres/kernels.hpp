#pragma once

#include <Eigen/Dense>
#include <vector>

namespace risres::kernels {

// Every kernel distributes independent output rows across threads and keeps
// the per-row accumulation order fixed, so serial and parallel execution
// produce bitwise-identical results.
enum class Exec { kSerial, kParallel };

// Normalized sinc, sin(pi x) / (pi x) with sinc(0) = 1.
double sinc(double x);

// Spatial correlation of an element grid: R(m, l) = sinc(2 d(m, l) / lambda).
void sinc_correlation(const std::vector<Eigen::Vector3d>& offsets_m,
                      double wavelength_m, Eigen::MatrixXd& corr, Exec exec);

// Deterministic line-of-sight block: H(i, j) = amplitude * exp(-j 2 pi d / λ)
// between transmit antenna i and receive element j.
void los_phase_matrix(const std::vector<Eigen::Vector3d>& tx_positions_m,
                      const std::vector<Eigen::Vector3d>& rx_positions_m,
                      double wavelength_m, double amplitude,
                      Eigen::Ref<Eigen::MatrixXcd> block, Exec exec);

// y = A x for real A and complex x.
void real_matvec(const Eigen::MatrixXd& a, const Eigen::VectorXcd& x,
                 Eigen::VectorXcd& y, Exec exec);

// y = A x for complex A and x.
void cmatvec(const Eigen::MatrixXcd& a, const Eigen::VectorXcd& x,
             Eigen::VectorXcd& y, Exec exec);

// Composite channels for all users: column k is direct_k + H (ris_user_k ∘ v).
void effective_channels(const Eigen::MatrixXcd& direct,
                        const Eigen::MatrixXcd& ap_to_ris,
                        const Eigen::MatrixXcd& ris_to_user,
                        const Eigen::VectorXcd& phase_vector,
                        Eigen::MatrixXcd& out, Exec exec);

// SINR of every user for effective channels heff and beamformers w.
void sinr_all(const Eigen::MatrixXcd& heff, const Eigen::MatrixXcd& w,
              double noise_power_w, Eigen::VectorXd& out, Exec exec);

}  // namespace risres::kernels
