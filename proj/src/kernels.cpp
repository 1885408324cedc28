#include "risres/kernels.hpp"

#include <cmath>
#include <complex>
#include <numbers>

namespace risres::kernels {

namespace {

// Runs fn(i) for i in [0, n), either serially or under OpenMP. fn must write
// only state owned by iteration i.
template <typename Fn>
void for_each_index(std::ptrdiff_t n, Exec exec, const Fn& fn) {
  if (exec == Exec::kParallel) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) fn(i);
  } else {
    for (std::ptrdiff_t i = 0; i < n; ++i) fn(i);
  }
}

}  // namespace

double sinc(double x) {
  if (x == 0.0) return 1.0;
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

void sinc_correlation(const std::vector<Eigen::Vector3d>& offsets_m,
                      double wavelength_m, Eigen::MatrixXd& corr, Exec exec) {
  const auto m_total = static_cast<std::ptrdiff_t>(offsets_m.size());
  corr.resize(m_total, m_total);
  for_each_index(m_total, exec, [&](std::ptrdiff_t m) {
    for (std::ptrdiff_t l = 0; l < m_total; ++l) {
      const double dist = (offsets_m[m] - offsets_m[l]).norm();
      corr(m, l) = sinc(2.0 * dist / wavelength_m);
    }
  });
}

void los_phase_matrix(const std::vector<Eigen::Vector3d>& tx_positions_m,
                      const std::vector<Eigen::Vector3d>& rx_positions_m,
                      double wavelength_m, double amplitude,
                      Eigen::Ref<Eigen::MatrixXcd> block, Exec exec) {
  const auto rows = static_cast<std::ptrdiff_t>(tx_positions_m.size());
  const auto cols = static_cast<std::ptrdiff_t>(rx_positions_m.size());
  for_each_index(rows, exec, [&](std::ptrdiff_t i) {
    for (std::ptrdiff_t j = 0; j < cols; ++j) {
      const double dist = (tx_positions_m[i] - rx_positions_m[j]).norm();
      const double phase = -2.0 * std::numbers::pi * dist / wavelength_m;
      block(i, j) = amplitude *
                    std::complex<double>(std::cos(phase), std::sin(phase));
    }
  });
}

void real_matvec(const Eigen::MatrixXd& a, const Eigen::VectorXcd& x,
                 Eigen::VectorXcd& y, Exec exec) {
  const std::ptrdiff_t rows = a.rows();
  y.resize(rows);
  for_each_index(rows, exec, [&](std::ptrdiff_t i) {
    std::complex<double> acc{0.0, 0.0};
    for (std::ptrdiff_t j = 0; j < a.cols(); ++j) acc += a(i, j) * x(j);
    y(i) = acc;
  });
}

void cmatvec(const Eigen::MatrixXcd& a, const Eigen::VectorXcd& x,
             Eigen::VectorXcd& y, Exec exec) {
  const std::ptrdiff_t rows = a.rows();
  y.resize(rows);
  for_each_index(rows, exec, [&](std::ptrdiff_t i) {
    std::complex<double> acc{0.0, 0.0};
    for (std::ptrdiff_t j = 0; j < a.cols(); ++j) acc += a(i, j) * x(j);
    y(i) = acc;
  });
}

void effective_channels(const Eigen::MatrixXcd& direct,
                        const Eigen::MatrixXcd& ap_to_ris,
                        const Eigen::MatrixXcd& ris_to_user,
                        const Eigen::VectorXcd& phase_vector,
                        Eigen::MatrixXcd& out, Exec exec) {
  const std::ptrdiff_t dims = direct.rows();
  const std::ptrdiff_t n_users = direct.cols();
  const std::ptrdiff_t m_total = ap_to_ris.cols();
  out.resize(dims, n_users);
  // Rows are independent; each thread owns a slice of antenna indices.
  for_each_index(dims, exec, [&](std::ptrdiff_t i) {
    for (std::ptrdiff_t k = 0; k < n_users; ++k) {
      std::complex<double> acc = direct(i, k);
      for (std::ptrdiff_t m = 0; m < m_total; ++m) {
        acc += ap_to_ris(i, m) * (ris_to_user(m, k) * phase_vector(m));
      }
      out(i, k) = acc;
    }
  });
}

void sinr_all(const Eigen::MatrixXcd& heff, const Eigen::MatrixXcd& w,
              double noise_power_w, Eigen::VectorXd& out, Exec exec) {
  const std::ptrdiff_t dims = heff.rows();
  const std::ptrdiff_t n_users = heff.cols();
  out.resize(n_users);
  for_each_index(n_users, exec, [&](std::ptrdiff_t k) {
    double signal = 0.0;
    double interference = 0.0;
    for (std::ptrdiff_t i = 0; i < w.cols(); ++i) {
      std::complex<double> dot{0.0, 0.0};
      for (std::ptrdiff_t d = 0; d < dims; ++d) {
        dot += std::conj(heff(d, k)) * w(d, i);
      }
      const double power = std::norm(dot);
      if (i == k) {
        signal = power;
      } else {
        interference += power;
      }
    }
    out(k) = signal / (interference + noise_power_w);
  });
}

}  // namespace risres::kernels
