// Times every kernel serial vs OpenMP-parallel on simulator-sized inputs and
// checks that the two paths agree bitwise (the per-row reduction order is
// fixed by construction, so any difference is a bug, not roundoff).

#include <omp.h>

#include <Eigen/Dense>
#include <cstdio>
#include <cstring>
#include <vector>

#include "risres/kernels.hpp"
#include "risres/rng.hpp"

namespace {

using risres::Rng;
using risres::kernels::Exec;

template <typename F>
double best_of_ms(int reps, F&& body) {
  double best = 1e300;
  for (int i = 0; i < reps; ++i) {
    const double t0 = omp_get_wtime();
    body();
    const double dt = omp_get_wtime() - t0;
    if (dt < best) best = dt;
  }
  return best * 1e3;
}

Eigen::MatrixXcd random_cmatrix(Rng& rng, Eigen::Index rows,
                                Eigen::Index cols) {
  Eigen::MatrixXcd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.cgaussian();
  }
  return m;
}

Eigen::MatrixXd random_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.gaussian();
  }
  return m;
}

Eigen::VectorXcd random_cvector(Rng& rng, Eigen::Index n) {
  Eigen::VectorXcd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = rng.cgaussian();
  return v;
}

struct Row {
  const char* name;
  double serial_ms;
  double parallel_ms;
  bool identical;
};

template <typename Out, typename F>
Row bench(const char* name, int reps, Out& serial_out, Out& parallel_out,
          F&& run) {
  run(serial_out, Exec::kSerial);  // warm-up and allocation
  run(parallel_out, Exec::kParallel);
  const double serial_ms =
      best_of_ms(reps, [&] { run(serial_out, Exec::kSerial); });
  const double parallel_ms =
      best_of_ms(reps, [&] { run(parallel_out, Exec::kParallel); });
  const bool same =
      serial_out.size() == parallel_out.size() &&
      std::memcmp(serial_out.data(), parallel_out.data(),
                  sizeof(typename Out::Scalar) *
                      static_cast<std::size_t>(serial_out.size())) == 0;
  return {name, serial_ms, parallel_ms, same};
}

}  // namespace

int main() {
  Rng rng(7);
  constexpr int kReps = 5;
  constexpr Eigen::Index kRis = 1024;      // RIS elements (32 x 32 grid)
  constexpr Eigen::Index kAntennas = 64;   // total AP antennas
  constexpr Eigen::Index kUsers = 64;      // inflated to give sinr_all work

  std::vector<Eigen::Vector3d> offsets;
  for (Eigen::Index m = 0; m < kRis; ++m) {
    offsets.emplace_back(0.025 * static_cast<double>(m % 32),
                         0.025 * static_cast<double>(m / 32), 0.0);
  }
  std::vector<Eigen::Vector3d> tx_positions;
  for (Eigen::Index i = 0; i < kAntennas; ++i) {
    tx_positions.emplace_back(100.0 + 0.05 * static_cast<double>(i), -40.0,
                              10.0);
  }
  std::vector<Eigen::Vector3d> rx_positions;
  for (const auto& off : offsets) {
    rx_positions.push_back(Eigen::Vector3d(0.0, 0.0, 5.0) + off);
  }

  const Eigen::MatrixXd real_a = random_matrix(rng, kRis, kRis);
  const Eigen::MatrixXcd cplx_a = random_cmatrix(rng, kRis, kRis);
  const Eigen::VectorXcd x = random_cvector(rng, kRis);
  const Eigen::MatrixXcd direct = random_cmatrix(rng, kAntennas, kUsers);
  const Eigen::MatrixXcd ap_to_ris = random_cmatrix(rng, kAntennas, kRis);
  const Eigen::MatrixXcd ris_to_user = random_cmatrix(rng, kRis, kUsers);
  const Eigen::VectorXcd phases = random_cvector(rng, kRis);
  const Eigen::MatrixXcd heff = random_cmatrix(rng, kAntennas, kUsers);
  const Eigen::MatrixXcd w = random_cmatrix(rng, kAntennas, kUsers);

  std::vector<Row> rows;

  {
    Eigen::MatrixXd a, b;
    rows.push_back(bench("sinc_correlation", kReps, a, b,
                         [&](Eigen::MatrixXd& out, Exec exec) {
                           risres::kernels::sinc_correlation(offsets, 0.1, out,
                                                             exec);
                         }));
  }
  {
    Eigen::MatrixXcd a(kAntennas, kRis), b(kAntennas, kRis);
    rows.push_back(bench("los_phase_matrix", kReps, a, b,
                         [&](Eigen::MatrixXcd& out, Exec exec) {
                           risres::kernels::los_phase_matrix(
                               tx_positions, rx_positions, 0.1, 1e-3, out,
                               exec);
                         }));
  }
  {
    Eigen::VectorXcd a, b;
    rows.push_back(bench("real_matvec", kReps, a, b,
                         [&](Eigen::VectorXcd& out, Exec exec) {
                           risres::kernels::real_matvec(real_a, x, out, exec);
                         }));
  }
  {
    Eigen::VectorXcd a, b;
    rows.push_back(bench("cmatvec", kReps, a, b,
                         [&](Eigen::VectorXcd& out, Exec exec) {
                           risres::kernels::cmatvec(cplx_a, x, out, exec);
                         }));
  }
  {
    Eigen::MatrixXcd a, b;
    rows.push_back(bench("effective_channels", kReps, a, b,
                         [&](Eigen::MatrixXcd& out, Exec exec) {
                           risres::kernels::effective_channels(
                               direct, ap_to_ris, ris_to_user, phases, out,
                               exec);
                         }));
  }
  {
    Eigen::VectorXd a, b;
    rows.push_back(bench("sinr_all", kReps, a, b,
                         [&](Eigen::VectorXd& out, Exec exec) {
                           risres::kernels::sinr_all(heff, w, 1e-13, out,
                                                     exec);
                         }));
  }

  std::printf("threads: %d, best of %d runs\n\n", omp_get_max_threads(),
              kReps);
  std::printf("%-20s %12s %12s %9s %9s\n", "kernel", "serial_ms",
              "parallel_ms", "speedup", "bitwise");
  bool all_same = true;
  for (const auto& row : rows) {
    const double speedup =
        row.parallel_ms > 0.0 ? row.serial_ms / row.parallel_ms : 0.0;
    std::printf("%-20s %12.3f %12.3f %8.2fx %9s\n", row.name, row.serial_ms,
                row.parallel_ms, speedup, row.identical ? "ok" : "MISMATCH");
    all_same = all_same && row.identical;
  }
  return all_same ? 0 : 1;
}
