#include <Eigen/Dense>
#include <cmath>
#include <complex>

#include "doctest.h"
#include "risres/channel.hpp"
#include "risres/conic.hpp"
#include "risres/fbl.hpp"
#include "risres/rng.hpp"
#include "risres/sca.hpp"
#include "risres/topology.hpp"

using namespace risres;

namespace {

SystemConfig tiny_config() {
  SystemConfig config;
  config.n_aps = 2;
  config.antennas_per_ap = 2;
  config.n_users = 2;
  config.n_ris_elements = 4;
  config.rate_targets_bps.assign(config.n_users, 20e6);
  config.blocklength = 300;
  return config;
}

struct Instance {
  SystemConfig config;
  Topology topo;
  ChannelSet channels;
};

Instance make_instance(std::uint64_t seed) {
  Instance inst;
  inst.config = tiny_config();
  Rng rng(seed);
  inst.topo = generate_topology(inst.config, rng);
  inst.channels = generate_channels(inst.topo, inst.config, rng);
  return inst;
}

Eigen::VectorXcd stack_beamformers(const Eigen::MatrixXcd& w) {
  return Eigen::Map<const Eigen::VectorXcd>(w.data(), w.size());
}

}  // namespace

TEST_CASE("dispersion tangent: tangency and global upper bound") {
  Rng rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const double q_tilde = std::exp(rng.uniform(std::log(1e-3), std::log(1e2)));
    const sca::DispersionTangent tan = sca::linearize_dispersion(q_tilde);
    CHECK(std::abs(tan.value - std::sqrt(dispersion(q_tilde))) <= 1e-12);
    CHECK(std::abs(tan.at(q_tilde) - std::sqrt(dispersion(q_tilde))) <= 1e-12);
    for (double q = 1e-3; q <= 100.0; q *= 1.35) {
      CHECK(tan.at(q) >= std::sqrt(dispersion(q)) - 1e-12);
    }
  }
  CHECK_THROWS_AS(sca::linearize_dispersion(0.0), std::domain_error);
  CHECK_THROWS_AS(sca::linearize_dispersion(-1.0), std::domain_error);
}

TEST_CASE("SINR linearizations: zero residual and consistency at expansion") {
  const Instance inst = make_instance(3);
  Rng rng(4);
  sca::Iterate it = sca::initialize_iterate(inst.channels, inst.config, rng);

  for (std::size_t k = 0; k < inst.config.n_users; ++k) {
    const auto lin_w =
        sca::linearize_sinr_beamforming(it, inst.channels, inst.config, k);
    const Eigen::VectorXcd z_w = stack_beamformers(it.beamformers);
    // The exact SINR of the model at the expansion equals the channel SINR.
    NetworkState state;
    state.beamformers = it.beamformers;
    state.phase_vector = it.phase_vector;
    const double gamma =
        sinr(inst.channels, state, inst.config.noise_power_w, k);
    CHECK(std::abs(lin_w.exact_sinr(z_w) - gamma) <=
          1e-9 * std::max(1.0, gamma));
    CHECK(std::abs(lin_w.exact_sinr_at_expansion - gamma) <=
          1e-9 * std::max(1.0, gamma));
    // Residual vanishes at the expansion point with q = exact SINR.
    CHECK(std::abs(lin_w.residual(z_w, lin_w.exact_sinr_at_expansion)) <=
          1e-9 * std::max(1.0, gamma));

    const auto lin_v =
        sca::linearize_sinr_phase(it, inst.channels, inst.config, k);
    CHECK(std::abs(lin_v.exact_sinr(it.phase_vector) - gamma) <=
          1e-9 * std::max(1.0, gamma));
    CHECK(std::abs(lin_v.residual(it.phase_vector,
                                  lin_v.exact_sinr_at_expansion)) <=
          1e-9 * std::max(1.0, gamma));
  }
}

TEST_CASE("SINR tangent under-estimates the true SINR off-expansion") {
  const Instance inst = make_instance(5);
  Rng rng(6);
  sca::Iterate it = sca::initialize_iterate(inst.channels, inst.config, rng);
  const auto lin =
      sca::linearize_sinr_beamforming(it, inst.channels, inst.config, 0);
  const Eigen::VectorXcd z0 = stack_beamformers(it.beamformers);
  for (int trial = 0; trial < 200; ++trial) {
    Eigen::VectorXcd z = z0;
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      z(i) += 0.3 * std::abs(z0(i)) * rng.cgaussian();
    }
    // Largest q the linearized constraint admits at z.
    const double interf = [&] {
      double acc = 1.0;
      for (const auto& b : lin.interference) acc += std::norm(b.eval(z));
      return acc;
    }();
    const std::complex<double> s = lin.signal.eval(z);
    const double beta0 = 2.0 / lin.q_tilde *
                         (std::conj(lin.signal_at_expansion) * s).real();
    const double slope =
        std::norm(lin.signal_at_expansion) / (lin.q_tilde * lin.q_tilde);
    const double q_max = (beta0 - interf) / slope;
    if (q_max <= 0.0) continue;
    CHECK(lin.residual(z, q_max) <= 1e-7);
    CHECK(q_max <= lin.exact_sinr(z) + 1e-7);
  }
}

TEST_CASE("unit-modulus penalty: affine minorant of the squared norm") {
  Rng rng(7);
  Eigen::VectorXcd v_tilde(5);
  for (Eigen::Index m = 0; m < 5; ++m) v_tilde(m) = rng.cgaussian();
  const double alpha = 2.5;
  const auto pen = sca::unit_modulus_penalty(v_tilde, alpha);
  // At the expansion point the penalty equals alpha * ||v||^2.
  CHECK(std::abs(pen.eval(v_tilde) - alpha * v_tilde.squaredNorm()) <= 1e-12);
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::VectorXcd v(5);
    for (Eigen::Index m = 0; m < 5; ++m) v(m) = rng.cgaussian();
    CHECK(pen.eval(v) <= alpha * v.squaredNorm() + 1e-12);
  }
}

TEST_CASE("unit-modulus projection") {
  Eigen::VectorXcd v(3);
  v << std::complex<double>(3.0, 4.0), std::complex<double>(0.0, -0.5),
      std::complex<double>(0.0, 0.0);
  const Eigen::VectorXcd p = sca::project_unit_modulus(v);
  CHECK(std::abs(std::abs(p(0)) - 1.0) <= 1e-15);
  CHECK(std::abs(p(0) - std::complex<double>(0.6, 0.8)) <= 1e-15);
  CHECK(std::abs(p(1) - std::complex<double>(0.0, -1.0)) <= 1e-15);
  CHECK(p(2) == std::complex<double>(1.0, 0.0));  // zero maps to 1
}

TEST_CASE("initial iterate is feasible for the true model") {
  const Instance inst = make_instance(11);
  Rng rng(12);
  const sca::Iterate it =
      sca::initialize_iterate(inst.channels, inst.config, rng);
  const std::size_t n = inst.config.n_aps;
  const std::size_t l = inst.config.antennas_per_ap;
  // Per-AP power within budget.
  for (std::size_t ap = 0; ap < n; ++ap) {
    const double power = it.beamformers
                             .middleRows(static_cast<Eigen::Index>(ap * l),
                                         static_cast<Eigen::Index>(l))
                             .squaredNorm();
    CHECK(power <= inst.config.max_tx_power_w + 1e-12);
  }
  // Unit-modulus phases.
  for (Eigen::Index m = 0; m < it.phase_vector.size(); ++m) {
    CHECK(std::abs(std::abs(it.phase_vector(m)) - 1.0) <= 1e-12);
  }
  // Expansion SINR does not exceed the truth.
  const Eigen::VectorXd gamma =
      sinr_all(inst.channels, it.beamformers, it.phase_vector,
               inst.config.noise_power_w);
  for (Eigen::Index k = 0; k < gamma.size(); ++k) {
    CHECK(it.sinr(k) <= gamma(k) + 1e-9 * std::max(1.0, gamma(k)));
    CHECK(it.sinr(k) >= 1e-6 - 1e-18);  // expansion floor
    CHECK(it.dispersion_ub(k) >=
          std::sqrt(dispersion(it.sinr(k))) - 1e-12);
  }
}

TEST_CASE("alternation decreases the adaptation gap step by step") {
  const Instance inst = make_instance(13);
  Rng rng(14);
  const sca::Iterate start =
      sca::initialize_iterate(inst.channels, inst.config, rng);
  sca::AlternateOptions opts;
  opts.time_budget_s = 0.12;
  opts.step_time_s = 0.01;
  opts.stop_on_convergence = false;
  const auto trace =
      sca::alternate(inst.channels, inst.config, Regime::kIbl, start, opts);
  REQUIRE(!trace.steps.empty());
  CHECK(!trace.solver_trouble);
  double prev = sca::iterate_psi(start, inst.config);
  for (const auto& rec : trace.steps) {
    CHECK(rec.psi <= prev + 1e-6);
    prev = rec.psi;
  }
  CHECK(trace.final_psi == trace.steps.back().psi);
  // Kinds alternate starting from beamforming.
  CHECK(trace.steps[0].kind == sca::SubproblemKind::kBeamforming);
  if (trace.steps.size() > 1) {
    CHECK(trace.steps[1].kind == sca::SubproblemKind::kPhase);
  }
}

TEST_CASE("silencing the dispersion slope reproduces the asymptotic path") {
  const Instance inst = make_instance(15);
  Rng rng(16);
  const sca::Iterate start =
      sca::initialize_iterate(inst.channels, inst.config, rng);
  sca::AlternateOptions opts;
  opts.time_budget_s = 0.06;
  opts.stop_on_convergence = false;
  const auto ibl =
      sca::alternate(inst.channels, inst.config, Regime::kIbl, start, opts);
  sca::AlternateOptions forced = opts;
  forced.omega_override = 0.0;
  const auto fbl_zero =
      sca::alternate(inst.channels, inst.config, Regime::kFbl, start, forced);
  REQUIRE(ibl.steps.size() == fbl_zero.steps.size());
  for (std::size_t i = 0; i < ibl.steps.size(); ++i) {
    CHECK(std::abs(ibl.steps[i].psi - fbl_zero.steps[i].psi) <= 1e-12);
  }
}

TEST_CASE("iterate round-trips through an operating point") {
  const Instance inst = make_instance(17);
  Rng rng(18);
  const sca::Iterate a =
      sca::initialize_iterate(inst.channels, inst.config, rng);
  const sca::Iterate b = sca::iterate_from_state(
      inst.channels, inst.config, a.beamformers, a.phase_vector);
  CHECK((a.beamformers - b.beamformers).norm() == 0.0);
  CHECK((a.phase_vector - b.phase_vector).norm() <= 1e-12);
  CHECK((a.sinr - b.sinr).norm() <= 1e-9 * std::max(1.0, a.sinr.norm()));
}

TEST_CASE("alternation guards its options") {
  const Instance inst = make_instance(19);
  Rng rng(20);
  const sca::Iterate start =
      sca::initialize_iterate(inst.channels, inst.config, rng);
  sca::AlternateOptions opts;
  opts.step_time_s = 0.0;
  CHECK_THROWS_AS(
      sca::alternate(inst.channels, inst.config, Regime::kIbl, start, opts),
      std::invalid_argument);
  opts.step_time_s = 0.01;
  opts.time_budget_s = -1.0;
  CHECK_THROWS_AS(
      sca::alternate(inst.channels, inst.config, Regime::kIbl, start, opts),
      std::invalid_argument);
  // A budget smaller than one step yields an empty trace.
  opts.time_budget_s = 0.005;
  const auto trace =
      sca::alternate(inst.channels, inst.config, Regime::kIbl, start, opts);
  CHECK(trace.steps.empty());
}
