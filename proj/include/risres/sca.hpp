#pragma once

#include <Eigen/Dense>
#include <complex>
#include <optional>
#include <vector>

#include "risres/channel.hpp"
#include "risres/config.hpp"
#include "risres/conic.hpp"
#include "risres/rng.hpp"

namespace risres::sca {

// Expansion point shared by the two subproblems. Rates and targets are kept
// normalized by the bandwidth; the phase vector is unit modulus.
struct Iterate {
  Eigen::MatrixXcd beamformers;   // (N*L) x K
  Eigen::VectorXcd phase_vector;  // M
  Eigen::VectorXd rates_norm;     // K, rate / bandwidth (may be negative)
  Eigen::VectorXd sinr;           // K, strictly positive
  Eigen::VectorXd dispersion_ub;  // K, >= sqrt(V(sinr))
};

enum class SubproblemKind { kBeamforming, kPhase };

struct StepRecord {
  int step = 0;  // z, 1-based count of completed subproblem solves
  SubproblemKind kind = SubproblemKind::kBeamforming;
  double psi = 0.0;  // adaptation gap after the step
  conic::SolveStatus status = conic::SolveStatus::kOptimal;
  double model_time_s = 0.0;  // cumulative T = z * T_calc
};

struct AlternationTrace {
  std::vector<StepRecord> steps;
  Iterate final;
  double final_psi = 0.0;
  bool converged = false;
  int convergence_step = -1;  // z* when the detector fired
  bool solver_trouble = false;
};

struct AlternateOptions {
  double time_budget_s = 1.0;   // T_c
  double step_time_s = 0.01;    // T_calc
  // Duality-gap target for each subproblem solve. The alternation relinearizes
  // around every new iterate, so subproblem accuracy only has to sit below the
  // model error of that linearization; demanding much more than this forces
  // the barrier parameter into ranges where large programs (hundreds of cones)
  // can no longer be centered in double precision.
  double solver_tol = 1e-6;
  bool stop_on_convergence = true;
  double conv_rel_tol = 1e-3;   // relative improvement threshold
  int conv_window = 3;          // consecutive low-improvement steps
  // Overrides the dispersion slope Omega/sqrt(eta) used by both subproblems
  // (0 makes the finite-blocklength pipeline coincide with the asymptotic
  // one exactly). Regime-derived when unset.
  std::optional<double> omega_override;
};

// Tangent of sqrt(V(q)) at q_tilde (concave, so the tangent upper-bounds it).
struct DispersionTangent {
  double q_tilde = 0.0;
  double value = 0.0;  // sqrt(V(q_tilde))
  double slope = 0.0;

  [[nodiscard]] double at(double q) const {
    return value + slope * (q - q_tilde);
  }
};

// Throws std::domain_error for q_tilde <= 0.
DispersionTangent linearize_dispersion(double q_tilde);

// Complex-valued affine function of a complex vector: offset + coef^T z.
struct ComplexAffine {
  Eigen::VectorXcd coef;
  std::complex<double> offset{0.0, 0.0};

  [[nodiscard]] std::complex<double> eval(const Eigen::VectorXcd& z) const {
    std::complex<double> acc = offset;
    for (Eigen::Index i = 0; i < coef.size(); ++i) acc += coef(i) * z(i);
    return acc;
  }
};

// First-order inner approximation of one user's SINR constraint around the
// expansion point: the quadratic-over-linear signal term is replaced by its
// tangent, interference stays exact. residual(z, q) >= 0 is the convexified
// constraint; any (z, q) satisfying it has true SINR >= q.
struct SinrLinearization {
  ComplexAffine signal;                    // user's own link, linear in z
  std::vector<ComplexAffine> interference; // one per other user
  std::complex<double> signal_at_expansion;
  double exact_sinr_at_expansion = 0.0;
  double q_tilde = 0.0;

  [[nodiscard]] double residual(const Eigen::VectorXcd& z, double q) const;
  // True SINR of the exact (non-linearized) model at z.
  [[nodiscard]] double exact_sinr(const Eigen::VectorXcd& z) const;
};

// Beamforming step: z is the stacked beamformer vector (users column-major,
// N*L entries each), RIS phases held at the expansion point.
SinrLinearization linearize_sinr_beamforming(const Iterate& it,
                                             const ChannelSet& channels,
                                             const SystemConfig& config,
                                             std::size_t user);

// Phase step: z is the RIS phase vector, beamformers held fixed.
SinrLinearization linearize_sinr_phase(const Iterate& it,
                                       const ChannelSet& channels,
                                       const SystemConfig& config,
                                       std::size_t user);

// Linear part of the unit-modulus penalty: coefficient 2 * alpha * v_tilde_m
// on element m (real/imag interleaved on lifting), constant term
// -alpha * sum |v_tilde_m|^2.
struct ModulusPenalty {
  Eigen::VectorXcd coef;  // 2 * alpha * v_tilde
  double constant = 0.0;

  [[nodiscard]] double eval(const Eigen::VectorXcd& v) const;
};

ModulusPenalty unit_modulus_penalty(const Eigen::VectorXcd& v_tilde,
                                    double alpha);

// Variable layout of a built subproblem.
struct SubproblemRefs {
  int z_base = 0;  // first real index of the complex decision block
  int z_count = 0; // complex entries (N*L*K beamformers or M phases)
  int r_base = 0;
  int q_base = 0;
  int u_base = 0;
  int s_base = 0;
  std::vector<int> t_idx;
};

struct BuiltSubproblem {
  conic::ConicProgram program;
  SubproblemRefs refs;
  SubproblemKind kind = SubproblemKind::kBeamforming;
};

BuiltSubproblem build_beamforming_subproblem(const Iterate& it,
                                             const ChannelSet& channels,
                                             const SystemConfig& config,
                                             Regime regime);
BuiltSubproblem build_beamforming_subproblem(const Iterate& it,
                                             const ChannelSet& channels,
                                             const SystemConfig& config,
                                             double omega_over_sqrt_eta);

BuiltSubproblem build_phase_subproblem(const Iterate& it,
                                       const ChannelSet& channels,
                                       const SystemConfig& config,
                                       Regime regime);
BuiltSubproblem build_phase_subproblem(const Iterate& it,
                                       const ChannelSet& channels,
                                       const SystemConfig& config,
                                       double omega_over_sqrt_eta);

// Element-wise v / |v| (zero entries map to 1).
Eigen::VectorXcd project_unit_modulus(const Eigen::VectorXcd& v);

// Matched-filter beamformers within the power budget plus random RIS phases.
Iterate initialize_iterate(const ChannelSet& channels,
                           const SystemConfig& config, Rng& rng);

// Expansion point from an existing operating point (used for warm starts on
// a changed channel).
Iterate iterate_from_state(const ChannelSet& channels,
                           const SystemConfig& config,
                           const Eigen::MatrixXcd& beamformers,
                           const Eigen::VectorXcd& phase_vector);

// Adaptation gap of an iterate against the configured targets.
double iterate_psi(const Iterate& it, const SystemConfig& config);

// One-subproblem-at-a-time alternation between the beamforming and phase
// steps, starting with beamforming. Each step advances model time by
// step_time_s; the loop stops when the next step would exceed time_budget_s,
// when the convergence detector fires, or when a subproblem fails.
AlternationTrace alternate(const ChannelSet& channels,
                           const SystemConfig& config, Regime regime,
                           const Iterate& start, const AlternateOptions& opts);

}  // namespace risres::sca
