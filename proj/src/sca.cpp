#include "risres/sca.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

#include "risres/fbl.hpp"
#include "risres/metrics.hpp"

namespace risres::sca {
namespace {

// Expansion SINRs at or below the floor are treated as a dead link: the
// tangent of the quadratic-over-linear signal term is only meaningful when
// the expansion SINR is attainable, so the user's SINR is boxed at its
// current value instead.
constexpr double kSinrFloor = 1e-6;
// Relative gap kept between the expansion SINR and the exact SINR so the
// expansion point stays strictly inside its own linearized constraint.
constexpr double kSinrBackoff = 1e-9;
// Box on the unused dispersion variables when the slope is zero; without it
// they have no upper pressure and the barrier has no minimizer.
constexpr double kIdleDispersionBox = 2.0;

double omega_for(const SystemConfig& config, Regime regime) {
  if (regime == Regime::kIbl) return 0.0;
  return config.fbl().omega_over_sqrt_eta();
}

Eigen::VectorXd normalized_targets(const SystemConfig& config) {
  Eigen::VectorXd t(config.rate_targets_bps.size());
  for (Eigen::Index k = 0; k < t.size(); ++k) {
    t(k) = config.rate_targets_bps[static_cast<std::size_t>(k)] /
           config.bandwidth_hz;
  }
  return t;
}

// dst += scale * src.
void axpy(conic::AffineExpr& dst, const conic::AffineExpr& src, double scale) {
  dst.offset += scale * src.offset;
  for (std::size_t i = 0; i < src.index.size(); ++i) {
    dst.add(src.index[i], scale * src.coef[i]);
  }
}

// Real and imaginary parts of a complex affine map as expressions over the
// lifted (re, im) variable pairs starting at `base`. Exact-zero coefficients
// are skipped so block supports stay tight.
conic::AffineExpr real_part(const ComplexAffine& f, int base) {
  conic::AffineExpr e(f.offset.real());
  for (Eigen::Index j = 0; j < f.coef.size(); ++j) {
    const double cr = f.coef(j).real();
    const double ci = f.coef(j).imag();
    if (cr != 0.0) e.add(base + 2 * static_cast<int>(j), cr);
    if (ci != 0.0) e.add(base + 2 * static_cast<int>(j) + 1, -ci);
  }
  return e;
}

conic::AffineExpr imag_part(const ComplexAffine& f, int base) {
  conic::AffineExpr e(f.offset.imag());
  for (Eigen::Index j = 0; j < f.coef.size(); ++j) {
    const double cr = f.coef(j).real();
    const double ci = f.coef(j).imag();
    if (ci != 0.0) e.add(base + 2 * static_cast<int>(j), ci);
    if (cr != 0.0) e.add(base + 2 * static_cast<int>(j) + 1, cr);
  }
  return e;
}

// Convexified SINR constraint of one user as a second-order cone:
// interference power + noise <= tangent of |signal|^2 / q. The normalized
// noise (= 1) is folded into the affine bound.
void add_sinr_block(conic::ConicProgram& prog, const SinrLinearization& lin,
                    int z_base, int q_index) {
  const double q_tilde = lin.q_tilde;
  const double sig2 = std::norm(lin.signal_at_expansion);
  // The tangent only contains its own expansion point when the expansion
  // SINR is attainable there (q_tilde <= exact SINR). When the floor lifted
  // q_tilde above the exact value — an effectively dead link — fall back to
  // boxing the SINR variable at the expansion value.
  if (sig2 <= 0.0 || lin.exact_sinr_at_expansion < q_tilde * (1.0 - 1e-6)) {
    conic::AffineExpr box;  // q <= q_tilde
    box.add(q_index, 1.0);
    box.offset = -q_tilde;
    prog.add_inequality(box);
    return;
  }

  conic::AffineExpr beta(-1.0);  // tangent minus normalized noise
  const conic::AffineExpr re_sig = real_part(lin.signal, z_base);
  const conic::AffineExpr im_sig = imag_part(lin.signal, z_base);
  axpy(beta, re_sig, 2.0 * lin.signal_at_expansion.real() / q_tilde);
  axpy(beta, im_sig, 2.0 * lin.signal_at_expansion.imag() / q_tilde);
  beta.add(q_index, -sig2 / (q_tilde * q_tilde));

  conic::SecondOrderCone cone;
  for (const ComplexAffine& interf : lin.interference) {
    conic::AffineExpr re2;
    axpy(re2, real_part(interf, z_base), 2.0);
    conic::AffineExpr im2;
    axpy(im2, imag_part(interf, z_base), 2.0);
    cone.norm_args.push_back(std::move(re2));
    cone.norm_args.push_back(std::move(im2));
  }
  conic::AffineExpr last(1.0);
  axpy(last, beta, -1.0);
  cone.norm_args.push_back(std::move(last));
  conic::AffineExpr bound(1.0);
  axpy(bound, beta, 1.0);
  cone.bound = std::move(bound);
  prog.add_soc(std::move(cone));
}

BuiltSubproblem build_impl(SubproblemKind kind, const Iterate& it,
                           const ChannelSet& channels,
                           const SystemConfig& config,
                           double omega_over_sqrt_eta) {
  if (omega_over_sqrt_eta < 0.0) {
    throw std::invalid_argument("dispersion slope must be nonnegative");
  }
  const int K = static_cast<int>(channels.n_users);
  const int nl = static_cast<int>(channels.dims());
  const Eigen::VectorXd rdes = normalized_targets(config);

  BuiltSubproblem built;
  built.kind = kind;
  conic::ConicProgram& prog = built.program;
  SubproblemRefs& refs = built.refs;

  refs.z_count = kind == SubproblemKind::kBeamforming
                     ? nl * K
                     : static_cast<int>(channels.n_ris_elements);
  refs.z_base = prog.add_complex_vector(
      kind == SubproblemKind::kBeamforming ? "w" : "v", refs.z_count);
  auto add_group = [&prog, K](const char* stem) {
    int base = -1;
    for (int k = 0; k < K; ++k) {
      const int idx =
          prog.add_variable(std::string(stem) + "[" + std::to_string(k) + "]");
      if (k == 0) base = idx;
    }
    return base;
  };
  refs.r_base = add_group("r");
  refs.q_base = add_group("q");
  refs.u_base = add_group("u");
  refs.s_base = add_group("s");

  conic::AffineExpr objective;
  for (int k = 0; k < K; ++k) {
    const std::size_t uk = static_cast<std::size_t>(k);
    const int r = refs.r_base + k;
    const int q = refs.q_base + k;
    const int u = refs.u_base + k;
    const int s = refs.s_base + k;

    const SinrLinearization lin =
        kind == SubproblemKind::kBeamforming
            ? linearize_sinr_beamforming(it, channels, config, uk)
            : linearize_sinr_phase(it, channels, config, uk);
    add_sinr_block(prog, lin, refs.z_base, q);

    prog.add_lower_bound(q, 0.0);
    prog.add_lower_bound(u, 0.0);
    if (omega_over_sqrt_eta > 0.0) {
      const DispersionTangent tan = linearize_dispersion(it.sinr(k));
      conic::AffineExpr disp(tan.value - tan.slope * tan.q_tilde);
      disp.add(q, tan.slope);
      disp.add(u, -1.0);
      prog.add_inequality(disp);  // tangent upper bound of sqrt(V) <= u
    } else {
      prog.add_upper_bound(u, kIdleDispersionBox);
    }
    refs.t_idx.push_back(
        conic::log_rate_epigraph(prog, q, r, u, 1.0, omega_over_sqrt_eta));

    // |r / r_des - 1| <= s epigraph.
    conic::AffineExpr over(-1.0);
    over.add(r, 1.0 / rdes(k)).add(s, -1.0);
    prog.add_inequality(over);
    conic::AffineExpr under(1.0);
    under.add(r, -1.0 / rdes(k)).add(s, -1.0);
    prog.add_inequality(under);

    objective.add(s, 1.0);
  }

  if (kind == SubproblemKind::kBeamforming) {
    // Per-AP transmit power ||w(ap rows, :)||_F <= sqrt(P).
    const int n_aps = static_cast<int>(channels.n_aps);
    const int L = static_cast<int>(channels.antennas_per_ap);
    const double cap = std::sqrt(config.max_tx_power_w);
    for (int ap = 0; ap < n_aps; ++ap) {
      conic::SecondOrderCone cone;
      for (int k = 0; k < K; ++k) {
        for (int d = 0; d < L; ++d) {
          const int slot = refs.z_base + 2 * (k * nl + ap * L + d);
          cone.norm_args.push_back(conic::AffineExpr().add(slot, 1.0));
          cone.norm_args.push_back(conic::AffineExpr().add(slot + 1, 1.0));
        }
      }
      cone.bound = conic::AffineExpr(cap);
      prog.add_soc(std::move(cone));
    }
  } else {
    // Unit disks |v_m| <= 1 plus the linearized unit-modulus penalty, whose
    // sign makes the objective pull each v_m toward its expansion phase.
    const ModulusPenalty pen =
        unit_modulus_penalty(it.phase_vector, config.penalty_weight);
    for (int m = 0; m < refs.z_count; ++m) {
      conic::SecondOrderCone disk;
      disk.norm_args.push_back(
          conic::AffineExpr().add(refs.z_base + 2 * m, 1.0));
      disk.norm_args.push_back(
          conic::AffineExpr().add(refs.z_base + 2 * m + 1, 1.0));
      disk.bound = conic::AffineExpr(1.0);
      prog.add_soc(std::move(disk));
      objective.add(refs.z_base + 2 * m, -pen.coef(m).real());
      objective.add(refs.z_base + 2 * m + 1, -pen.coef(m).imag());
    }
    objective.offset -= pen.constant;
  }

  prog.set_objective(std::move(objective));
  return built;
}

// Strictly interior warm start assembled from the expansion point. Margins
// are kept tiny; if any block still ends up non-interior the solver falls
// back to its own phase-I, so this only affects speed, not correctness.
Eigen::VectorXd interior_start(const BuiltSubproblem& built, const Iterate& it,
                               const SystemConfig& config,
                               double omega_over_sqrt_eta) {
  constexpr double kShrinkZ = 1e-6;
  constexpr double kShrinkQ = 1e-4;
  constexpr double kPad = 1e-9;
  const Eigen::VectorXd rdes = normalized_targets(config);
  const SubproblemRefs& refs = built.refs;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(built.program.num_vars());

  const Eigen::VectorXcd z =
      built.kind == SubproblemKind::kBeamforming
          ? Eigen::VectorXcd(Eigen::Map<const Eigen::VectorXcd>(
                it.beamformers.data(), it.beamformers.size()))
          : it.phase_vector;
  for (int j = 0; j < refs.z_count; ++j) {
    const std::complex<double> zj = z(j) * (1.0 - kShrinkZ);
    x(refs.z_base + 2 * j) = zj.real();
    x(refs.z_base + 2 * j + 1) = zj.imag();
  }

  const int K = static_cast<int>(it.sinr.size());
  for (int k = 0; k < K; ++k) {
    const double q = it.sinr(k) * (1.0 - kShrinkQ);
    const double u = omega_over_sqrt_eta > 0.0 ? it.dispersion_ub(k) + kPad
                                               : 0.5 * kIdleDispersionBox;
    const double t = std::log1p(q) - kPad * std::max(1.0, std::log1p(q));
    const double rate_cap = t * kLog2E - omega_over_sqrt_eta * u;
    const double r = std::min(it.rates_norm(k), rate_cap) - kPad;
    const double s = std::abs(r / rdes(k) - 1.0) + kPad;
    x(refs.r_base + k) = r;
    x(refs.q_base + k) = q;
    x(refs.u_base + k) = u;
    x(refs.s_base + k) = s;
    x(refs.t_idx[static_cast<std::size_t>(k)]) = t;
  }
  return x;
}

// Re-anchors the expansion data on the (possibly just updated) operating
// point: the SINR backs off below the exact value so the next linearization
// contains its own expansion point, the dispersion bound stays an upper
// bound, and the allocated rate is clipped to the achievable epigraph value.
void repair_iterate(Iterate& it, const ChannelSet& channels,
                    const SystemConfig& config, double omega_over_sqrt_eta) {
  const Eigen::VectorXd gamma = sinr_all(channels, it.beamformers,
                                         it.phase_vector,
                                         config.noise_power_w);
  for (Eigen::Index k = 0; k < gamma.size(); ++k) {
    const double q_eff =
        std::min(it.sinr(k), gamma(k) * (1.0 - kSinrBackoff));
    const double q = std::max(q_eff, kSinrFloor);
    const double disp = linearize_dispersion(q).value;
    const double u = omega_over_sqrt_eta > 0.0
                         ? std::max(it.dispersion_ub(k), disp)
                         : disp;
    const double cap = std::log1p(q) * kLog2E - omega_over_sqrt_eta * u;
    it.sinr(k) = q;
    it.dispersion_ub(k) = u;
    it.rates_norm(k) = std::min(it.rates_norm(k), cap);
  }
}

void extract_solution(Iterate& it, const BuiltSubproblem& built,
                      const Eigen::VectorXd& x) {
  const SubproblemRefs& refs = built.refs;
  Eigen::VectorXcd z(refs.z_count);
  for (int j = 0; j < refs.z_count; ++j) {
    z(j) = {x(refs.z_base + 2 * j), x(refs.z_base + 2 * j + 1)};
  }
  if (built.kind == SubproblemKind::kBeamforming) {
    it.beamformers =
        Eigen::Map<const Eigen::MatrixXcd>(z.data(), it.beamformers.rows(),
                                           it.beamformers.cols());
  } else {
    it.phase_vector = project_unit_modulus(z);
  }
  const int K = static_cast<int>(it.sinr.size());
  for (int k = 0; k < K; ++k) {
    it.rates_norm(k) = x(refs.r_base + k);
    it.sinr(k) = x(refs.q_base + k);
    it.dispersion_ub(k) = x(refs.u_base + k);
  }
}

}  // namespace

DispersionTangent linearize_dispersion(double q_tilde) {
  if (!(q_tilde > 0.0)) {
    throw std::domain_error("dispersion tangent requires a positive SINR");
  }
  DispersionTangent tan;
  tan.q_tilde = q_tilde;
  tan.value = std::sqrt(dispersion(q_tilde));
  const double inv = 1.0 + q_tilde;
  tan.slope = 1.0 / (inv * inv * inv * tan.value);
  return tan;
}

double SinrLinearization::residual(const Eigen::VectorXcd& z, double q) const {
  const std::complex<double> sig = signal.eval(z);
  const double sig2 = std::norm(signal_at_expansion);
  double acc = 2.0 *
                   (signal_at_expansion.real() * sig.real() +
                    signal_at_expansion.imag() * sig.imag()) /
               q_tilde;
  acc -= sig2 / (q_tilde * q_tilde) * q;
  acc -= 1.0;
  for (const ComplexAffine& f : interference) acc -= std::norm(f.eval(z));
  return acc;
}

double SinrLinearization::exact_sinr(const Eigen::VectorXcd& z) const {
  double denom = 1.0;
  for (const ComplexAffine& f : interference) denom += std::norm(f.eval(z));
  return std::norm(signal.eval(z)) / denom;
}

SinrLinearization linearize_sinr_beamforming(const Iterate& it,
                                             const ChannelSet& channels,
                                             const SystemConfig& config,
                                             std::size_t user) {
  const Eigen::Index nl = static_cast<Eigen::Index>(channels.dims());
  const Eigen::Index K = static_cast<Eigen::Index>(channels.n_users);
  const double sigma = std::sqrt(config.noise_power_w);
  const Eigen::VectorXcd heff =
      effective_channel(channels, it.phase_vector, user) / sigma;

  SinrLinearization lin;
  lin.q_tilde = it.sinr(static_cast<Eigen::Index>(user));
  const auto slice_map = [&](Eigen::Index i) {
    ComplexAffine f;
    f.coef = Eigen::VectorXcd::Zero(nl * K);
    f.coef.segment(i * nl, nl) = heff.conjugate();
    return f;
  };
  lin.signal = slice_map(static_cast<Eigen::Index>(user));
  for (Eigen::Index i = 0; i < K; ++i) {
    if (i == static_cast<Eigen::Index>(user)) continue;
    lin.interference.push_back(slice_map(i));
  }
  const Eigen::Map<const Eigen::VectorXcd> w_stacked(it.beamformers.data(),
                                                     it.beamformers.size());
  lin.signal_at_expansion = lin.signal.eval(w_stacked);
  lin.exact_sinr_at_expansion = lin.exact_sinr(w_stacked);
  return lin;
}

SinrLinearization linearize_sinr_phase(const Iterate& it,
                                       const ChannelSet& channels,
                                       const SystemConfig& config,
                                       std::size_t user) {
  const Eigen::Index K = static_cast<Eigen::Index>(channels.n_users);
  const double sigma = std::sqrt(config.noise_power_w);
  const Eigen::VectorXcd g = channels.ris_to_user.col(
      static_cast<Eigen::Index>(user));
  const Eigen::VectorXcd h =
      channels.direct.col(static_cast<Eigen::Index>(user));

  SinrLinearization lin;
  lin.q_tilde = it.sinr(static_cast<Eigen::Index>(user));
  const auto toward = [&](Eigen::Index i) {
    // b_i(v) = w_i^H h_user / sigma + sum_m (w_i^H H)_m g_m v_m / sigma;
    // |b_i| equals the magnitude of the user's link toward beamformer i.
    const Eigen::VectorXcd w = it.beamformers.col(i);
    ComplexAffine f;
    f.offset = w.dot(h) / sigma;
    const Eigen::RowVectorXcd row = w.adjoint() * channels.ap_to_ris;
    f.coef = (row.transpose().array() * g.array() / sigma).matrix();
    return f;
  };
  lin.signal = toward(static_cast<Eigen::Index>(user));
  for (Eigen::Index i = 0; i < K; ++i) {
    if (i == static_cast<Eigen::Index>(user)) continue;
    lin.interference.push_back(toward(i));
  }
  lin.signal_at_expansion = lin.signal.eval(it.phase_vector);
  lin.exact_sinr_at_expansion = lin.exact_sinr(it.phase_vector);
  return lin;
}

double ModulusPenalty::eval(const Eigen::VectorXcd& v) const {
  double acc = constant;
  for (Eigen::Index m = 0; m < coef.size(); ++m) {
    acc += coef(m).real() * v(m).real() + coef(m).imag() * v(m).imag();
  }
  return acc;
}

ModulusPenalty unit_modulus_penalty(const Eigen::VectorXcd& v_tilde,
                                    double alpha) {
  ModulusPenalty pen;
  pen.coef = 2.0 * alpha * v_tilde;
  pen.constant = -alpha * v_tilde.squaredNorm();
  return pen;
}

BuiltSubproblem build_beamforming_subproblem(const Iterate& it,
                                             const ChannelSet& channels,
                                             const SystemConfig& config,
                                             Regime regime) {
  return build_impl(SubproblemKind::kBeamforming, it, channels, config,
                    omega_for(config, regime));
}

BuiltSubproblem build_beamforming_subproblem(const Iterate& it,
                                             const ChannelSet& channels,
                                             const SystemConfig& config,
                                             double omega_over_sqrt_eta) {
  return build_impl(SubproblemKind::kBeamforming, it, channels, config,
                    omega_over_sqrt_eta);
}

BuiltSubproblem build_phase_subproblem(const Iterate& it,
                                       const ChannelSet& channels,
                                       const SystemConfig& config,
                                       Regime regime) {
  return build_impl(SubproblemKind::kPhase, it, channels, config,
                    omega_for(config, regime));
}

BuiltSubproblem build_phase_subproblem(const Iterate& it,
                                       const ChannelSet& channels,
                                       const SystemConfig& config,
                                       double omega_over_sqrt_eta) {
  return build_impl(SubproblemKind::kPhase, it, channels, config,
                    omega_over_sqrt_eta);
}

Eigen::VectorXcd project_unit_modulus(const Eigen::VectorXcd& v) {
  Eigen::VectorXcd out(v.size());
  for (Eigen::Index m = 0; m < v.size(); ++m) {
    const double mag = std::abs(v(m));
    out(m) = mag > 0.0 ? v(m) / mag : std::complex<double>(1.0, 0.0);
  }
  return out;
}

Iterate initialize_iterate(const ChannelSet& channels,
                           const SystemConfig& config, Rng& rng) {
  const Eigen::Index nl = static_cast<Eigen::Index>(channels.dims());
  const Eigen::Index K = static_cast<Eigen::Index>(channels.n_users);
  const Eigen::Index M = static_cast<Eigen::Index>(channels.n_ris_elements);
  const Eigen::Index L = static_cast<Eigen::Index>(channels.antennas_per_ap);

  Iterate it;
  it.phase_vector.resize(M);
  for (Eigen::Index m = 0; m < M; ++m) {
    it.phase_vector(m) = std::polar(1.0, rng.phase());
  }

  // Matched-filter directions, uniformly scaled so every AP keeps a power
  // margin below the budget.
  it.beamformers = Eigen::MatrixXcd::Zero(nl, K);
  for (Eigen::Index k = 0; k < K; ++k) {
    const Eigen::VectorXcd heff =
        effective_channel(channels, it.phase_vector,
                          static_cast<std::size_t>(k));
    const double norm = heff.norm();
    if (norm > 0.0) it.beamformers.col(k) = heff / norm;
  }
  double worst_ap_power = 0.0;
  for (Eigen::Index ap = 0; ap * L < nl; ++ap) {
    worst_ap_power = std::max(
        worst_ap_power,
        it.beamformers.middleRows(ap * L, L).squaredNorm());
  }
  if (worst_ap_power > 0.0) {
    it.beamformers *= std::sqrt(0.8 * config.max_tx_power_w / worst_ap_power);
  }

  const Eigen::VectorXd gamma = sinr_all(channels, it.beamformers,
                                         it.phase_vector,
                                         config.noise_power_w);
  it.sinr = gamma.cwiseMax(kSinrFloor);
  it.dispersion_ub.resize(K);
  it.rates_norm.resize(K);
  for (Eigen::Index k = 0; k < K; ++k) {
    it.dispersion_ub(k) = linearize_dispersion(it.sinr(k)).value;
    it.rates_norm(k) = std::log1p(it.sinr(k)) * kLog2E;
  }
  return it;
}

Iterate iterate_from_state(const ChannelSet& channels,
                           const SystemConfig& config,
                           const Eigen::MatrixXcd& beamformers,
                           const Eigen::VectorXcd& phase_vector) {
  Iterate it;
  it.beamformers = beamformers;
  it.phase_vector = project_unit_modulus(phase_vector);
  const Eigen::VectorXd gamma = sinr_all(channels, it.beamformers,
                                         it.phase_vector,
                                         config.noise_power_w);
  it.sinr = gamma.cwiseMax(kSinrFloor);
  const Eigen::Index K = it.sinr.size();
  it.dispersion_ub.resize(K);
  it.rates_norm.resize(K);
  for (Eigen::Index k = 0; k < K; ++k) {
    it.dispersion_ub(k) = linearize_dispersion(it.sinr(k)).value;
    it.rates_norm(k) = std::log1p(it.sinr(k)) * kLog2E;
  }
  return it;
}

double iterate_psi(const Iterate& it, const SystemConfig& config) {
  Eigen::VectorXd targets(it.rates_norm.size());
  for (Eigen::Index k = 0; k < targets.size(); ++k) {
    targets(k) = config.rate_targets_bps[static_cast<std::size_t>(k)];
  }
  return metrics::adaptation_gap(it.rates_norm * config.bandwidth_hz, targets);
}

AlternationTrace alternate(const ChannelSet& channels,
                           const SystemConfig& config, Regime regime,
                           const Iterate& start, const AlternateOptions& opts) {
  if (!(opts.step_time_s > 0.0)) {
    throw std::invalid_argument("step time must be positive");
  }
  if (!(opts.time_budget_s >= 0.0)) {
    throw std::invalid_argument("time budget must be nonnegative");
  }
  const double omega = opts.omega_override.value_or(omega_for(config, regime));

  AlternationTrace trace;
  Iterate cur = start;
  repair_iterate(cur, channels, config, omega);
  double psi_prev = iterate_psi(cur, config);
  int below = 0;
  int z = 0;
  double elapsed = 0.0;

  while (elapsed + opts.step_time_s <=
         opts.time_budget_s * (1.0 + 1e-12)) {
    const SubproblemKind kind = (z % 2 == 0) ? SubproblemKind::kBeamforming
                                             : SubproblemKind::kPhase;
    const BuiltSubproblem built =
        kind == SubproblemKind::kBeamforming
            ? build_beamforming_subproblem(cur, channels, config, omega)
            : build_phase_subproblem(cur, channels, config, omega);
    conic::SolveOptions sopts;
    sopts.tol = opts.solver_tol;
    sopts.initial_point = interior_start(built, cur, config, omega);
    const conic::Solution sol = conic::solve(built.program, sopts);

    ++z;
    elapsed += opts.step_time_s;
    StepRecord rec;
    rec.step = z;
    rec.kind = kind;
    rec.status = sol.status;
    rec.model_time_s = elapsed;
    if (sol.status != conic::SolveStatus::kOptimal) {
      trace.solver_trouble = true;
      rec.psi = psi_prev;
      trace.steps.push_back(rec);
      break;
    }
    extract_solution(cur, built, sol.primal);
    repair_iterate(cur, channels, config, omega);
    const double psi = iterate_psi(cur, config);
    rec.psi = psi;
    trace.steps.push_back(rec);

    // Gaps this far below the (normalized) targets are attainment up to
    // roundoff; relative improvement is meaningless noise at that scale.
    constexpr double kPsiRoundoff = 1e-9;
    const double rel = (psi_prev - psi) / std::max(psi_prev, kPsiRoundoff);
    psi_prev = psi;
    if (psi <= kPsiRoundoff || rel < opts.conv_rel_tol) {
      ++below;
      if (below >= opts.conv_window) {
        if (!trace.converged) {
          trace.converged = true;
          trace.convergence_step = z;
        }
        if (opts.stop_on_convergence) break;
      }
    } else {
      below = 0;
    }
  }

  trace.final = std::move(cur);
  trace.final_psi = psi_prev;
  return trace;
}

}  // namespace risres::sca
