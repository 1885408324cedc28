#include "risres/conic.hpp"

#include <cmath>
#include <stdexcept>

namespace risres::conic {

int ConicProgram::add_variable(std::string name) {
  variables_.push_back({std::move(name), VarKind::kReal});
  return num_vars() - 1;
}

int ConicProgram::add_complex_vector(const std::string& name, int count) {
  const int base = num_vars();
  for (int j = 0; j < count; ++j) {
    variables_.push_back({name + "[" + std::to_string(j) + "].re",
                          VarKind::kComplexRe});
    variables_.push_back({name + "[" + std::to_string(j) + "].im",
                          VarKind::kComplexIm});
  }
  return base;
}

void ConicProgram::add_lower_bound(int var, double lo) {
  AffineExpr expr(lo);
  expr.add(var, -1.0);  // lo - x <= 0
  add_inequality(std::move(expr));
}

void ConicProgram::add_upper_bound(int var, double hi) {
  AffineExpr expr(-hi);
  expr.add(var, 1.0);  // x - hi <= 0
  add_inequality(std::move(expr));
}

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::kOptimal: return "optimal";
    case SolveStatus::kInfeasible: return "infeasible";
    case SolveStatus::kUnbounded: return "unbounded";
    case SolveStatus::kIterationLimit: return "iteration_limit";
    case SolveStatus::kNumericalFailure: return "numerical_failure";
  }
  return "unknown";
}

double max_violation(const ConicProgram& prog, const Eigen::VectorXd& x) {
  double worst = 0.0;
  for (const auto& eq : prog.equalities()) {
    worst = std::max(worst, std::abs(eq.eval(x)));
  }
  for (const auto& ineq : prog.inequalities()) {
    worst = std::max(worst, ineq.eval(x));
  }
  for (const auto& soc : prog.socs()) {
    double sq = 0.0;
    for (const auto& arg : soc.norm_args) {
      const double v = arg.eval(x);
      sq += v * v;
    }
    worst = std::max(worst, std::sqrt(sq) - soc.bound.eval(x));
  }
  for (const auto& cone : prog.exp_cones()) {
    const double u = cone.x1.eval(x);
    const double v = cone.x2.eval(x);
    const double w = cone.x3.eval(x);
    if (v > 0.0) {
      // v exp(u/v) <= w, evaluated in log space to dodge overflow.
      const double log_lhs = std::log(v) + u / v;
      const double log_cap = 700.0;
      const double lhs = log_lhs < log_cap ? v * std::exp(u / v)
                                           : std::exp(log_cap);
      worst = std::max(worst, lhs - w);
    } else {
      // Closure requires v >= 0, u <= 0, w >= 0.
      worst = std::max({worst, -v, u, -w});
    }
  }
  return worst;
}

int log_rate_epigraph(ConicProgram& prog, int q_index, int r_index,
                      int u_index, double bandwidth,
                      double omega_over_sqrt_eta) {
  if (!(bandwidth > 0.0) || omega_over_sqrt_eta < 0.0) {
    throw std::invalid_argument("log_rate_epigraph: bad rate parameters");
  }
  const int t_index = prog.add_variable("log1p_epi");

  ExpCone cone;
  cone.x1.add(t_index, 1.0);   // t
  cone.x2.offset = 1.0;        // 1
  cone.x3.offset = 1.0;        // 1 + q
  cone.x3.add(q_index, 1.0);
  prog.add_exp_cone(std::move(cone));  // exp(t) <= 1 + q, i.e. t <= ln(1+q)

  constexpr double kLn2 = 0.6931471805599453;
  AffineExpr rate;  // r - bandwidth * (t/ln2 - omega_over_sqrt_eta * u) <= 0
  rate.add(r_index, 1.0);
  rate.add(t_index, -bandwidth / kLn2);
  if (omega_over_sqrt_eta > 0.0) {
    rate.add(u_index, bandwidth * omega_over_sqrt_eta);
  }
  prog.add_inequality(std::move(rate));
  return t_index;
}

Eigen::VectorXd lift_complex(const Eigen::VectorXcd& z) {
  Eigen::VectorXd x(2 * z.size());
  for (Eigen::Index j = 0; j < z.size(); ++j) {
    x(2 * j) = z(j).real();
    x(2 * j + 1) = z(j).imag();
  }
  return x;
}

Eigen::VectorXcd unlift_complex(const Eigen::VectorXd& x) {
  if (x.size() % 2 != 0) {
    throw std::invalid_argument("unlift_complex: odd-length vector");
  }
  Eigen::VectorXcd z(x.size() / 2);
  for (Eigen::Index j = 0; j < z.size(); ++j) {
    z(j) = {x(2 * j), x(2 * j + 1)};
  }
  return z;
}

}  // namespace risres::conic
