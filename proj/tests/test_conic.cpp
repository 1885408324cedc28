#include <Eigen/Dense>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "risres/conic.hpp"
#include "risres/fbl.hpp"
#include "risres/rng.hpp"

using namespace risres::conic;

namespace {

AffineExpr var(int i, double c = 1.0) {
  AffineExpr e;
  e.add(i, c);
  return e;
}

}  // namespace

TEST_CASE("linear program with box bounds") {
  // min x + 2y s.t. x >= 1, y >= 2, x <= 5, y <= 5  ->  (1, 2), value 5.
  ConicProgram prog;
  const int x = prog.add_variable("x");
  const int y = prog.add_variable("y");
  prog.add_lower_bound(x, 1.0);
  prog.add_lower_bound(y, 2.0);
  prog.add_upper_bound(x, 5.0);
  prog.add_upper_bound(y, 5.0);
  AffineExpr obj;
  obj.add(x, 1.0).add(y, 2.0);
  prog.set_objective(obj);
  const Solution sol = solve(prog, 1e-9);
  REQUIRE(sol.status == SolveStatus::kOptimal);
  CHECK(std::abs(sol.primal(x) - 1.0) < 1e-6);
  CHECK(std::abs(sol.primal(y) - 2.0) < 1e-6);
  CHECK(std::abs(sol.objective_value - 5.0) < 1e-6);
  CHECK(sol.max_violation <= 1e-6);
}

TEST_CASE("equality constraints restrict the feasible set") {
  // min x + y s.t. x + y + z = 3, z = 1, x >= 0.25, y >= 0.25 -> 2.
  ConicProgram prog;
  const int x = prog.add_variable("x");
  const int y = prog.add_variable("y");
  const int z = prog.add_variable("z");
  AffineExpr eq1;
  eq1.add(x, 1.0).add(y, 1.0).add(z, 1.0);
  eq1.offset = -3.0;
  prog.add_equality(eq1);
  AffineExpr eq2 = var(z);
  eq2.offset = -1.0;
  prog.add_equality(eq2);
  prog.add_lower_bound(x, 0.25);
  prog.add_lower_bound(y, 0.25);
  AffineExpr obj;
  obj.add(x, 1.0).add(y, 1.0);
  prog.set_objective(obj);
  const Solution sol = solve(prog, 1e-9);
  REQUIRE(sol.status == SolveStatus::kOptimal);
  CHECK(std::abs(sol.objective_value - 2.0) < 1e-6);
  CHECK(std::abs(sol.primal(x) + sol.primal(y) + sol.primal(z) - 3.0) < 1e-7);
  CHECK(std::abs(sol.primal(z) - 1.0) < 1e-7);
}

TEST_CASE("second-order cone projection") {
  // min t s.t. ||(x - 3, y + 4)|| <= t, x = y = 0 via bounds -> t = 5.
  ConicProgram prog;
  const int x = prog.add_variable("x");
  const int y = prog.add_variable("y");
  const int t = prog.add_variable("t");
  prog.add_equality(var(x));
  prog.add_equality(var(y));
  SecondOrderCone cone;
  AffineExpr a1 = var(x);
  a1.offset = -3.0;
  AffineExpr a2 = var(y);
  a2.offset = 4.0;
  cone.norm_args = {a1, a2};
  cone.bound = var(t);
  prog.add_soc(cone);
  prog.set_objective(var(t));
  const Solution sol = solve(prog, 1e-9);
  REQUIRE(sol.status == SolveStatus::kOptimal);
  CHECK(std::abs(sol.objective_value - 5.0) < 1e-6);
}

TEST_CASE("quadratic minimization through the cone epigraph") {
  // min ||v - a||^2 over the disk ||v|| <= 1 with a = (2, 0): v* = (1, 0),
  // value 1. Epigraph: ||(2s - 1, v1 - 2, v2)|| <= 2s + 1 encodes
  // s >= ((v1-2)^2 + v2^2) / 4 ... using the standard rotated-cone identity
  // ||(1 - s, 2w)|| <= 1 + s  <=>  w^2 <= s.
  ConicProgram prog;
  const int v1 = prog.add_variable("v1");
  const int v2 = prog.add_variable("v2");
  const int s = prog.add_variable("s");  // epigraph of ||v - a||^2
  SecondOrderCone disk;
  disk.norm_args = {var(v1), var(v2)};
  disk.bound = AffineExpr(1.0);
  prog.add_soc(disk);
  SecondOrderCone epi;
  AffineExpr head(1.0);
  head.add(s, -1.0);
  AffineExpr d1 = var(v1, 2.0);
  d1.offset = -4.0;
  AffineExpr d2 = var(v2, 2.0);
  epi.norm_args = {head, d1, d2};
  AffineExpr bound(1.0);
  bound.add(s, 1.0);
  epi.bound = bound;
  prog.add_soc(epi);
  prog.set_objective(var(s));
  const Solution sol = solve(prog, 1e-9);
  REQUIRE(sol.status == SolveStatus::kOptimal);
  CHECK(std::abs(sol.primal(v1) - 1.0) < 1e-5);
  CHECK(std::abs(sol.primal(v2)) < 1e-5);
  CHECK(std::abs(sol.objective_value - 1.0) < 1e-5);
}

TEST_CASE("exponential cone models the logarithm") {
  // max t s.t. t <= log(x), x = e  ->  t = 1. ExpCone(t, 1, x).
  ConicProgram prog;
  const int x = prog.add_variable("x");
  const int t = prog.add_variable("t");
  AffineExpr fix_x = var(x);
  fix_x.offset = -std::exp(1.0);
  prog.add_equality(fix_x);
  ExpCone cone;
  cone.x1 = var(t);
  cone.x2 = AffineExpr(1.0);
  cone.x3 = var(x);
  prog.add_exp_cone(cone);
  prog.set_objective(var(t, -1.0));  // maximize t
  const Solution sol = solve(prog, 1e-9);
  REQUIRE(sol.status == SolveStatus::kOptimal);
  CHECK(std::abs(sol.primal(t) - 1.0) < 1e-6);
}

TEST_CASE("log-rate epigraph reproduces the rate function") {
  // Fix q and u, maximize r: r = B (log2(1+q) - omega_bar u).
  const double q_val = 9.0;
  const double u_val = 0.8;
  const double bandwidth = 2.0;
  const double omega_bar = 0.25;
  ConicProgram prog;
  const int q = prog.add_variable("q");
  const int r = prog.add_variable("r");
  const int u = prog.add_variable("u");
  AffineExpr fix_q = var(q);
  fix_q.offset = -q_val;
  prog.add_equality(fix_q);
  AffineExpr fix_u = var(u);
  fix_u.offset = -u_val;
  prog.add_equality(fix_u);
  log_rate_epigraph(prog, q, r, u, bandwidth, omega_bar);
  prog.set_objective(var(r, -1.0));
  const Solution sol = solve(prog, 1e-10);
  REQUIRE(sol.status == SolveStatus::kOptimal);
  const double expected =
      bandwidth * (std::log1p(q_val) * risres::kLog2E - omega_bar * u_val);
  CHECK(std::abs(sol.primal(r) - expected) < 1e-6);
}

TEST_CASE("infeasible bounds are detected") {
  ConicProgram prog;
  const int x = prog.add_variable("x");
  prog.add_lower_bound(x, 1.0);
  prog.add_upper_bound(x, 0.0);
  prog.set_objective(var(x));
  const Solution sol = solve(prog, 1e-8);
  CHECK(sol.status == SolveStatus::kInfeasible);
}

TEST_CASE("unbounded descent is flagged") {
  ConicProgram prog;
  const int x = prog.add_variable("x");
  prog.add_upper_bound(x, 0.0);
  prog.set_objective(var(x));
  const Solution sol = solve(prog, 1e-8);
  CHECK(sol.status == SolveStatus::kUnbounded);
}

TEST_CASE("warm start from a strictly feasible point") {
  ConicProgram prog;
  const int x = prog.add_variable("x");
  const int y = prog.add_variable("y");
  prog.add_lower_bound(x, 0.0);
  prog.add_lower_bound(y, 0.0);
  SecondOrderCone cone;
  cone.norm_args = {var(x), var(y)};
  cone.bound = AffineExpr(2.0);
  prog.add_soc(cone);
  AffineExpr obj;
  obj.add(x, -1.0).add(y, -1.0);  // maximize x + y -> sqrt(2) each
  prog.set_objective(obj);
  SolveOptions opts;
  opts.tol = 1e-9;
  Eigen::VectorXd start(2);
  start << 0.5, 0.25;
  opts.initial_point = start;
  const Solution sol = solve(prog, opts);
  REQUIRE(sol.status == SolveStatus::kOptimal);
  CHECK(std::abs(sol.primal(x) - std::numbers::sqrt2) < 1e-5);
  CHECK(std::abs(sol.primal(y) - std::numbers::sqrt2) < 1e-5);
}

TEST_CASE("structured and dense KKT paths agree") {
  // Large enough to cross the structured-path threshold: a quadratic
  // objective over many small cones.
  ConicProgram prog;
  const int n = 60;
  risres::Rng rng(5);
  std::vector<int> vars;
  AffineExpr obj;
  for (int i = 0; i < n; ++i) {
    const int v = prog.add_variable("v" + std::to_string(i));
    vars.push_back(v);
    const double center = rng.uniform(-1.0, 1.0);
    // (v - center)^2 <= s_i via ||(1 - s, 2(v - c))|| <= 1 + s.
    const int s = prog.add_variable("s" + std::to_string(i));
    SecondOrderCone epi;
    AffineExpr head(1.0);
    head.add(s, -1.0);
    AffineExpr diff = var(v, 2.0);
    diff.offset = -2.0 * center;
    epi.norm_args = {head, diff};
    AffineExpr bound(1.0);
    bound.add(s, 1.0);
    epi.bound = bound;
    prog.add_soc(epi);
    prog.add_lower_bound(v, -2.0);
    prog.add_upper_bound(v, 2.0);
    obj.add(s, 1.0);
  }
  prog.set_objective(obj);

  // The minimum sits with all sixty cones active, so the slacks shrink like
  // 1/t along the central path; 1e-7 is the accuracy a primal barrier can
  // certify here before the cone residuals fall below cancellation noise.
  SolveOptions dense;
  dense.tol = 1e-7;
  dense.force_dense = true;
  const Solution a = solve(prog, dense);
  SolveOptions structured;
  structured.tol = 1e-7;
  const Solution b = solve(prog, structured);
  REQUIRE(a.status == SolveStatus::kOptimal);
  REQUIRE(b.status == SolveStatus::kOptimal);
  CHECK(std::abs(a.objective_value - b.objective_value) < 1e-6);
  CHECK(std::abs(a.objective_value) < 1e-6);  // exact minimum is 0
}

TEST_CASE("independent violation check agrees with reported residuals") {
  ConicProgram prog;
  const int x = prog.add_variable("x");
  prog.add_lower_bound(x, 1.0);
  prog.set_objective(var(x));
  const Solution sol = solve(prog, 1e-9);
  REQUIRE(sol.status == SolveStatus::kOptimal);
  CHECK(max_violation(prog, sol.primal) == sol.max_violation);
  Eigen::VectorXd bad(1);
  bad << 0.5;
  CHECK(max_violation(prog, bad) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("complex vector variables interleave re and im") {
  ConicProgram prog;
  const int base = prog.add_complex_vector("z", 3);
  CHECK(prog.num_vars() == 6);
  CHECK(prog.variables()[static_cast<std::size_t>(base)].kind ==
        VarKind::kComplexRe);
  CHECK(prog.variables()[static_cast<std::size_t>(base) + 1].kind ==
        VarKind::kComplexIm);
  Eigen::VectorXcd z(3);
  z << std::complex<double>(1.0, 2.0), std::complex<double>(-0.5, 0.25),
      std::complex<double>(0.0, -1.0);
  const Eigen::VectorXd lifted = lift_complex(z);
  REQUIRE(lifted.size() == 6);
  CHECK(lifted(0) == 1.0);
  CHECK(lifted(1) == 2.0);
  const Eigen::VectorXcd back = unlift_complex(lifted);
  CHECK((back - z).norm() == 0.0);
}
