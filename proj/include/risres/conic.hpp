#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

namespace risres::conic {

// Sparse affine expression sum_i coef[i] * x[index[i]] + offset.
struct AffineExpr {
  std::vector<int> index;
  std::vector<double> coef;
  double offset = 0.0;

  AffineExpr() = default;
  explicit AffineExpr(double constant) : offset(constant) {}

  AffineExpr& add(int var, double coefficient) {
    index.push_back(var);
    coef.push_back(coefficient);
    return *this;
  }

  [[nodiscard]] double eval(const Eigen::VectorXd& x) const {
    double acc = offset;
    for (std::size_t i = 0; i < index.size(); ++i) {
      acc += coef[i] * x(index[i]);
    }
    return acc;
  }
};

// ||norm_args(x)|| <= bound(x).
struct SecondOrderCone {
  std::vector<AffineExpr> norm_args;
  AffineExpr bound;
};

// x2 exp(x1 / x2) <= x3 with x2 > 0 (equivalently x2 log(x3/x2) >= x1).
struct ExpCone {
  AffineExpr x1, x2, x3;
};

enum class VarKind { kReal, kComplexRe, kComplexIm };

struct VarInfo {
  std::string name;
  VarKind kind = VarKind::kReal;
};

// Conic program: minimize a linear objective subject to linear equalities,
// linear inequalities, second-order cones, and exponential cones. Complex
// quantities enter through interleaved (re, im) real variable pairs.
class ConicProgram {
 public:
  int add_variable(std::string name);
  // Adds `count` complex entries as 2*count interleaved reals; returns the
  // base index (entry j occupies indices base + 2j and base + 2j + 1).
  int add_complex_vector(const std::string& name, int count);

  void add_equality(AffineExpr expr) { equalities_.push_back(std::move(expr)); }
  void add_inequality(AffineExpr expr) {  // expr <= 0
    inequalities_.push_back(std::move(expr));
  }
  void add_soc(SecondOrderCone cone) { socs_.push_back(std::move(cone)); }
  void add_exp_cone(ExpCone cone) { exp_cones_.push_back(std::move(cone)); }
  // Box bounds are stored as plain inequalities.
  void add_lower_bound(int var, double lo);
  void add_upper_bound(int var, double hi);

  void set_objective(AffineExpr expr) { objective_ = std::move(expr); }

  [[nodiscard]] int num_vars() const {
    return static_cast<int>(variables_.size());
  }
  [[nodiscard]] const AffineExpr& objective() const { return objective_; }
  [[nodiscard]] const std::vector<AffineExpr>& equalities() const {
    return equalities_;
  }
  [[nodiscard]] const std::vector<AffineExpr>& inequalities() const {
    return inequalities_;
  }
  [[nodiscard]] const std::vector<SecondOrderCone>& socs() const {
    return socs_;
  }
  [[nodiscard]] const std::vector<ExpCone>& exp_cones() const {
    return exp_cones_;
  }
  [[nodiscard]] const std::vector<VarInfo>& variables() const {
    return variables_;
  }

 private:
  std::vector<VarInfo> variables_;
  AffineExpr objective_;
  std::vector<AffineExpr> equalities_;
  std::vector<AffineExpr> inequalities_;
  std::vector<SecondOrderCone> socs_;
  std::vector<ExpCone> exp_cones_;
};

enum class SolveStatus {
  kOptimal,
  kInfeasible,
  kUnbounded,
  kIterationLimit,
  kNumericalFailure,
};

const char* to_string(SolveStatus status);

struct Solution {
  SolveStatus status = SolveStatus::kNumericalFailure;
  Eigen::VectorXd primal;  // populated for kOptimal and kIterationLimit
  double objective_value = 0.0;
  double gap = 0.0;            // duality-gap bound at termination
  double max_violation = 0.0;  // from the independent feasibility re-check
  int newton_steps = 0;
};

struct SolveOptions {
  double tol = 1e-8;  // absolute duality-gap target, in [1e-10, 1e-4]
  std::optional<Eigen::VectorXd> initial_point;  // must be strictly feasible
  bool force_dense = false;  // disable the structured KKT path
  int max_newton_steps = 2000;
};

Solution solve(const ConicProgram& prog, const SolveOptions& opts);
Solution solve(const ConicProgram& prog, double tol = 1e-8);

// Worst constraint violation at x, computed by plain arithmetic independent
// of any solver state. Zero or negative slack counts as violation.
double max_violation(const ConicProgram& prog, const Eigen::VectorXd& x);

// Epigraph of the normal-approximation rate: appends an auxiliary variable t
// with t <= ln(1 + q) (one exponential cone) and the linear constraint
// r <= bandwidth * (t / ln 2 - omega_over_sqrt_eta * u). Returns t's index.
int log_rate_epigraph(ConicProgram& prog, int q_index, int r_index,
                      int u_index, double bandwidth,
                      double omega_over_sqrt_eta);

// Interleave a complex vector as (re, im) pairs and back.
Eigen::VectorXd lift_complex(const Eigen::VectorXcd& z);
Eigen::VectorXcd unlift_complex(const Eigen::VectorXd& x);

}  // namespace risres::conic
