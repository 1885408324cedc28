// Primal log-barrier path-following method over linear, second-order, and
// exponential cone blocks. Newton systems exploit problem structure: narrow
// constraint blocks accumulate into a sparse base matrix while wide blocks
// (many variables) contribute low-rank outer products handled through the
// Woodbury identity. A dense assembly remains available both as a fallback
// and as an independent reference for tests.

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "risres/conic.hpp"

namespace risres::conic {

namespace {

constexpr double kMu = 15.0;         // barrier parameter growth per round
constexpr double kInnerTol = 5e-11;  // Newton decrement^2 / 2 target
constexpr int kMaxInnerSteps = 400;  // per centering
constexpr int kSmallSupport = 8;     // base/low-rank classification cutoff
constexpr double kPhase1Margin = 1e-7;
// Acceptance level for a centering that stalls at the floating-point floor
// before reaching kInnerTol. A Newton decrement lambda = sqrt(lambda2) still
// certifies a duality gap of (nu + lambda*(lambda + sqrt(nu))/(1 - lambda))/t,
// so any stall with lambda <= 0.15 is within a few percent of the nu/t gap
// of the exact analytic center and the rung's accuracy target is met. The
// floor grows roughly like t^2 (gradient and Hessian entries scale with the
// inverse slacks, whose absolute roundoff is fixed), so late rungs of
// well-conditioned programs can stall here legitimately; stalls above this
// level mean the iteration lost the central path and are reported as
// numerical failures.
constexpr double kStallLambda2 = 0.0225;  // lambda <= 0.15

enum class BlockKind { kLin, kSoc, kExp };

// Affine expression with precomputed positions of its variables inside the
// owning block's support list.
struct BExpr {
  std::vector<int> idx;
  std::vector<double> coef;
  double offset = 0.0;
  std::vector<int> pos;

  [[nodiscard]] double eval(const Eigen::VectorXd& x) const {
    double acc = offset;
    for (std::size_t i = 0; i < idx.size(); ++i) acc += coef[i] * x(idx[i]);
    return acc;
  }
};

struct Block {
  BlockKind kind = BlockKind::kLin;
  // lin: exprs = {e};  soc: exprs = {rows..., bound};  exp: exprs = {e1,e2,e3}
  std::vector<BExpr> exprs;
  std::vector<int> support;
  bool local = true;             // small support: scatter into the base
  std::vector<char> row_single;  // soc only: row touches exactly one var
  int outer_cols = 0;            // low-rank columns contributed when wide
};

struct Blocks {
  std::vector<Block> items;
  double nu = 0.0;      // total barrier parameter
  int outer_total = 0;  // sum of outer_cols
};

double block_nu(const Block& b) {
  switch (b.kind) {
    case BlockKind::kLin: return 1.0;
    case BlockKind::kSoc: return 2.0;
    case BlockKind::kExp: return 3.0;
  }
  return 0.0;
}

BExpr to_bexpr(const AffineExpr& e) {
  BExpr out;
  out.idx = e.index;
  out.coef = e.coef;
  out.offset = e.offset;
  return out;
}

void finalize_block(Block& block) {
  block.support.clear();
  for (const auto& e : block.exprs) {
    block.support.insert(block.support.end(), e.idx.begin(), e.idx.end());
  }
  std::sort(block.support.begin(), block.support.end());
  block.support.erase(std::unique(block.support.begin(), block.support.end()),
                      block.support.end());
  for (auto& e : block.exprs) {
    e.pos.resize(e.idx.size());
    for (std::size_t i = 0; i < e.idx.size(); ++i) {
      e.pos[i] = static_cast<int>(
          std::lower_bound(block.support.begin(), block.support.end(),
                           e.idx[i]) -
          block.support.begin());
    }
  }
  block.local = static_cast<int>(block.support.size()) <= kSmallSupport;
  block.outer_cols = 0;
  block.row_single.clear();
  if (block.kind == BlockKind::kExp) {
    // Exponential blocks always scatter locally: their Hessian involves at
    // most a handful of variables in every program built here.
    block.local = true;
    return;
  }
  if (block.local) return;
  if (block.kind == BlockKind::kLin) {
    block.outer_cols = 1;
    return;
  }
  // Wide second-order cone: one column for grad(F)/F, one per multi-variable
  // norm row, one for a non-constant bound. Single-variable rows contribute
  // diagonal curvature to the sparse base instead.
  const std::size_t rows = block.exprs.size() - 1;
  block.row_single.assign(rows, 0);
  block.outer_cols = 1;
  for (std::size_t j = 0; j < rows; ++j) {
    if (block.exprs[j].idx.size() == 1) {
      block.row_single[j] = 1;
    } else {
      ++block.outer_cols;
    }
  }
  if (!block.exprs[rows].idx.empty()) ++block.outer_cols;
}

Blocks build_blocks(const ConicProgram& prog) {
  Blocks out;
  for (const auto& ineq : prog.inequalities()) {
    Block b;
    b.kind = BlockKind::kLin;
    b.exprs.push_back(to_bexpr(ineq));
    finalize_block(b);
    out.items.push_back(std::move(b));
  }
  for (const auto& soc : prog.socs()) {
    Block b;
    b.kind = BlockKind::kSoc;
    for (const auto& row : soc.norm_args) b.exprs.push_back(to_bexpr(row));
    b.exprs.push_back(to_bexpr(soc.bound));
    finalize_block(b);
    out.items.push_back(std::move(b));
  }
  for (const auto& cone : prog.exp_cones()) {
    Block b;
    b.kind = BlockKind::kExp;
    b.exprs.push_back(to_bexpr(cone.x1));
    b.exprs.push_back(to_bexpr(cone.x2));
    b.exprs.push_back(to_bexpr(cone.x3));
    finalize_block(b);
    out.items.push_back(std::move(b));
  }
  for (const auto& b : out.items) {
    out.nu += block_nu(b);
    out.outer_total += b.outer_cols;
  }
  return out;
}

// Box half-width around the phase-I starting guess. Variables of a program
// whose feasible set is unbounded (free rate variables, epigraph slacks)
// would otherwise let the pure-barrier centering run away. The width is a
// compromise: generous enough that the boxes never exclude a usable interior
// point of the programs built here, yet narrow enough that the box barrier's
// curvature (~1/width^2) keeps the Newton system solvable in doubles
// alongside normal-scale blocks.
constexpr double kPhase1Box = 1e4;

// Phase-I relaxation: a slack variable tau (index n) enlarges every block's
// feasible set monotonically, so a large enough tau is always interior.
// The boxes around `guess` are not relaxed.
Blocks build_relaxed_blocks(const Blocks& blocks, int tau_index,
                            const Eigen::VectorXd& guess) {
  Blocks out;
  for (const auto& b : blocks.items) {
    Block r = b;
    switch (r.kind) {
      case BlockKind::kLin:
        r.exprs[0].idx.push_back(tau_index);
        r.exprs[0].coef.push_back(-1.0);  // expr - tau <= 0
        break;
      case BlockKind::kSoc: {
        auto& bound = r.exprs.back();
        bound.idx.push_back(tau_index);
        bound.coef.push_back(1.0);  // ||args|| <= bound + tau
        break;
      }
      case BlockKind::kExp:
        r.exprs[0].idx.push_back(tau_index);
        r.exprs[0].coef.push_back(-1.0);  // x1 - tau
        r.exprs[1].idx.push_back(tau_index);
        r.exprs[1].coef.push_back(1.0);  // x2 + tau
        r.exprs[2].idx.push_back(tau_index);
        r.exprs[2].coef.push_back(1.0);  // x3 + tau
        break;
    }
    finalize_block(r);
    out.items.push_back(std::move(r));
  }
  {
    Block floor;  // tau >= -1 keeps phase I bounded below
    floor.kind = BlockKind::kLin;
    BExpr e;
    e.idx = {tau_index};
    e.coef = {-1.0};
    e.offset = -1.0;
    floor.exprs.push_back(std::move(e));
    finalize_block(floor);
    out.items.push_back(std::move(floor));
  }
  for (int j = 0; j < tau_index; ++j) {
    const double half = kPhase1Box * std::max(1.0, std::abs(guess(j)));
    for (const double sign : {1.0, -1.0}) {
      Block box;  // sign * (x_j - guess_j) <= half
      box.kind = BlockKind::kLin;
      BExpr e;
      e.idx = {j};
      e.coef = {sign};
      e.offset = -sign * guess(j) - half;
      box.exprs.push_back(std::move(e));
      finalize_block(box);
      out.items.push_back(std::move(box));
    }
  }
  for (const auto& b : out.items) {
    out.nu += block_nu(b);
    out.outer_total += b.outer_cols;
  }
  return out;
}

// Strict-feasibility slack; positive means interior.
double block_slack(const Block& b, const Eigen::VectorXd& x) {
  switch (b.kind) {
    case BlockKind::kLin:
      return -b.exprs[0].eval(x);
    case BlockKind::kSoc: {
      const std::size_t rows = b.exprs.size() - 1;
      double sq = 0.0;
      for (std::size_t j = 0; j < rows; ++j) {
        const double v = b.exprs[j].eval(x);
        sq += v * v;
      }
      return b.exprs[rows].eval(x) - std::sqrt(sq);
    }
    case BlockKind::kExp: {
      const double u = b.exprs[0].eval(x);
      const double v = b.exprs[1].eval(x);
      const double w = b.exprs[2].eval(x);
      if (!(v > 0.0) || !(w > 0.0)) return std::min(v, w);
      return std::min({v, w, v * std::log(w / v) - u});
    }
  }
  return -1.0;
}

double min_slack(const Blocks& blocks, const Eigen::VectorXd& x) {
  double lo = std::numeric_limits<double>::infinity();
  for (const auto& b : blocks.items) lo = std::min(lo, block_slack(b, x));
  return lo;
}

double barrier_value(const Blocks& blocks, const Eigen::VectorXd& x) {
  double phi = 0.0;
  for (const auto& b : blocks.items) {
    switch (b.kind) {
      case BlockKind::kLin: {
        const double s = -b.exprs[0].eval(x);
        if (!(s > 0.0)) return std::numeric_limits<double>::infinity();
        phi -= std::log(s);
        break;
      }
      case BlockKind::kSoc: {
        const std::size_t rows = b.exprs.size() - 1;
        double sq = 0.0;
        for (std::size_t j = 0; j < rows; ++j) {
          const double v = b.exprs[j].eval(x);
          sq += v * v;
        }
        const double beta = b.exprs[rows].eval(x);
        const double f = beta * beta - sq;
        if (!(beta > 0.0) || !(f > 0.0)) {
          return std::numeric_limits<double>::infinity();
        }
        phi -= std::log(f);
        break;
      }
      case BlockKind::kExp: {
        const double u = b.exprs[0].eval(x);
        const double v = b.exprs[1].eval(x);
        const double w = b.exprs[2].eval(x);
        if (!(v > 0.0) || !(w > 0.0)) {
          return std::numeric_limits<double>::infinity();
        }
        const double d = v * std::log(w / v) - u;
        if (!(d > 0.0)) return std::numeric_limits<double>::infinity();
        phi -= std::log(d) + std::log(v) + std::log(w);
        break;
      }
    }
  }
  return phi;
}

// Receives Hessian contributions from the block visitors.
class HessSink {
 public:
  virtual ~HessSink() = default;
  // Dense symmetric chunk over the block's support indices.
  virtual void local(const std::vector<int>& support,
                     const Eigen::MatrixXd& h) = 0;
  virtual void diag(int var, double value) = 0;
  // weight * (scatter of vals at idx) (same)^T
  virtual void outer(const std::vector<int>& idx,
                     const std::vector<double>& vals, double weight) = 0;
};

class DenseSink final : public HessSink {
 public:
  explicit DenseSink(Eigen::MatrixXd& h) : h_(h) {}
  void local(const std::vector<int>& support,
             const Eigen::MatrixXd& h) override {
    for (std::size_t i = 0; i < support.size(); ++i) {
      for (std::size_t j = 0; j < support.size(); ++j) {
        h_(support[i], support[j]) += h(i, j);
      }
    }
  }
  void diag(int var, double value) override { h_(var, var) += value; }
  void outer(const std::vector<int>& idx, const std::vector<double>& vals,
             double weight) override {
    for (std::size_t i = 0; i < idx.size(); ++i) {
      for (std::size_t j = 0; j < idx.size(); ++j) {
        h_(idx[i], idx[j]) += weight * vals[i] * vals[j];
      }
    }
  }

 private:
  Eigen::MatrixXd& h_;
};

class StructuredSink final : public HessSink {
 public:
  StructuredSink(std::vector<Eigen::Triplet<double>>& trips,
                 Eigen::MatrixXd& u, std::vector<double>& weights)
      : trips_(trips), u_(u), weights_(weights) {}
  void local(const std::vector<int>& support,
             const Eigen::MatrixXd& h) override {
    for (std::size_t i = 0; i < support.size(); ++i) {
      for (std::size_t j = 0; j < support.size(); ++j) {
        trips_.emplace_back(support[i], support[j], h(i, j));
      }
    }
  }
  void diag(int var, double value) override {
    trips_.emplace_back(var, var, value);
  }
  void outer(const std::vector<int>& idx, const std::vector<double>& vals,
             double weight) override {
    const auto col = static_cast<Eigen::Index>(weights_.size());
    u_.col(col).setZero();
    for (std::size_t i = 0; i < idx.size(); ++i) u_(idx[i], col) = vals[i];
    weights_.push_back(weight);
  }

 private:
  std::vector<Eigen::Triplet<double>>& trips_;
  Eigen::MatrixXd& u_;
  std::vector<double>& weights_;
};

// Emits the barrier gradient and Hessian of one block at x.
void emit_block(const Block& b, const Eigen::VectorXd& x,
                Eigen::VectorXd& grad, HessSink& sink) {
  const auto n_s = static_cast<Eigen::Index>(b.support.size());
  switch (b.kind) {
    case BlockKind::kLin: {
      const BExpr& e = b.exprs[0];
      const double s = -e.eval(x);
      for (std::size_t i = 0; i < e.idx.size(); ++i) {
        grad(e.idx[i]) += e.coef[i] / s;
      }
      if (b.local) {
        Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n_s, n_s);
        for (std::size_t i = 0; i < e.idx.size(); ++i) {
          for (std::size_t j = 0; j < e.idx.size(); ++j) {
            h(e.pos[i], e.pos[j]) += e.coef[i] * e.coef[j] / (s * s);
          }
        }
        sink.local(b.support, h);
      } else {
        sink.outer(e.idx, e.coef, 1.0 / (s * s));
      }
      break;
    }
    case BlockKind::kSoc: {
      const std::size_t rows = b.exprs.size() - 1;
      const BExpr& bound = b.exprs[rows];
      const double beta = bound.eval(x);
      double sq = 0.0;
      std::vector<double> alpha(rows);
      for (std::size_t j = 0; j < rows; ++j) {
        alpha[j] = b.exprs[j].eval(x);
        sq += alpha[j] * alpha[j];
      }
      const double f = beta * beta - sq;
      // grad(F) over the support, assembled densely.
      Eigen::VectorXd gf = Eigen::VectorXd::Zero(n_s);
      for (std::size_t j = 0; j < rows; ++j) {
        const BExpr& e = b.exprs[j];
        for (std::size_t i = 0; i < e.idx.size(); ++i) {
          gf(e.pos[i]) -= 2.0 * alpha[j] * e.coef[i];
        }
      }
      for (std::size_t i = 0; i < bound.idx.size(); ++i) {
        gf(bound.pos[i]) += 2.0 * beta * bound.coef[i];
      }
      for (Eigen::Index i = 0; i < n_s; ++i) {
        grad(b.support[i]) -= gf(i) / f;
      }
      if (b.local) {
        Eigen::MatrixXd h = (gf / f) * (gf / f).transpose();
        for (std::size_t j = 0; j < rows; ++j) {
          const BExpr& e = b.exprs[j];
          for (std::size_t i = 0; i < e.idx.size(); ++i) {
            for (std::size_t l = 0; l < e.idx.size(); ++l) {
              h(e.pos[i], e.pos[l]) += 2.0 / f * e.coef[i] * e.coef[l];
            }
          }
        }
        for (std::size_t i = 0; i < bound.idx.size(); ++i) {
          for (std::size_t l = 0; l < bound.idx.size(); ++l) {
            h(bound.pos[i], bound.pos[l]) -=
                2.0 / f * bound.coef[i] * bound.coef[l];
          }
        }
        sink.local(b.support, h);
      } else {
        std::vector<double> gf_over_f(b.support.size());
        for (Eigen::Index i = 0; i < n_s; ++i) gf_over_f[i] = gf(i) / f;
        sink.outer(b.support, gf_over_f, 1.0);
        for (std::size_t j = 0; j < rows; ++j) {
          const BExpr& e = b.exprs[j];
          if (b.row_single[j]) {
            sink.diag(e.idx[0], 2.0 / f * e.coef[0] * e.coef[0]);
          } else {
            sink.outer(e.idx, e.coef, 2.0 / f);
          }
        }
        if (!bound.idx.empty()) {
          sink.outer(bound.idx, bound.coef, -2.0 / f);
        }
      }
      break;
    }
    case BlockKind::kExp: {
      const double u = b.exprs[0].eval(x);
      const double v = b.exprs[1].eval(x);
      const double w = b.exprs[2].eval(x);
      const double ell = std::log(w / v);
      const double d = v * ell - u;
      const Eigen::Vector3d dd(-1.0, ell - 1.0, v / w);
      Eigen::Vector3d g3 = -dd / d;
      g3(1) -= 1.0 / v;
      g3(2) -= 1.0 / w;
      Eigen::Matrix3d d2 = Eigen::Matrix3d::Zero();
      d2(1, 1) = -1.0 / v;
      d2(1, 2) = d2(2, 1) = 1.0 / w;
      d2(2, 2) = -v / (w * w);
      Eigen::Matrix3d h3 = dd * dd.transpose() / (d * d) - d2 / d;
      h3(1, 1) += 1.0 / (v * v);
      h3(2, 2) += 1.0 / (w * w);
      Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(3, n_s);
      for (int row = 0; row < 3; ++row) {
        const BExpr& e = b.exprs[row];
        for (std::size_t i = 0; i < e.idx.size(); ++i) {
          jac(row, e.pos[i]) += e.coef[i];
        }
      }
      const Eigen::VectorXd glocal = jac.transpose() * g3;
      for (Eigen::Index i = 0; i < n_s; ++i) {
        grad(b.support[i]) += glocal(i);
      }
      sink.local(b.support, jac.transpose() * h3 * jac);
      break;
    }
  }
}

// Factorizes the barrier Hessian at x and answers Newton solves against it.
class NewtonSystem {
 public:
  void configure(int n_vars, const Blocks& blocks, bool force_dense) {
    n_ = n_vars;
    structured_ = !force_dense && n_ >= 48 && blocks.outer_total * 3 <= n_;
    if (structured_) {
      u_.resize(n_, blocks.outer_total);
      base_.resize(n_, n_);
    }
    analyzed_ = false;
  }

  // Assembles the Hessian at x; barrier_grad receives the barrier gradient.
  bool factor(const Blocks& blocks, const Eigen::VectorXd& x,
              Eigen::VectorXd& barrier_grad) {
    if (structured_ && factor_structured(blocks, x, barrier_grad)) {
      mode_dense_ = false;
      return true;
    }
    mode_dense_ = true;
    return factor_dense(blocks, x, barrier_grad);
  }

  // Solves H dx = -g; lambda2 receives the decrement g^T H^-1 g. Falls back
  // to the dense assembly when the structured solve fails its residual check.
  bool solve(const Blocks& blocks, const Eigen::VectorXd& x,
             const Eigen::VectorXd& g, Eigen::VectorXd& dx, double& lambda2) {
    if (!mode_dense_) {
      if (solve_structured(g, dx, lambda2)) return true;
      Eigen::VectorXd scratch;
      mode_dense_ = true;
      if (!factor_dense(blocks, x, scratch)) return false;
    }
    return solve_dense(g, dx, lambda2);
  }

  [[nodiscard]] const Eigen::MatrixXd& dense_hessian() const { return dense_; }

 private:
  bool factor_structured(const Blocks& blocks, const Eigen::VectorXd& x,
                         Eigen::VectorXd& grad) {
    grad.setZero(n_);
    trips_.clear();
    weights_.clear();
    StructuredSink sink(trips_, u_, weights_);
    for (const auto& b : blocks.items) emit_block(b, x, grad, sink);
    if (!grad.allFinite()) return false;

    double max_entry = 1.0;
    for (const auto& t : trips_) {
      max_entry = std::max(max_entry, std::abs(t.value()));
    }
    const double ridge = 1e-13 * max_entry;
    for (int i = 0; i < n_; ++i) trips_.emplace_back(i, i, ridge);
    base_.setFromTriplets(trips_.begin(), trips_.end());
    if (!analyzed_) {
      base_ldlt_.analyzePattern(base_);
      analyzed_ = true;
    }
    base_ldlt_.factorize(base_);
    return base_ldlt_.info() == Eigen::Success;
  }

  bool solve_structured(const Eigen::VectorXd& g, Eigen::VectorXd& dx,
                        double& lambda2) {
    const auto r = static_cast<Eigen::Index>(weights_.size());
    const Eigen::VectorXd bi_g = base_ldlt_.solve(g);
    if (r == 0) {
      dx = -bi_g;
    } else {
      const auto u = u_.leftCols(r);
      const Eigen::MatrixXd bi_u = base_ldlt_.solve(u);
      Eigen::MatrixXd cap = u.transpose() * bi_u;
      for (Eigen::Index i = 0; i < r; ++i) cap(i, i) += 1.0 / weights_[i];
      const Eigen::PartialPivLU<Eigen::MatrixXd> lu(cap);
      dx = -(bi_g - bi_u * lu.solve(u.transpose() * bi_g));
    }
    if (!dx.allFinite()) return false;

    // Residual check via a direct application of H = base + U W U^T.
    Eigen::VectorXd h_dx = base_ * dx;
    double quad = dx.dot(h_dx);
    if (r > 0) {
      const Eigen::VectorXd ut_dx = u_.leftCols(r).transpose() * dx;
      for (Eigen::Index i = 0; i < r; ++i) {
        h_dx += u_.col(i) * (weights_[i] * ut_dx(i));
        quad += weights_[i] * ut_dx(i) * ut_dx(i);
      }
    }
    const double res = (h_dx + g).norm();
    if (!(res <= 1e-8 * std::max(1.0, g.norm()))) return false;
    lambda2 = std::max(0.0, quad);
    return std::isfinite(lambda2);
  }

  bool factor_dense(const Blocks& blocks, const Eigen::VectorXd& x,
                    Eigen::VectorXd& grad) {
    grad.setZero(n_);
    dense_.setZero(n_, n_);
    DenseSink sink(dense_);
    for (const auto& b : blocks.items) emit_block(b, x, grad, sink);
    return grad.allFinite() && dense_.allFinite();
  }

  bool solve_dense(const Eigen::VectorXd& g, Eigen::VectorXd& dx,
                   double& lambda2) {
    const double scale =
        std::max(1.0, dense_.diagonal().cwiseAbs().maxCoeff());
    double ridge = 1e-13 * scale;
    for (int attempt = 0; attempt < 4; ++attempt) {
      Eigen::MatrixXd h = dense_;
      h.diagonal().array() += ridge;
      const Eigen::LDLT<Eigen::MatrixXd> ldlt(h);
      if (ldlt.info() == Eigen::Success) {
        dx = -ldlt.solve(g);
        if (dx.allFinite() &&
            (h * dx + g).norm() <= 1e-7 * std::max(1.0, g.norm())) {
          lambda2 = std::max(0.0, dx.dot(dense_ * dx));
          return std::isfinite(lambda2);
        }
      }
      ridge *= 1e3;
    }
    return false;
  }

  int n_ = 0;
  bool structured_ = false;
  bool mode_dense_ = false;
  bool analyzed_ = false;
  std::vector<Eigen::Triplet<double>> trips_;
  std::vector<double> weights_;
  Eigen::MatrixXd u_;
  Eigen::SparseMatrix<double> base_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> base_ldlt_;
  Eigen::MatrixXd dense_;
};

enum class CenterOutcome { kCentered, kEarlyExit, kStepBudget, kDiverged };

struct CenterSetup {
  const Blocks* blocks = nullptr;
  Eigen::VectorXd c;  // linear objective gradient
  NewtonSystem* newton = nullptr;
  int* steps_used = nullptr;
  int max_total_steps = 0;
  // Optional predicate checked after each accepted step (used by phase I).
  int watch_var = -1;
  double watch_below = 0.0;
};

double composite_value(const CenterSetup& setup, double t,
                       const Eigen::VectorXd& x) {
  return t * setup.c.dot(x) + barrier_value(*setup.blocks, x);
}

// Damped Newton centering of t*c'x + barrier(x) from a strictly interior x.
CenterOutcome center(const CenterSetup& setup, double t, Eigen::VectorXd& x) {
  const Blocks& blocks = *setup.blocks;
  const double start_norm = x.lpNorm<Eigen::Infinity>();
  Eigen::VectorXd barrier_grad(x.size()), dx(x.size());
  double best_lambda2 = std::numeric_limits<double>::infinity();
  double halving_ref = std::numeric_limits<double>::infinity();
  int halving_iter = 0;
  int flat_steps = 0;
  for (int iter = 0; iter < kMaxInnerSteps; ++iter) {
    if (*setup.steps_used >= setup.max_total_steps) {
      return CenterOutcome::kStepBudget;
    }
    if (!setup.newton->factor(blocks, x, barrier_grad)) {
      return CenterOutcome::kDiverged;
    }
    const Eigen::VectorXd g = barrier_grad + t * setup.c;
    double lambda2 = 0.0;
    if (!setup.newton->solve(blocks, x, g, dx, lambda2)) {
      return CenterOutcome::kDiverged;
    }
    ++*setup.steps_used;
    if (0.5 * lambda2 <= kInnerTol) return CenterOutcome::kCentered;
    best_lambda2 = std::min(best_lambda2, lambda2);
    // A decrement pinned at a small value is the roundoff floor of the
    // Newton system: converging iterations halve lambda^2 within a few
    // steps, so a long halving-free stretch at an already tiny decrement
    // means centered-to-machine-precision. Large plateaus are left alone;
    // damped phases can legitimately hold lambda^2 steady while the
    // composite objective still falls.
    if (lambda2 < 0.5 * halving_ref) {
      halving_ref = lambda2;
      halving_iter = iter;
    } else if (iter - halving_iter >= 10 && best_lambda2 <= kStallLambda2) {
      return CenterOutcome::kCentered;
    }

    const double lambda = std::sqrt(lambda2);
    double alpha = lambda > 0.25 ? 1.0 / (1.0 + lambda) : 1.0;
    int back = 0;
    while (back < 90 && !(min_slack(blocks, x + alpha * dx) > 0.0)) {
      alpha *= 0.5;
      ++back;
    }
    if (back >= 90) return CenterOutcome::kDiverged;
    // Weak descent safeguard, tolerant of roundoff at large t where the
    // composite value cannot be resolved to full precision. When no
    // resolvable descent exists along the Newton direction the iteration has
    // hit the floating-point floor: accept the point if it is near-centered.
    const double f0 = composite_value(setup, t, x);
    double f1 = composite_value(setup, t, x + alpha * dx);
    const double slack_tol = std::max(1e-9, 1e-12 * std::abs(f0));
    int tries = 0;
    while (f1 > f0 + slack_tol && tries < 40) {
      alpha *= 0.5;
      f1 = composite_value(setup, t, x + alpha * dx);
      ++tries;
    }
    const Eigen::VectorXd x_next = x + alpha * dx;
    if (f1 > f0 + slack_tol || x_next == x) {
      // Either no resolvable descent along the Newton direction or the
      // backtracked step vanished in floating point. Both are fixed points
      // of the iteration; accept the point when it is near-centered.
      return best_lambda2 <= kStallLambda2 ? CenterOutcome::kCentered
                                            : CenterOutcome::kDiverged;
    }
    // Steps with no resolvable strict decrease also stop making progress
    // once they repeat: a pair of points can trade places indefinitely with
    // the composite frozen at the roundoff floor (a two-cycle).
    flat_steps = f1 >= f0 ? flat_steps + 1 : 0;
    if (flat_steps >= 3) {
      return best_lambda2 <= kStallLambda2 ? CenterOutcome::kCentered
                                            : CenterOutcome::kDiverged;
    }
    x = x_next;
    if (x.lpNorm<Eigen::Infinity>() > 1e10 * (1.0 + start_norm)) {
      return CenterOutcome::kDiverged;
    }
    if (setup.watch_var >= 0 && x(setup.watch_var) < setup.watch_below) {
      return CenterOutcome::kEarlyExit;
    }
  }
  return best_lambda2 <= kStallLambda2 ? CenterOutcome::kCentered
                                        : CenterOutcome::kDiverged;
}


struct Phase1Result {
  enum class Kind { kInterior, kInfeasible, kStepBudget, kNumerical } kind;
  Eigen::VectorXd x;
};

Phase1Result run_phase1(const Blocks& blocks, int n,
                        const Eigen::VectorXd& guess, bool force_dense,
                        int* steps_used, int max_total_steps) {
  const Blocks relaxed = build_relaxed_blocks(blocks, n, guess);

  Eigen::VectorXd x(n + 1);
  x.head(n) = guess;
  double tau = 1.0;
  x(n) = tau;
  while (min_slack(relaxed, x) < 1.0) {
    tau *= 2.0;
    x(n) = tau;
    if (tau > 1e14) return {Phase1Result::Kind::kNumerical, {}};
  }

  NewtonSystem newton;
  newton.configure(n + 1, relaxed, force_dense);
  CenterSetup setup;
  setup.blocks = &relaxed;
  setup.c = Eigen::VectorXd::Zero(n + 1);
  setup.c(n) = 1.0;  // minimize tau
  setup.newton = &newton;
  setup.steps_used = steps_used;
  setup.max_total_steps = max_total_steps;
  setup.watch_var = n;
  setup.watch_below = -kPhase1Margin;

  // Weight the tau objective like the barrier from the start; beginning at
  // t = 1 would first drag the iterate toward the analytic center of the
  // relaxation (dominated by the huge phase-I boxes) before descending.
  double t = std::max(1.0, relaxed.nu);
  while (true) {
    const CenterOutcome outcome = center(setup, t, x);
    if (outcome == CenterOutcome::kEarlyExit ||
        x(n) < -kPhase1Margin) {
      return {Phase1Result::Kind::kInterior, x.head(n)};
    }
    if (outcome == CenterOutcome::kStepBudget) {
      return {Phase1Result::Kind::kStepBudget, {}};
    }
    if (outcome == CenterOutcome::kDiverged) {
      return {Phase1Result::Kind::kNumerical, {}};
    }
    const double gap = relaxed.nu / t;
    if (gap <= 0.5 * kPhase1Margin) {
      // tau* >= x(n) - gap > -2 * margin: no usable interior point.
      return {Phase1Result::Kind::kInfeasible, {}};
    }
    t *= kMu;
  }
}

// Barrier method for an equality-free program (equalities are eliminated by
// the public wrapper before this runs).
Solution solve_core(const ConicProgram& prog, const SolveOptions& opts) {
  const int n = prog.num_vars();
  Solution out;
  const Blocks blocks = build_blocks(prog);

  Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
  for (std::size_t i = 0; i < prog.objective().index.size(); ++i) {
    c(prog.objective().index[i]) += prog.objective().coef[i];
  }

  int steps_used = 0;

  // Starting point: caller-provided strict interior, else phase I.
  Eigen::VectorXd x;
  bool have_start = false;
  if (opts.initial_point.has_value() &&
      opts.initial_point->size() == n &&
      min_slack(blocks, *opts.initial_point) > 0.0 &&
      std::isfinite(barrier_value(blocks, *opts.initial_point))) {
    x = *opts.initial_point;
    have_start = true;
  }
  if (!have_start) {
    const Eigen::VectorXd guess = opts.initial_point.has_value() &&
                                          opts.initial_point->size() == n
                                      ? *opts.initial_point
                                      : Eigen::VectorXd::Zero(n);
    const Phase1Result p1 = run_phase1(blocks, n, guess, opts.force_dense,
                                       &steps_used, opts.max_newton_steps);
    switch (p1.kind) {
      case Phase1Result::Kind::kInterior:
        x = p1.x;
        break;
      case Phase1Result::Kind::kInfeasible:
        out.status = SolveStatus::kInfeasible;
        out.newton_steps = steps_used;
        return out;
      case Phase1Result::Kind::kStepBudget:
        out.status = SolveStatus::kIterationLimit;
        out.newton_steps = steps_used;
        return out;
      case Phase1Result::Kind::kNumerical:
        out.status = SolveStatus::kNumericalFailure;
        out.newton_steps = steps_used;
        return out;
    }
  }

  NewtonSystem newton;
  newton.configure(n, blocks, opts.force_dense);
  CenterSetup setup;
  setup.blocks = &blocks;
  setup.c = c;
  setup.newton = &newton;
  setup.steps_used = &steps_used;
  setup.max_total_steps = opts.max_newton_steps;

  // The ladder never overshoots the barrier weight the gap target actually
  // needs: the final rung is clamped to just past nu / tol, keeping the
  // constraint slacks (which shrink like 1/t) as large as the request allows.
  const double t_cap = 1.01 * blocks.nu / opts.tol;
  double t = std::min(1.0, t_cap);
  SolveStatus status = SolveStatus::kOptimal;
  while (true) {
    const CenterOutcome outcome = center(setup, t, x);
    if (outcome == CenterOutcome::kStepBudget) {
      status = SolveStatus::kIterationLimit;
      break;
    }
    if (outcome == CenterOutcome::kDiverged) {
      status = (min_slack(blocks, x) > 0.0 && c.dot(x) < -1e10)
                   ? SolveStatus::kUnbounded
                   : SolveStatus::kNumericalFailure;
      break;
    }
    if (blocks.nu / t <= opts.tol) break;  // kOptimal
    t = std::min(t * kMu, t_cap);
  }

  out.newton_steps = steps_used;
  out.gap = blocks.nu / t;
  if (status == SolveStatus::kOptimal || status == SolveStatus::kIterationLimit) {
    out.primal = x;
    out.objective_value = prog.objective().eval(x);
  }
  if (status == SolveStatus::kOptimal) {
    // Independent re-check outside the solver internals.
    out.max_violation = max_violation(prog, x);
    if (!(out.max_violation <= std::max(1e-6, 10.0 * opts.tol))) {
      status = SolveStatus::kNumericalFailure;
    }
  }
  out.status = status;
  return out;
}

// Rewrites an affine expression of x into one of y under x = x0 + N y.
AffineExpr reduce_expr(const AffineExpr& e, const Eigen::MatrixXd& nbasis,
                       const Eigen::VectorXd& x0) {
  Eigen::VectorXd cx = Eigen::VectorXd::Zero(x0.size());
  for (std::size_t i = 0; i < e.index.size(); ++i) {
    cx(e.index[i]) += e.coef[i];
  }
  const Eigen::VectorXd cy = nbasis.transpose() * cx;
  AffineExpr out;
  out.offset = e.offset + cx.dot(x0);
  for (Eigen::Index j = 0; j < cy.size(); ++j) {
    if (cy(j) != 0.0) out.add(static_cast<int>(j), cy(j));
  }
  return out;
}

}  // namespace

Solution solve(const ConicProgram& prog, const SolveOptions& opts) {
  if (!(opts.tol >= 1e-10 && opts.tol <= 1e-4)) {
    throw std::invalid_argument("solve: tol must lie in [1e-10, 1e-4]");
  }
  const int n = prog.num_vars();
  if (n == 0) throw std::invalid_argument("solve: program has no variables");

  if (prog.equalities().empty()) return solve_core(prog, opts);

  // Equality elimination: restrict to the affine subspace A x + b = 0 via a
  // particular solution and an orthonormal kernel basis, then run the
  // barrier method on the reduced, equality-free program.
  const auto k = static_cast<Eigen::Index>(prog.equalities().size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(k, n);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const AffineExpr& e = prog.equalities()[i];
    for (std::size_t j = 0; j < e.index.size(); ++j) {
      a(i, e.index[j]) += e.coef[j];
    }
    b(i) = e.offset;
  }

  Solution out;
  const Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(a);
  const Eigen::VectorXd x0 = cod.solve(-b);
  if (!((a * x0 + b).lpNorm<Eigen::Infinity>() <=
        1e-9 * (1.0 + b.lpNorm<Eigen::Infinity>()))) {
    out.status = SolveStatus::kInfeasible;  // inconsistent equalities
    return out;
  }

  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a.transpose());
  const auto rank = qr.rank();
  const auto m = static_cast<Eigen::Index>(n) - rank;
  if (m == 0) {
    // The equalities pin a single point; nothing is left to optimize.
    out.primal = x0;
    out.objective_value = prog.objective().eval(x0);
    out.max_violation = max_violation(prog, x0);
    out.status = out.max_violation <= std::max(1e-6, 10.0 * opts.tol)
                     ? SolveStatus::kOptimal
                     : SolveStatus::kInfeasible;
    return out;
  }
  const Eigen::MatrixXd nbasis =
      Eigen::MatrixXd(qr.householderQ()).rightCols(m);

  ConicProgram reduced;
  for (Eigen::Index j = 0; j < m; ++j) {
    reduced.add_variable("y" + std::to_string(j));
  }
  reduced.set_objective(reduce_expr(prog.objective(), nbasis, x0));
  for (const auto& ineq : prog.inequalities()) {
    reduced.add_inequality(reduce_expr(ineq, nbasis, x0));
  }
  for (const auto& soc : prog.socs()) {
    SecondOrderCone cone;
    cone.norm_args.reserve(soc.norm_args.size());
    for (const auto& arg : soc.norm_args) {
      cone.norm_args.push_back(reduce_expr(arg, nbasis, x0));
    }
    cone.bound = reduce_expr(soc.bound, nbasis, x0);
    reduced.add_soc(std::move(cone));
  }
  for (const auto& cone : prog.exp_cones()) {
    ExpCone reduced_cone;
    reduced_cone.x1 = reduce_expr(cone.x1, nbasis, x0);
    reduced_cone.x2 = reduce_expr(cone.x2, nbasis, x0);
    reduced_cone.x3 = reduce_expr(cone.x3, nbasis, x0);
    reduced.add_exp_cone(std::move(reduced_cone));
  }

  SolveOptions reduced_opts = opts;
  if (opts.initial_point.has_value() && opts.initial_point->size() == n) {
    reduced_opts.initial_point =
        (nbasis.transpose() * (*opts.initial_point - x0)).eval();
  }

  out = solve_core(reduced, reduced_opts);
  if (out.primal.size() == m) {
    out.primal = x0 + nbasis * out.primal;
    out.objective_value = prog.objective().eval(out.primal);
    if (out.status == SolveStatus::kOptimal) {
      out.max_violation = max_violation(prog, out.primal);
      if (!(out.max_violation <= std::max(1e-6, 10.0 * opts.tol))) {
        out.status = SolveStatus::kNumericalFailure;
      }
    }
  }
  return out;
}

Solution solve(const ConicProgram& prog, double tol) {
  SolveOptions opts;
  opts.tol = tol;
  return solve(prog, opts);
}

}  // namespace risres::conic
