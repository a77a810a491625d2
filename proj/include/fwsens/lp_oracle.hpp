#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "fwsens/geometry.hpp"

namespace fwsens {

/// Vertex minimizer of a linear objective over a polytope together with the
/// dual prices certifying it: c = -lambda A, lambda >= 0, c v = -lambda b.
struct PrimalDualPair {
  Vector v;
  Vector lambda;
  double value = 0.0;
};

class LpError : public std::runtime_error {
 public:
  enum class Kind { Infeasible, Unbounded, NumericalBreakdown };

  LpError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

inline constexpr double kPivotTol = 1e-11;
inline constexpr double kCertificateTol = 1e-8;

namespace detail {

enum class SimplexStatus { Optimal, DualInfeasible, PrimalInfeasible, RankDeficient };

// Two-phase tableau simplex on the dual of min{c z : A z <= b}:
//
//   min  b^T lambda   s.t.  A^T lambda = -c^T,  lambda >= 0.
//
// A basis is a set of n rows of A, so the primal point it encodes, the
// solution of A_B v = b_B, is a vertex of P. Phase-2 optimality of the dual
// (nonnegative reduced costs b_i - a_i v) is exactly primal feasibility.
//
// Pivoting uses Bland's rule (smallest entering index, smallest leaving basic
// index among ratio ties). Equality rows whose right-hand side is <= 0 are
// sign-flipped before phase 1; that convention fixes which vertex of a
// minimizing face is returned.
class DualSimplex {
 public:
  DualSimplex(const Matrix& A, const Vector& b, const Vector& c)
      : A_(A), b_(b), m_(A.rows()), n_(A.cols()), T0_(n_, m_ + n_ + 1), cost_(m_ + n_) {
    T0_.setZero();
    for (Eigen::Index r = 0; r < n_; ++r) {
      const double rhs = -c[r];
      const double sign = rhs <= 0.0 ? -1.0 : 1.0;
      for (Eigen::Index i = 0; i < m_; ++i) T0_(r, i) = sign * A_(i, r);
      T0_(r, m_ + r) = 1.0;
      T0_(r, rhs_col()) = sign * rhs;
    }
    T_ = T0_;
    basis_.resize(static_cast<std::size_t>(n_));
    for (Eigen::Index r = 0; r < n_; ++r) basis_[static_cast<std::size_t>(r)] = m_ + r;
    redundant_.assign(static_cast<std::size_t>(n_), false);
    scale_ = 1.0 + c.lpNorm<1>();
  }

  SimplexStatus solve() {
    // Phase 1: minimize the sum of artificials.
    cost_.setZero();
    cost_.tail(n_).setOnes();
    price();
    if (!iterate(m_ + n_)) {
      // Phase 1 is bounded below by zero; an unbounded ray means breakdown.
      throw LpError(LpError::Kind::NumericalBreakdown, "solve_lmo: phase 1 reported unbounded");
    }
    if (-obj_[rhs_col()] > 1e-9 * scale_) return SimplexStatus::DualInfeasible;

    drive_out_artificials();

    // Phase 2: price rows by b.
    cost_.setZero();
    cost_.head(m_) = b_;
    price();
    if (!iterate(m_)) return SimplexStatus::PrimalInfeasible;
    for (bool red : redundant_) {
      if (red) return SimplexStatus::RankDeficient;
    }
    return SimplexStatus::Optimal;
  }

  /// Rows of A in the final basis, in tableau-row order.
  std::vector<Eigen::Index> basic_rows() const {
    std::vector<Eigen::Index> rows;
    for (auto j : basis_) {
      if (j < m_) rows.push_back(j);
    }
    return rows;
  }

 private:
  Eigen::Index rhs_col() const { return m_ + n_; }

  void pivot(Eigen::Index r, Eigen::Index j) {
    T_.row(r) /= T_(r, j);
    for (Eigen::Index i = 0; i < n_; ++i) {
      if (i == r) continue;
      const double f = T_(i, j);
      if (f != 0.0) T_.row(i) -= f * T_.row(r);
    }
    const double f = obj_[j];
    if (f != 0.0) obj_ -= f * T_.row(r).transpose();
    T_(r, j) = 1.0;
    obj_[j] = 0.0;
    basis_[static_cast<std::size_t>(r)] = j;
  }

  // Reduced costs of the current tableau under cost_.
  void price() {
    obj_ = Vector::Zero(m_ + n_ + 1);
    obj_.head(m_ + n_) = cost_;
    for (Eigen::Index r = 0; r < n_; ++r) {
      const double cb = cost_[basis_[static_cast<std::size_t>(r)]];
      if (cb != 0.0) obj_ -= cb * T_.row(r).transpose();
    }
  }

  // Rebuilds the tableau and reduced costs from the original data and the
  // current basis, discarding roundoff accumulated over pivots. Redundant
  // rows keep their artificial and are left as they are.
  bool refactor() {
    Eigen::MatrixXd B(n_, n_);
    for (Eigen::Index r = 0; r < n_; ++r) B.col(r) = T0_.col(basis_[static_cast<std::size_t>(r)]);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(B);
    if (!lu.isInvertible()) return false;
    T_ = lu.solve(T0_);
    for (Eigen::Index r = 0; r < n_; ++r) {
      T_.col(basis_[static_cast<std::size_t>(r)]).setZero();
      T_(r, basis_[static_cast<std::size_t>(r)]) = 1.0;
    }
    price();
    return true;
  }

  // Runs Bland pivots over columns [0, ncols). Returns false on an unbounded ray.
  // A claimed stop is only accepted after a refactorization confirms it.
  bool iterate(Eigen::Index ncols) {
    const long cap = 200L * (m_ + n_) * (m_ + n_) + 1000;
    bool fresh = false;
    for (long it = 0; it < cap; ++it) {
      Eigen::Index enter = -1;
      for (Eigen::Index j = 0; j < ncols; ++j) {
        if (obj_[j] < -kPivotTol) {
          enter = j;
          break;
        }
      }
      if (enter < 0) {
        if (fresh || !refactor()) return true;
        fresh = true;
        continue;
      }

      Eigen::Index leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (Eigen::Index r = 0; r < n_; ++r) {
        const double a = T_(r, enter);
        if (a <= kPivotTol) continue;
        const double ratio = std::max(T_(r, rhs_col()), 0.0) / a;
        const double tie = 1e-12 * std::max(1.0, std::abs(best));
        if (leave < 0 || ratio < best - tie) {
          best = ratio;
          leave = r;
        } else if (std::abs(ratio - best) <= tie &&
                   basis_[static_cast<std::size_t>(r)] < basis_[static_cast<std::size_t>(leave)]) {
          leave = r;
        }
      }
      if (leave < 0) {
        if (fresh || !refactor()) return false;
        fresh = true;
        continue;
      }
      pivot(leave, enter);
      fresh = false;
    }
    throw LpError(LpError::Kind::NumericalBreakdown, "solve_lmo: pivot limit exceeded");
  }

  void drive_out_artificials() {
    for (Eigen::Index r = 0; r < n_; ++r) {
      if (basis_[static_cast<std::size_t>(r)] < m_) continue;
      Eigen::Index col = -1;
      for (Eigen::Index j = 0; j < m_; ++j) {
        if (std::abs(T_(r, j)) > 1e-9) {
          col = j;
          break;
        }
      }
      if (col < 0) {
        redundant_[static_cast<std::size_t>(r)] = true;
        continue;
      }
      pivot(r, col);
    }
    // Degenerate pivots above may leave roundoff-level negative right-hand sides.
    for (Eigen::Index r = 0; r < n_; ++r) {
      if (T_(r, rhs_col()) < 0.0 && T_(r, rhs_col()) > -1e-9 * scale_) T_(r, rhs_col()) = 0.0;
    }
  }

  const Matrix& A_;
  const Vector& b_;
  Eigen::Index m_;
  Eigen::Index n_;
  Eigen::MatrixXd T0_;  // initial tableau, artificials in the basis
  Eigen::MatrixXd T_;
  Vector cost_;
  Vector obj_;
  std::vector<Eigen::Index> basis_;
  std::vector<bool> redundant_;
  double scale_;
};

inline SimplexStatus run_simplex(const Polytope& P, const Vector& c, std::vector<Eigen::Index>* rows) {
  DualSimplex simplex(P.A(), P.b(), c);
  const auto status = simplex.solve();
  if (rows != nullptr) *rows = simplex.basic_rows();
  return status;
}

}  // namespace detail

/// Linear minimization oracle. Returns a vertex minimizer of c z over P with
/// dual prices. Deterministic: identical inputs give bitwise-identical output.
inline PrimalDualPair solve_lmo(const Polytope& P, const Vector& c) {
  require_dim(c.size(), P.dim(), "solve_lmo: c");
  if (!c.allFinite()) throw std::invalid_argument("solve_lmo: objective must be finite");

  std::vector<Eigen::Index> rows;
  const auto status = detail::run_simplex(P, c, &rows);
  switch (status) {
    case detail::SimplexStatus::Optimal:
      break;
    case detail::SimplexStatus::PrimalInfeasible:
      throw LpError(LpError::Kind::Infeasible, "solve_lmo: polytope is empty");
    case detail::SimplexStatus::RankDeficient:
      throw LpError(LpError::Kind::Unbounded, "solve_lmo: polytope contains a line (A is rank deficient)");
    case detail::SimplexStatus::DualInfeasible: {
      // The dual of the zero objective is always feasible, so this probe
      // separates an empty polytope from an unbounded direction.
      const auto probe = detail::run_simplex(P, Vector::Zero(P.dim()), nullptr);
      if (probe == detail::SimplexStatus::PrimalInfeasible) {
        throw LpError(LpError::Kind::Infeasible, "solve_lmo: polytope is empty");
      }
      throw LpError(LpError::Kind::Unbounded, "solve_lmo: objective is unbounded below");
    }
  }

  const Eigen::Index n = P.dim();
  Matrix AB(n, n);
  Vector bB(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    AB.row(k) = P.A().row(rows[static_cast<std::size_t>(k)]);
    bB[k] = P.b()[rows[static_cast<std::size_t>(k)]];
  }
  Eigen::FullPivLU<Matrix> lu(AB);
  if (!lu.isInvertible()) {
    throw LpError(LpError::Kind::NumericalBreakdown, "solve_lmo: final basis is singular");
  }

  PrimalDualPair pair;
  pair.v = lu.solve(bB);
  pair.v.array() += 0.0;
  const Vector lambda_basic = lu.transpose().solve(Vector(-c));
  pair.lambda = Vector::Zero(P.rows());
  for (Eigen::Index k = 0; k < n; ++k) {
    double l = lambda_basic[k];
    if (l < 0.0) {
      if (l < -1e-7 * (1.0 + c.lpNorm<Eigen::Infinity>())) {
        throw LpError(LpError::Kind::NumericalBreakdown, "solve_lmo: negative dual price in final basis");
      }
      l = 0.0;
    }
    pair.lambda[rows[static_cast<std::size_t>(k)]] = l + 0.0;  // no negative zeros
  }
  if (!contains(P, pair.v, 1e-7 * (1.0 + P.b().lpNorm<Eigen::Infinity>()))) {
    throw LpError(LpError::Kind::NumericalBreakdown, "solve_lmo: basic solution is infeasible");
  }
  pair.value = c.dot(pair.v);
  return pair;
}

/// Residuals of the strong-duality conditions for a claimed primal-dual pair.
struct CertificateReport {
  double stationarity = 0.0;         // max |c + lambda A|
  double value_equation = 0.0;       // |c v + lambda b|
  double complementary_slackness = 0.0;  // max |lambda_i (b_i - a_i v)|
  double primal_feasibility = 0.0;   // max(0, A v - b)
  double dual_nonnegativity = 0.0;   // max(0, -lambda)
  bool valid = false;
};

inline CertificateReport verify_certificate(const Polytope& P, const Vector& c, const PrimalDualPair& pair,
                                            double tol = kCertificateTol) {
  require_dim(c.size(), P.dim(), "verify_certificate: c");
  require_dim(pair.v.size(), P.dim(), "verify_certificate: v");
  require_dim(pair.lambda.size(), P.rows(), "verify_certificate: lambda");
  CertificateReport rep;
  const Vector slack = P.slack(pair.v);
  rep.stationarity = (c + P.A().transpose() * pair.lambda).lpNorm<Eigen::Infinity>();
  rep.value_equation = std::abs(c.dot(pair.v) + pair.lambda.dot(P.b()));
  rep.complementary_slackness = pair.lambda.cwiseProduct(slack).cwiseAbs().maxCoeff();
  rep.primal_feasibility = std::max(0.0, (-slack).maxCoeff());
  rep.dual_nonnegativity = std::max(0.0, (-pair.lambda).maxCoeff());
  rep.valid = rep.stationarity <= tol && rep.value_equation <= tol && rep.complementary_slackness <= tol &&
              rep.primal_feasibility <= tol && rep.dual_nonnegativity <= tol;
  return rep;
}

/// lambda (b - A x). Equals c (x - v) whenever pair certifies the LMO at c.
inline double complementarity_gap(const Polytope& P, const Vector& x, const PrimalDualPair& pair) {
  require_dim(pair.lambda.size(), P.rows(), "complementarity_gap: lambda");
  return pair.lambda.dot(P.slack(x));
}

/// True iff every coordinate functional is bounded on P (2n LP solves).
/// Throws LpError(Infeasible) for an empty polytope.
inline bool assert_bounded(const Polytope& P) {
  for (Eigen::Index j = 0; j < P.dim(); ++j) {
    for (double sign : {1.0, -1.0}) {
      Vector c = Vector::Zero(P.dim());
      c[j] = sign;
      try {
        (void)solve_lmo(P, c);
      } catch (const LpError& e) {
        if (e.kind() == LpError::Kind::Unbounded) return false;
        throw;
      }
    }
  }
  return true;
}

}  // namespace fwsens
