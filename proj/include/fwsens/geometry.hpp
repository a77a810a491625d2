#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <utility>
#include <vector>

#include "fwsens/linalg.hpp"

namespace fwsens {

/// Feasible region {z : A z <= b} stored as a dense inequality system.
///
/// Row i of A is the constraint normal a_i. Instances are immutable once
/// built; perturbing the right-hand side yields a new polytope.
class Polytope {
 public:
  Polytope(Matrix A, Vector b) : A_(std::move(A)), b_(std::move(b)) {
    if (A_.rows() < 1 || A_.cols() < 1) {
      throw DimensionError("Polytope: A must have at least one row and one column");
    }
    require_dim(b_.size(), A_.rows(), "Polytope: b");
    if (!A_.allFinite() || !b_.allFinite()) {
      throw std::invalid_argument("Polytope: entries must be finite");
    }
  }

  const Matrix& A() const { return A_; }
  const Vector& b() const { return b_; }
  Eigen::Index rows() const { return A_.rows(); }
  Eigen::Index dim() const { return A_.cols(); }

  /// Slack b - A x.
  Vector slack(const Vector& x) const {
    require_dim(x.size(), dim(), "Polytope::slack: x");
    return b_ - A_ * x;
  }

 private:
  Matrix A_;
  Vector b_;
};

/// Partition of the constraint rows by whether they are tight at a point.
struct ActiveSplit {
  std::vector<std::size_t> equal_rows;
  std::vector<std::size_t> strict_rows;
};

inline bool contains(const Polytope& P, const Vector& x, double tol = kFeasibilityTol) {
  require_dim(x.size(), P.dim(), "contains: x");
  if (tol < 0) throw std::invalid_argument("contains: tol must be nonnegative");
  return ((P.A() * x - P.b()).array() <= tol).all();
}

inline ActiveSplit active_split(const Polytope& P, const Vector& x, double tol = kFeasibilityTol) {
  if (!contains(P, x, tol)) {
    throw std::invalid_argument("active_split: point is not feasible for the polytope");
  }
  const Vector s = P.slack(x);
  ActiveSplit split;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (std::abs(s[i]) <= tol) {
      split.equal_rows.push_back(static_cast<std::size_t>(i));
    } else {
      split.strict_rows.push_back(static_cast<std::size_t>(i));
    }
  }
  return split;
}

/// Same constraint matrix, new right-hand side. Never fails on feasibility;
/// an empty P' is reported by whoever solves over it.
inline Polytope perturb_rhs(const Polytope& P, const Vector& b_new) {
  require_dim(b_new.size(), P.rows(), "perturb_rhs: b_new");
  return Polytope(P.A(), b_new);
}

inline constexpr Eigen::Index kMaxEnumerationDim = 8;
inline constexpr Eigen::Index kMaxEnumerationRows = 16;

class SizeGuardError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline void require_enumerable(const Polytope& P, const char* who) {
  if (P.dim() > kMaxEnumerationDim || P.rows() > kMaxEnumerationRows) {
    throw SizeGuardError(std::string(who) + ": instance too large for enumeration (n <= " +
                         std::to_string(kMaxEnumerationDim) + ", m <= " +
                         std::to_string(kMaxEnumerationRows) + ")");
  }
}

namespace detail {

/// Calls visit(indices) for every k-subset of {0..m-1} in lexicographic order.
template <typename Visit>
void for_each_subset(std::size_t m, std::size_t k, Visit&& visit) {
  if (k > m) return;
  std::vector<std::size_t> idx(k);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  while (true) {
    visit(static_cast<const std::vector<std::size_t>&>(idx));
    if (k == 0) return;
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == m - k + (i - 1)) --i;
    if (i == 0) return;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

inline bool lex_less(const Vector& a, const Vector& b) {
  return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
}

}  // namespace detail

/// Brute-force vertex enumeration: every nonsingular n-subset of rows solved
/// as an equality system, filtered by feasibility, deduplicated, sorted
/// lexicographically. Only meant for small reference instances.
inline std::vector<Vector> enumerate_vertices(const Polytope& P, double feas_tol = kFeasibilityTol,
                                              double dedup_tol = 1e-9) {
  require_enumerable(P, "enumerate_vertices");
  const auto n = static_cast<std::size_t>(P.dim());
  const auto m = static_cast<std::size_t>(P.rows());
  std::vector<Vector> vertices;
  Matrix As(P.dim(), P.dim());
  Vector bs(P.dim());
  detail::for_each_subset(m, n, [&](const std::vector<std::size_t>& rows) {
    for (std::size_t k = 0; k < n; ++k) {
      As.row(static_cast<Eigen::Index>(k)) = P.A().row(static_cast<Eigen::Index>(rows[k]));
      bs[static_cast<Eigen::Index>(k)] = P.b()[static_cast<Eigen::Index>(rows[k])];
    }
    Eigen::FullPivLU<Matrix> lu(As);
    lu.setThreshold(1e-10);
    if (!lu.isInvertible()) return;
    Vector v = lu.solve(bs);
    if (!v.allFinite() || !contains(P, v, feas_tol)) return;
    for (const auto& w : vertices) {
      if ((w - v).norm() <= dedup_tol) return;
    }
    vertices.push_back(std::move(v));
  });
  std::sort(vertices.begin(), vertices.end(), detail::lex_less);
  return vertices;
}

}  // namespace fwsens
