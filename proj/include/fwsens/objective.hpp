#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <stdexcept>
#include <utility>

#include "fwsens/linalg.hpp"

namespace fwsens {

/// A differentiable convex function with a Euclidean smoothness constant.
/// The gradient is returned as a column vector and used as a row
/// functional (g.dot(z)).
template <typename F>
concept SmoothObjective = requires(const F& f, const Vector& x) {
  { f.dim() } -> std::convertible_to<Eigen::Index>;
  { f.value(x) } -> std::convertible_to<double>;
  { f.gradient(x) } -> std::convertible_to<Vector>;
  { f.smoothness() } -> std::convertible_to<double>;
};

/// Objectives whose restriction to a line is an exact quadratic, which is
/// what exact line search needs: curvature(d) = d^T Q d.
template <typename F>
concept QuadraticStructure = SmoothObjective<F> && requires(const F& f, const Vector& d) {
  { f.curvature(d) } -> std::convertible_to<double>;
};

inline constexpr double kPsdTol = 1e-9;

/// Largest eigenvalue of a symmetric PSD matrix, as an upper bound.
///
/// Power iteration gives a Rayleigh-quotient estimate mu <= lambda_max. The
/// estimate is then certified by an LDLT factorization of (mu(1+eta) I - Q)
/// for increasing eta up to 1e-6; the first eta for which that matrix is PSD
/// gives the returned bound. If nothing certifies, the Gershgorin bound is
/// returned instead.
inline double largest_eigenvalue_bound(const Eigen::MatrixXd& Q) {
  const Eigen::Index n = Q.rows();
  if (n == 0 || Q.cwiseAbs().maxCoeff() == 0.0) return 0.0;

  Eigen::VectorXd u(n);
  for (Eigen::Index i = 0; i < n; ++i) u[i] = 1.0 + 1.0 / static_cast<double>(i + 2);
  u.normalize();
  double mu = u.dot(Q * u);
  for (int it = 0; it < 10000; ++it) {
    Eigen::VectorXd w = Q * u;
    const double norm = w.norm();
    if (norm == 0.0) break;
    u = w / norm;
    const double next = u.dot(Q * u);
    const bool done = std::abs(next - mu) <= 1e-15 * std::abs(next);
    mu = next;
    if (done && it > 8) break;
  }

  const double gershgorin = Q.cwiseAbs().rowwise().sum().maxCoeff();
  if (mu > 0.0) {
    constexpr std::array<double, 6> etas{0.0, 1e-12, 1e-10, 1e-9, 1e-8, 1e-7};
    for (double eta : etas) {
      const double L = mu * (1.0 + eta);
      const Eigen::MatrixXd shifted = L * Eigen::MatrixXd::Identity(n, n) - Q;
      Eigen::LDLT<Eigen::MatrixXd> ldlt(shifted);
      if (ldlt.info() == Eigen::Success && (ldlt.vectorD().array() >= 0.0).all()) {
        return std::min(L, gershgorin);
      }
    }
  }
  return gershgorin;
}

/// f(x) = 1/2 x^T Q x + c^T x + r with Q symmetric positive semidefinite.
class QuadraticObjective {
 public:
  QuadraticObjective(Eigen::MatrixXd Q, Vector c, double r = 0.0) : Q_(std::move(Q)), c_(std::move(c)), r_(r) {
    if (Q_.rows() != Q_.cols()) throw DimensionError("QuadraticObjective: Q must be square");
    require_dim(c_.size(), Q_.rows(), "QuadraticObjective: c");
    if (!Q_.allFinite() || !c_.allFinite() || !std::isfinite(r_)) {
      throw std::invalid_argument("QuadraticObjective: entries must be finite");
    }
    Q_ = (0.5 * (Q_ + Q_.transpose())).eval();
    if (Q_.rows() > 0) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(Q_, Eigen::EigenvaluesOnly);
      if (eig.info() != Eigen::Success || eig.eigenvalues().minCoeff() < -kPsdTol) {
        throw std::invalid_argument("QuadraticObjective: Q is not positive semidefinite");
      }
    }
    L_ = largest_eigenvalue_bound(Q_);
  }

  /// Isotropic bowl 1/2 ||x - center||^2.
  static QuadraticObjective distance_to(const Vector& center) {
    const auto n = center.size();
    return QuadraticObjective(Eigen::MatrixXd::Identity(n, n), -center, 0.5 * center.squaredNorm());
  }

  Eigen::Index dim() const { return Q_.rows(); }
  const Eigen::MatrixXd& Q() const { return Q_; }
  const Vector& c() const { return c_; }
  double r() const { return r_; }

  double value(const Vector& x) const {
    require_dim(x.size(), dim(), "QuadraticObjective::value: x");
    return 0.5 * x.dot(Q_ * x) + c_.dot(x) + r_;
  }

  Vector gradient(const Vector& x) const {
    require_dim(x.size(), dim(), "QuadraticObjective::gradient: x");
    return Q_ * x + c_;
  }

  double curvature(const Vector& d) const { return d.dot(Q_ * d); }

  double smoothness() const { return L_; }

 private:
  Eigen::MatrixXd Q_;
  Vector c_;
  double r_;
  double L_ = 0.0;
};

inline double smoothness_constant(const QuadraticObjective& f) { return f.smoothness(); }

/// Wraps an objective and overrides its smoothness constant. Used to audit
/// what happens with a wrong L.
template <SmoothObjective F>
class WithSmoothness {
 public:
  WithSmoothness(const F& f, double L) : f_(f), L_(L) {}
  Eigen::Index dim() const { return f_.dim(); }
  double value(const Vector& x) const { return f_.value(x); }
  Vector gradient(const Vector& x) const { return f_.gradient(x); }
  double curvature(const Vector& d) const
    requires QuadraticStructure<F>
  {
    return f_.curvature(d);
  }
  double smoothness() const { return L_; }
  const F& base() const { return f_; }

 private:
  F f_;
  double L_;
};

/// max_i |(f(x + h e_i) - f(x - h e_i)) / 2h - grad_i f(x)|
template <SmoothObjective F>
double check_gradient_fd(const F& f, const Vector& x, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("check_gradient_fd: h must be positive");
  require_dim(x.size(), f.dim(), "check_gradient_fd: x");
  const Vector g = f.gradient(x);
  double worst = 0.0;
  Vector probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + h;
    const double up = f.value(probe);
    probe[i] = x[i] - h;
    const double down = f.value(probe);
    probe[i] = x[i];
    worst = std::max(worst, std::abs((up - down) / (2.0 * h) - g[i]));
  }
  return worst;
}

}  // namespace fwsens
