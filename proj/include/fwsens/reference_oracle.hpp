#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "fwsens/geometry.hpp"
#include "fwsens/lp_oracle.hpp"
#include "fwsens/objective.hpp"
#include "fwsens/sensitivity.hpp"

// Brute-force solvers for desk-scale instances. Nothing here calls the
// simplex code or Frank-Wolfe, so the results can be used to check them.

namespace fwsens {

struct ExactSolution {
  Vector x_star;
  double f_star = 0.0;
  std::vector<std::size_t> active_rows;
  Vector kkt_multipliers;
};

/// Exact convex QP over a small polytope by active-set enumeration.
///
/// For every row subset S with |S| <= n, solves
///
///   Q x + A_S^T mu = -c,   A_S x = b_S
///
/// and keeps solutions with x in P and mu >= 0. Singular systems are
/// skipped; an optimum always has some supporting S of independent rows for
/// which the system is nonsingular, so sizes above n are not needed.
/// Ties in f are broken towards the lexicographically smallest x.
inline ExactSolution exact_qp_solve(const QuadraticObjective& f, const Polytope& P,
                                    double feas_tol = kFeasibilityTol) {
  require_enumerable(P, "exact_qp_solve");
  require_dim(f.dim(), P.dim(), "exact_qp_solve: objective");
  const Eigen::Index n = P.dim();
  const auto m = static_cast<std::size_t>(P.rows());

  std::optional<ExactSolution> best;
  for (std::size_t k = 0; k <= std::min<std::size_t>(m, static_cast<std::size_t>(n)); ++k) {
    detail::for_each_subset(m, k, [&](const std::vector<std::size_t>& S) {
      const auto s = static_cast<Eigen::Index>(S.size());
      Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n + s, n + s);
      Eigen::VectorXd rhs(n + s);
      K.topLeftCorner(n, n) = f.Q();
      rhs.head(n) = -f.c();
      for (Eigen::Index k2 = 0; k2 < s; ++k2) {
        const auto row = static_cast<Eigen::Index>(S[static_cast<std::size_t>(k2)]);
        K.block(n + k2, 0, 1, n) = P.A().row(row);
        K.block(0, n + k2, n, 1) = P.A().row(row).transpose();
        rhs[n + k2] = P.b()[row];
      }
      Eigen::FullPivLU<Eigen::MatrixXd> lu(K);
      lu.setThreshold(1e-10);
      if (!lu.isInvertible()) return;
      const Eigen::VectorXd sol = lu.solve(rhs);
      if (!sol.allFinite()) return;
      const Vector x = sol.head(n);
      if (s > 0 && sol.tail(s).minCoeff() < -1e-9) return;
      if (!contains(P, x, feas_tol)) return;

      const double fx = f.value(x);
      if (best) {
        const double tie = 1e-12 * std::max(1.0, std::abs(best->f_star));
        if (fx > best->f_star + tie) return;
        if (fx >= best->f_star - tie && !detail::lex_less(x, best->x_star)) return;
      }
      ExactSolution cand;
      cand.x_star = x;
      cand.f_star = fx;
      cand.active_rows = S;
      cand.kkt_multipliers = Vector::Zero(P.rows());
      for (Eigen::Index k2 = 0; k2 < s; ++k2) {
        cand.kkt_multipliers[static_cast<Eigen::Index>(S[static_cast<std::size_t>(k2)])] =
            std::max(0.0, sol[n + k2]);
      }
      best = std::move(cand);
    });
  }
  if (!best) throw LpError(LpError::Kind::Infeasible, "exact_qp_solve: no feasible KKT point (empty polytope?)");
  return *best;
}

struct KktResiduals {
  double stationarity = 0.0;
  double complementarity = 0.0;
  double feasibility = 0.0;
  double dual_sign = 0.0;
  double max() const { return std::max({stationarity, complementarity, feasibility, dual_sign}); }
};

inline KktResiduals kkt_residuals(const QuadraticObjective& f, const Polytope& P, const ExactSolution& s) {
  const Vector slack = P.slack(s.x_star);
  KktResiduals r;
  r.stationarity = (f.gradient(s.x_star) + P.A().transpose() * s.kkt_multipliers).lpNorm<Eigen::Infinity>();
  r.complementarity = s.kkt_multipliers.cwiseProduct(slack).cwiseAbs().maxCoeff();
  r.feasibility = std::max(0.0, (-slack).maxCoeff());
  r.dual_sign = std::max(0.0, (-s.kkt_multipliers).maxCoeff());
  return r;
}

struct BruteForceLp {
  double value = 0.0;
  std::vector<Vector> argmin_vertices;
};

inline BruteForceLp brute_force_lp(const Polytope& P, const Vector& c, double tie_tol = 1e-9) {
  require_dim(c.size(), P.dim(), "brute_force_lp: c");
  const auto vertices = enumerate_vertices(P);
  if (vertices.empty()) throw LpError(LpError::Kind::Infeasible, "brute_force_lp: polytope has no vertices");
  BruteForceLp out;
  out.value = std::numeric_limits<double>::infinity();
  for (const auto& v : vertices) out.value = std::min(out.value, c.dot(v));
  for (const auto& v : vertices) {
    if (c.dot(v) <= out.value + tie_tol) out.argmin_vertices.push_back(v);
  }
  return out;
}

/// One inequality lhs <= rhs of the sandwich, with slack rhs - lhs.
struct AuditEntry {
  std::string name;
  bool evaluated = false;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;
};

struct AuditReport {
  SensitivityReport analysis;
  double f_star = 0.0;        // min over P
  double f_star_prime = 0.0;  // min over P'
  double f_x_prime = 0.0;
  std::vector<AuditEntry> entries;
  bool pass = false;
};

inline constexpr double kAuditTol = 1e-7;

struct AuditOptions {
  double tol = kFeasibilityTol;
  std::optional<double> smoothness_override;
};

/// Substitutes exact optima into every inequality of the three sandwiches
/// (2 for P, 3 each for the perturbed bounds). Inequalities whose hypotheses
/// fail are listed but not evaluated.
inline AuditReport sandwich_audit(const QuadraticObjective& f, const Polytope& P, const Vector& b_prime,
                                  const Vector& x, const AuditOptions& opts = {}) {
  require_enumerable(P, "sandwich_audit");
  AuditReport rep;
  const double L = opts.smoothness_override.value_or(f.smoothness());
  rep.analysis = analyze(WithSmoothness<QuadraticObjective>(f, L), P, b_prime, x, opts.tol);
  const Polytope P_prime = perturb_rhs(P, b_prime);
  rep.f_star = exact_qp_solve(f, P).f_star;
  rep.f_star_prime = exact_qp_solve(f, P_prime).f_star;
  rep.f_x_prime = f.value(rep.analysis.x_prime);

  const auto& a = rep.analysis;
  auto add = [&](std::string name, bool evaluated, double lhs, double rhs) {
    AuditEntry e{std::move(name), evaluated, lhs, rhs, evaluated ? rhs - lhs : 0.0};
    rep.entries.push_back(std::move(e));
  };
  add("eq1.lower", true, a.eq1.lower, rep.f_star);
  add("eq1.upper", true, rep.f_star, a.f_value);

  add("eq2.lower", true, a.eq2.lower, rep.f_star_prime);
  add("eq2.middle", a.x_prime_feasible, rep.f_star_prime, rep.f_x_prime);
  add("eq2.upper", a.x_prime_feasible, rep.f_x_prime, a.eq2.upper.value_or(0.0));

  const bool eq3 = a.eq3.has_value();
  const bool eq3_upper = eq3 && a.eq3->upper.has_value();
  add("eq3.lower", eq3, eq3 ? a.eq3->lower : 0.0, rep.f_star_prime);
  add("eq3.middle", eq3_upper, rep.f_star_prime, rep.f_x_prime);
  add("eq3.upper", eq3_upper, rep.f_x_prime, eq3_upper ? *a.eq3->upper : 0.0);

  rep.pass = true;
  for (const auto& e : rep.entries) {
    if (e.evaluated && e.slack < -kAuditTol) rep.pass = false;
  }
  return rep;
}

}  // namespace fwsens
