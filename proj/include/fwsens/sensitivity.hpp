#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "fwsens/fw_solver.hpp"
#include "fwsens/geometry.hpp"
#include "fwsens/lp_oracle.hpp"
#include "fwsens/objective.hpp"

namespace fwsens {

struct Interval {
  double lower = 0.0;
  std::optional<double> upper;  // absent when its hypothesis does not hold

  double width() const { return upper ? *upper - lower : std::numeric_limits<double>::infinity(); }
};

/// Everything needed to bound min_{P'} f from information computed at x in P.
///
///   eq1: [f(x) - gap, f(x)]                                    brackets min_P f
///   eq2: [f(x) - gap + g(v'-v), f(x) + g(v'-v) + L/2|v'-v|^2]  needs x' in P' for the upper end
///   eq3: eq2 with g(v'-v) replaced by lambda (b - b')           needs lambda to certify v' in P'
struct SensitivityReport {
  Vector x;
  double f_value = 0.0;
  double gap = 0.0;
  Vector v;
  Vector lambda;
  Vector v_prime;
  Vector lambda_prime;
  bool common_dual = false;
  Vector x_prime;
  bool x_prime_feasible = false;
  std::vector<std::size_t> violated_rows;
  bool minimal_face_ok = false;
  double smoothness = 0.0;
  Interval eq1;
  Interval eq2;
  std::optional<Interval> eq3;
  double linear_change = 0.0;     // g (v' - v)
  double predicted_change = 0.0;  // lambda (b - b')
  double curvature_term = 0.0;    // L/2 |v' - v|^2

  bool assumptions_hold() const { return common_dual && x_prime_feasible; }
};

enum class RowClass { Equal, Strict };

struct RowViolation {
  std::size_t row = 0;
  RowClass row_class = RowClass::Strict;  // split of x in the unperturbed P
  double excess = 0.0;                    // a_i x' - b'_i
};

struct TranslationCheck {
  bool feasible = false;
  Vector x_prime;
  std::vector<RowViolation> violations;
};

/// Is x' = x - v + v' in P'? Violations are labelled by the ActiveSplit of x
/// in P: tight rows can only fail by roundoff, strict rows fail when b' moved
/// too far.
inline TranslationCheck check_translation(const Polytope& P, const Polytope& P_prime, const Vector& x,
                                          const Vector& v, const Vector& v_prime, double tol = kFeasibilityTol) {
  require_dim(P_prime.rows(), P.rows(), "check_translation: P_prime");
  TranslationCheck out;
  out.x_prime = x - v + v_prime;
  const Vector excess = P_prime.A() * out.x_prime - P_prime.b();
  const Vector slack_x = P.slack(x);
  for (Eigen::Index i = 0; i < excess.size(); ++i) {
    if (excess[i] > tol) {
      const auto cls = std::abs(slack_x[i]) <= tol ? RowClass::Equal : RowClass::Strict;
      out.violations.push_back({static_cast<std::size_t>(i), cls, excess[i]});
    }
  }
  out.feasible = out.violations.empty();
  return out;
}

/// Does pair.lambda also certify v' in P' for the same objective?
/// Stationarity does not involve b, so this is feasibility of v' plus
/// lambda (b' - A v') = 0.
inline bool check_common_dual(const PrimalDualPair& pair, const Polytope& P_prime, const Vector& v_prime,
                              double tol = kFeasibilityTol) {
  require_dim(pair.lambda.size(), P_prime.rows(), "check_common_dual: lambda");
  const Vector slack = P_prime.slack(v_prime);
  if ((slack.array() < -tol).any()) return false;
  return std::abs(pair.lambda.dot(slack)) <= tol;
}

/// Every row tight at x is tight at v, i.e. v lies in the minimal face of x.
inline bool minimal_face_check(const Polytope& P, const Vector& x, const Vector& v, double tol = kFeasibilityTol) {
  const ActiveSplit split = active_split(P, x, tol);
  const Vector slack_v = P.slack(v);
  for (auto i : split.equal_rows) {
    if (std::abs(slack_v[static_cast<Eigen::Index>(i)]) > tol) return false;
  }
  return true;
}

struct OptimalityCertificate {
  bool optimal = false;
  double gap = 0.0;
  PrimalDualPair pair;
};

/// x is optimal iff it minimizes its own linearization; the LMO dual prices
/// at grad f(x) then serve as dual prices for x.
template <SmoothObjective F>
OptimalityCertificate certify_optimality(const F& f, const Polytope& P, const Vector& x,
                                         double tol = kFeasibilityTol) {
  auto g = fw_gap(f, P, x, tol);
  return {g.gap <= tol, g.gap, std::move(g.pair)};
}

template <SmoothObjective F>
SensitivityReport analyze(const F& f, const Polytope& P, const Vector& b_prime, const Vector& x,
                          double tol = kFeasibilityTol) {
  require_dim(f.dim(), P.dim(), "analyze: objective");
  if (!contains(P, x, tol)) throw std::invalid_argument("analyze: x is not feasible for P");
  const Polytope P_prime = perturb_rhs(P, b_prime);

  SensitivityReport rep;
  rep.x = x;
  const Vector g = f.gradient(x);
  const PrimalDualPair pair = solve_lmo(P, g);
  const PrimalDualPair pair_prime = solve_lmo(P_prime, g);

  rep.f_value = f.value(x);
  rep.gap = g.dot(x - pair.v);
  rep.v = pair.v;
  rep.lambda = pair.lambda;
  rep.v_prime = pair_prime.v;
  rep.lambda_prime = pair_prime.lambda;
  rep.common_dual = check_common_dual(pair, P_prime, pair_prime.v, tol);

  const TranslationCheck tr = check_translation(P, P_prime, x, pair.v, pair_prime.v, tol);
  rep.x_prime = tr.x_prime;
  rep.x_prime_feasible = tr.feasible;
  for (const auto& viol : tr.violations) rep.violated_rows.push_back(viol.row);
  rep.minimal_face_ok = minimal_face_check(P, x, pair.v, tol);

  const Vector step = pair_prime.v - pair.v;
  rep.smoothness = f.smoothness();
  rep.linear_change = g.dot(step);
  rep.predicted_change = pair.lambda.dot(P.b() - b_prime);
  rep.curvature_term = 0.5 * rep.smoothness * step.squaredNorm();

  rep.eq1 = {rep.f_value - rep.gap, rep.f_value};
  rep.eq2.lower = rep.f_value - rep.gap + rep.linear_change;
  if (rep.x_prime_feasible) rep.eq2.upper = rep.f_value + rep.linear_change + rep.curvature_term;
  if (rep.common_dual) {
    Interval eq3;
    eq3.lower = rep.f_value - rep.gap + rep.predicted_change;
    if (rep.x_prime_feasible) eq3.upper = rep.f_value + rep.predicted_change + rep.curvature_term;
    rep.eq3 = eq3;
  }
  return rep;
}

struct AdmissiblePerturbation {
  bool found = false;
  double delta = 0.0;
  int halvings = 0;
};

/// Halves delta (added to the selected rows of b) until both the
/// common-dual and translation hypotheses hold, or |delta| < min_delta.
template <SmoothObjective F>
AdmissiblePerturbation shrink_until_admissible(const F& f, const Polytope& P, const Vector& x,
                                               const std::vector<std::size_t>& rows, double delta,
                                               double min_delta = 1e-6, double tol = kFeasibilityTol) {
  AdmissiblePerturbation out;
  out.delta = delta;
  while (std::abs(out.delta) >= min_delta) {
    Vector b_prime = P.b();
    for (auto r : rows) b_prime[static_cast<Eigen::Index>(r)] += out.delta;
    try {
      if (analyze(f, P, b_prime, x, tol).assumptions_hold()) {
        out.found = true;
        return out;
      }
    } catch (const LpError&) {
      // P' empty or degenerate at this delta; keep shrinking.
    }
    out.delta *= 0.5;
    ++out.halvings;
  }
  return out;
}

}  // namespace fwsens
