#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "fwsens/geometry.hpp"
#include "fwsens/lp_oracle.hpp"
#include "fwsens/objective.hpp"

namespace fwsens {

enum class StepRule {
  ExactLineSearch,  // requires QuadraticStructure
  OpenLoop,         // gamma_t = 2 / (t + 2)
};

struct FWConfig {
  long max_iter = 10000;
  double gap_tol = 1e-6;
  bool record_trace = false;
  StepRule step_rule = StepRule::ExactLineSearch;

  void validate() const {
    if (max_iter < 1) throw std::invalid_argument("FWConfig: max_iter must be >= 1");
    if (!(gap_tol > 0.0)) throw std::invalid_argument("FWConfig: gap_tol must be > 0");
  }
};

struct WeightedVertex {
  Vector vertex;
  double weight = 0.0;
};

struct TraceRecord {
  long iteration = 0;
  double f_value = 0.0;
  double gap = 0.0;
  double lower_bound = 0.0;  // running maximum of f - gap
};

struct FWResult {
  Vector x;
  double fw_gap = 0.0;
  double f_value = 0.0;
  double lower_bound = 0.0;       // f_value - fw_gap at the final x
  double best_lower_bound = 0.0;  // running maximum over all iterates
  long iterations = 0;
  bool converged = false;
  std::vector<WeightedVertex> decomposition;
  PrimalDualPair last_pair;
  std::vector<TraceRecord> trace;
};

struct GapResult {
  double gap = 0.0;
  PrimalDualPair pair;
};

/// Frank-Wolfe gap max_{z in P} grad f(x) (x - z) and the LMO certificate
/// behind it.
template <SmoothObjective F>
GapResult fw_gap(const F& f, const Polytope& P, const Vector& x, double tol = kFeasibilityTol) {
  if (!contains(P, x, tol)) throw std::invalid_argument("fw_gap: x is not feasible");
  const Vector g = f.gradient(x);
  GapResult out;
  out.pair = solve_lmo(P, g);
  out.gap = g.dot(x - out.pair.v);
  return out;
}

/// argmin_{0 <= gamma <= 1} f(x + gamma d) for a quadratic objective.
template <QuadraticStructure F>
double exact_line_search(const F& f, const Vector& x, const Vector& d) {
  const double slope = f.gradient(x).dot(d);
  const double curv = f.curvature(d);
  if (curv > 1e-14) return std::clamp(-slope / curv, 0.0, 1.0);
  return slope < 0.0 ? 1.0 : 0.0;
}

/// Start point for callers without one: the vertex returned for the zero
/// objective.
inline Vector default_start(const Polytope& P) { return solve_lmo(P, Vector::Zero(P.dim())).v; }

namespace detail {

inline void add_atom(std::vector<WeightedVertex>& atoms, const Vector& v, double gamma) {
  for (auto& a : atoms) a.weight *= (1.0 - gamma);
  bool merged = false;
  for (auto& a : atoms) {
    if ((a.vertex - v).lpNorm<Eigen::Infinity>() <= 1e-12) {
      a.weight += gamma;
      merged = true;
      break;
    }
  }
  if (!merged) atoms.push_back({v, gamma});
  std::erase_if(atoms, [](const WeightedVertex& a) { return a.weight < 1e-12; });
  double total = 0.0;
  for (const auto& a : atoms) total += a.weight;
  for (auto& a : atoms) a.weight /= total;
}

}  // namespace detail

/// Vanilla Frank-Wolfe: v_t = LMO(grad f(x_t)), gamma_t by line search,
/// x_{t+1} = x_t + gamma_t (v_t - x_t). Stops once the gap is <= gap_tol or
/// after max_iter updates. The decomposition starts from x0 as its own atom
/// and adds one vertex per step.
template <SmoothObjective F>
FWResult run_fw(const F& f, const Polytope& P, const Vector& x0, const FWConfig& cfg) {
  cfg.validate();
  require_dim(f.dim(), P.dim(), "run_fw: objective");
  if (!contains(P, x0, kFeasibilityTol)) throw std::invalid_argument("run_fw: x0 is not feasible");
  if constexpr (!QuadraticStructure<F>) {
    if (cfg.step_rule == StepRule::ExactLineSearch) {
      throw std::invalid_argument("run_fw: exact line search needs a quadratic objective");
    }
  }

  FWResult res;
  res.x = x0;
  res.decomposition.push_back({x0, 1.0});
  double best_lower = -std::numeric_limits<double>::infinity();

  for (long t = 0;; ++t) {
    const Vector g = f.gradient(res.x);
    PrimalDualPair pair = solve_lmo(P, g);
    const double fx = f.value(res.x);
    const double gap = g.dot(res.x - pair.v);
    best_lower = std::max(best_lower, fx - gap);
    if (cfg.record_trace) res.trace.push_back({t, fx, gap, best_lower});

    res.f_value = fx;
    res.fw_gap = gap;
    res.iterations = t;
    res.last_pair = pair;
    if (gap <= cfg.gap_tol) {
      res.converged = true;
      break;
    }
    if (t >= cfg.max_iter) break;

    const Vector d = pair.v - res.x;
    double gamma = 0.0;
    if constexpr (QuadraticStructure<F>) {
      gamma = cfg.step_rule == StepRule::ExactLineSearch ? exact_line_search(f, res.x, d)
                                                         : 2.0 / static_cast<double>(t + 2);
    } else {
      gamma = 2.0 / static_cast<double>(t + 2);
    }
    res.x += gamma * d;
    detail::add_atom(res.decomposition, pair.v, gamma);
  }

  res.lower_bound = res.f_value - res.fw_gap;
  res.best_lower_bound = best_lower;
  return res;
}

struct ValueBounds {
  double lower = 0.0;
  double upper = 0.0;
};

/// f(x) - gap(x) <= min_P f <= f(x).
template <SmoothObjective F>
ValueBounds optimal_value_bounds(const F& f, const Polytope& P, const Vector& x) {
  const auto g = fw_gap(f, P, x);
  const double fx = f.value(x);
  return {fx - g.gap, fx};
}

}  // namespace fwsens
