#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "fwsens/cli/problem.hpp"
#include "fwsens/fw_solver.hpp"
#include "fwsens/reference_oracle.hpp"
#include "fwsens/sensitivity.hpp"

// Command implementations behind the fwsens executable. Each command writes
// its report to `out`, diagnostics to `err`, and returns the process exit
// code.

namespace fwsens::cli {

namespace exit_code {
inline constexpr int kOk = 0;
inline constexpr int kInputError = 1;
inline constexpr int kIterationCap = 2;
inline constexpr int kCheckFailed = 3;  // sensitivity flags or audit inequalities
inline constexpr int kSizeGuard = 4;
}  // namespace exit_code

/// Shortest round-trip decimal for a double.
inline std::string format_real(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

inline void write_json(std::ostream& out, const json& j) { out << j.dump(2) << '\n'; }

struct SolveOptions {
  std::string problem_path;
  double epsilon = 1e-6;
  long max_iter = 10000;
  std::optional<std::string> trace_path;
};

struct PointSpec {
  // Empty means: take x from an internal Frank-Wolfe solve.
  std::optional<std::string> explicit_x;
  double epsilon = 1e-6;
  long max_iter = 10000;
};

struct SensitivityOptions {
  std::string problem_path;
  std::string b_prime;
  PointSpec point;
  double tol = kFeasibilityTol;
  std::optional<double> lipschitz;
};

enum class SweepMode { SingleRow, Uniform };

struct SweepOptions {
  std::string problem_path;
  std::vector<std::size_t> rows;
  SweepMode mode = SweepMode::SingleRow;
  double delta_min = -0.1;
  double delta_max = 0.1;
  int steps = 11;
  std::optional<std::string> out_path;
  PointSpec point;
  double tol = kFeasibilityTol;
};

struct VerifyOptions {
  std::string problem_path;
  std::string b_prime;
  PointSpec point;
  double tol = kFeasibilityTol;
  std::optional<double> lipschitz;
};

inline json decomposition_json(const std::vector<WeightedVertex>& atoms) {
  json arr = json::array();
  for (const auto& a : atoms) arr.push_back({{"vertex", to_json(a.vertex)}, {"weight", a.weight}});
  return arr;
}

inline json solve_report(const ProblemFile& p, const FWResult& r) {
  json j = json::object();
  if (p.name) j["name"] = *p.name;
  j["x"] = to_json(r.x);
  j["f_value"] = r.f_value;
  j["fw_gap"] = r.fw_gap;
  j["lower_bound"] = r.lower_bound;
  j["best_lower_bound"] = r.best_lower_bound;
  j["iterations"] = r.iterations;
  j["converged"] = r.converged;
  j["decomposition"] = decomposition_json(r.decomposition);
  j["fw_vertex"] = to_json(r.last_pair.v);
  j["lambda"] = to_json(r.last_pair.lambda);
  return j;
}

namespace detail {

inline json interval_json(const Interval& iv) {
  json j = {{"lower", iv.lower}};
  j["upper"] = iv.upper ? json(*iv.upper) : json(nullptr);
  return j;
}

inline json rows_json(const std::vector<std::size_t>& rows) {
  json arr = json::array();
  for (auto r : rows) arr.push_back(r);
  return arr;
}

inline FWResult solve_problem(const ProblemFile& p, double epsilon, long max_iter, bool trace) {
  const Polytope P = p.polytope();
  const QuadraticObjective f = p.objective();
  const Vector x0 = p.x0 ? *p.x0 : default_start(P);
  if (!contains(P, x0, kFeasibilityTol)) throw InputError("field 'x0' is not feasible for A x <= b");
  FWConfig cfg;
  cfg.gap_tol = epsilon;
  cfg.max_iter = max_iter;
  cfg.record_trace = trace;
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  return run_fw(f, P, x0, cfg);
}

inline Vector analysis_point(const ProblemFile& p, const PointSpec& spec) {
  if (spec.explicit_x) {
    Vector x = parse_vector_arg(*spec.explicit_x, "x");
    if (x.size() != p.A.cols()) throw InputError("field 'x' must have " + std::to_string(p.A.cols()) + " entries");
    return x;
  }
  return solve_problem(p, spec.epsilon, spec.max_iter, false).x;
}

inline Vector read_b_prime(const ProblemFile& p, const std::string& arg) {
  Vector bp = parse_vector_arg(arg, "b_prime");
  if (bp.size() != p.b.size()) throw InputError("field 'b_prime' must have " + std::to_string(p.b.size()) + " entries");
  return bp;
}

// Runs body and maps exceptions onto exit codes with a one-line diagnostic.
template <typename Body>
int guarded(std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const SizeGuardError& e) {
    err << "error: " << e.what() << '\n';
    return exit_code::kSizeGuard;
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
  } catch (const LpError& e) {
    err << "error: " << e.what() << '\n';
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
  }
  return exit_code::kInputError;
}

}  // namespace detail

inline json sensitivity_json(const SensitivityReport& r) {
  json j = json::object();
  j["x"] = to_json(r.x);
  j["f_value"] = r.f_value;
  j["gap"] = r.gap;
  j["v"] = to_json(r.v);
  j["lambda"] = to_json(r.lambda);
  j["v_prime"] = to_json(r.v_prime);
  j["lambda_prime"] = to_json(r.lambda_prime);
  j["common_dual"] = r.common_dual;
  j["x_prime"] = to_json(r.x_prime);
  j["x_prime_feasible"] = r.x_prime_feasible;
  j["violated_rows"] = detail::rows_json(r.violated_rows);
  j["minimal_face_ok"] = r.minimal_face_ok;
  j["smoothness"] = r.smoothness;
  j["eq1"] = detail::interval_json(r.eq1);
  j["eq2"] = detail::interval_json(r.eq2);
  j["eq3"] = r.eq3 ? detail::interval_json(*r.eq3) : json(nullptr);
  j["linear_change"] = r.linear_change;
  j["predicted_change"] = r.predicted_change;
  j["curvature_term"] = r.curvature_term;
  j["verified"] = r.assumptions_hold();
  if (!r.assumptions_hold()) {
    j["note"] = "bounds not fully verified: reduce ||b - b'|| until common_dual and x_prime_feasible hold";
  }
  return j;
}

inline json audit_json(const AuditReport& a) {
  json entries = json::array();
  for (const auto& e : a.entries) {
    json je = {{"name", e.name}, {"evaluated", e.evaluated}};
    if (e.evaluated) {
      je["lhs"] = e.lhs;
      je["rhs"] = e.rhs;
      je["slack"] = e.slack;
    }
    entries.push_back(std::move(je));
  }
  json j = json::object();
  j["pass"] = a.pass;
  j["f_star"] = a.f_star;
  j["f_star_prime"] = a.f_star_prime;
  j["f_x_prime"] = a.f_x_prime;
  j["inequalities"] = std::move(entries);
  j["analysis"] = sensitivity_json(a.analysis);
  return j;
}

inline int cmd_solve(const SolveOptions& opt, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    const ProblemFile p = load_problem(opt.problem_path);
    const FWResult r = detail::solve_problem(p, opt.epsilon, opt.max_iter, opt.trace_path.has_value());
    if (opt.trace_path) {
      std::ofstream csv(*opt.trace_path, std::ios::binary);
      if (!csv) throw InputError("cannot write '" + *opt.trace_path + "'");
      csv << "iteration,f,gap,lower_bound\n";
      for (const auto& t : r.trace) {
        csv << t.iteration << ',' << format_real(t.f_value) << ',' << format_real(t.gap) << ','
            << format_real(t.lower_bound) << '\n';
      }
    }
    write_json(out, solve_report(p, r));
    return r.converged ? exit_code::kOk : exit_code::kIterationCap;
  });
}

inline int cmd_sensitivity(const SensitivityOptions& opt, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    const ProblemFile p = load_problem(opt.problem_path);
    const Vector bp = detail::read_b_prime(p, opt.b_prime);
    const Vector x = detail::analysis_point(p, opt.point);
    const Polytope P = p.polytope();
    const QuadraticObjective f = p.objective();
    const double L = opt.lipschitz.value_or(f.smoothness());
    const SensitivityReport r = analyze(WithSmoothness<QuadraticObjective>(f, L), P, bp, x, opt.tol);
    write_json(out, sensitivity_json(r));
    return r.assumptions_hold() ? exit_code::kOk : exit_code::kCheckFailed;
  });
}

/// Evenly spaced grid from lo to hi inclusive, computed so that grid points
/// such as 0 land exactly.
inline std::vector<double> delta_grid(double lo, double hi, int steps) {
  std::vector<double> out;
  const double denom = static_cast<double>(steps - 1);
  for (int k = 0; k < steps; ++k) {
    out.push_back((static_cast<double>(steps - 1 - k) * lo + static_cast<double>(k) * hi) / denom);
  }
  return out;
}

struct SweepPoint {
  double delta = 0.0;
  std::optional<SensitivityReport> report;  // absent when P' is empty
  std::optional<double> exact_fstar;
};

inline Vector shifted_rhs(const Vector& b, const std::vector<std::size_t>& rows, double delta) {
  Vector bp = b;
  for (auto r : rows) bp[static_cast<Eigen::Index>(r)] += delta;
  return bp;
}

inline SweepPoint sweep_point(const QuadraticObjective& f, const Polytope& P, const Vector& x,
                              const std::vector<std::size_t>& rows, double delta, double tol) {
  SweepPoint sp;
  sp.delta = delta;
  const Vector bp = shifted_rhs(P.b(), rows, delta);
  try {
    sp.report = analyze(f, P, bp, x, tol);
  } catch (const LpError&) {
    return sp;
  }
  if (P.dim() <= kMaxEnumerationDim && P.rows() <= kMaxEnumerationRows) {
    sp.exact_fstar = exact_qp_solve(f, perturb_rhs(P, bp)).f_star;
  }
  return sp;
}

inline bool flags_hold(const QuadraticObjective& f, const Polytope& P, const Vector& x,
                       const std::vector<std::size_t>& rows, double delta, double tol) {
  try {
    return analyze(f, P, shifted_rhs(P.b(), rows, delta), x, tol).assumptions_hold();
  } catch (const LpError&) {
    return false;
  }
}

/// Largest |delta| on one side of zero (sign = +1 or -1, up to `limit`)
/// for which both hypotheses hold at every grid point up to it, refined by
/// bisection between the last passing and the first failing grid point.
inline double flag_boundary(const QuadraticObjective& f, const Polytope& P, const Vector& x,
                            const std::vector<std::size_t>& rows, const std::vector<double>& grid, double sign,
                            double tol) {
  double pass = 0.0;
  std::optional<double> fail;
  std::vector<double> side;
  for (double d : grid) {
    if (d * sign > 0.0) side.push_back(std::abs(d));
  }
  std::sort(side.begin(), side.end());
  for (double mag : side) {
    if (flags_hold(f, P, x, rows, sign * mag, tol)) {
      pass = mag;
    } else {
      fail = mag;
      break;
    }
  }
  if (!fail) return sign * pass;
  double lo = pass;
  double hi = *fail;
  for (int it = 0; it < 40; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (flags_hold(f, P, x, rows, sign * mid, tol)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return sign * lo;
}

inline int cmd_sweep(const SweepOptions& opt, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    const ProblemFile p = load_problem(opt.problem_path);
    if (opt.steps < 2) throw InputError("--steps must be >= 2");
    if (!(opt.delta_min <= opt.delta_max) || !std::isfinite(opt.delta_min) || !std::isfinite(opt.delta_max)) {
      throw InputError("--delta-min must not exceed --delta-max and both must be finite");
    }
    if (opt.rows.empty()) throw InputError("--row is required");
    if (opt.mode == SweepMode::SingleRow && opt.rows.size() != 1) {
      throw InputError("single-row mode takes exactly one --row");
    }
    for (auto r : opt.rows) {
      if (r >= static_cast<std::size_t>(p.b.size())) throw InputError("--row " + std::to_string(r) + " out of range");
    }
    const Polytope P = p.polytope();
    const QuadraticObjective f = p.objective();
    const Vector x = detail::analysis_point(p, opt.point);
    if (!contains(P, x, opt.tol)) throw InputError("field 'x' is not feasible for A x <= b");

    const auto grid = delta_grid(opt.delta_min, opt.delta_max, opt.steps);
    std::ofstream file;
    if (opt.out_path) {
      file.open(*opt.out_path, std::ios::binary);
      if (!file) throw InputError("cannot write '" + *opt.out_path + "'");
    }
    std::ostream& csv = opt.out_path ? static_cast<std::ostream&>(file) : out;

    csv << "delta,gap,lambda_i,predicted_change,eq3_lower,eq3_upper,exact_fstar,common_dual,x_prime_feasible\n";
    for (double d : grid) {
      const SweepPoint sp = sweep_point(f, P, x, opt.rows, d, opt.tol);
      csv << format_real(d) << ',';
      if (!sp.report) {
        csv << ",,,,,,false,false\n";
        continue;
      }
      const auto& r = *sp.report;
      double lam = 0.0;
      for (auto row : opt.rows) lam += r.lambda[static_cast<Eigen::Index>(row)];
      csv << format_real(r.gap) << ',' << format_real(lam) << ',' << format_real(r.predicted_change) << ',';
      if (r.eq3) {
        csv << format_real(r.eq3->lower) << ',';
        if (r.eq3->upper) csv << format_real(*r.eq3->upper);
        csv << ',';
      } else {
        csv << ",,";
      }
      if (sp.exact_fstar) csv << format_real(*sp.exact_fstar);
      csv << ',' << (r.common_dual ? "true" : "false") << ',' << (r.x_prime_feasible ? "true" : "false") << '\n';
    }
    const double neg = flag_boundary(f, P, x, opt.rows, grid, -1.0, opt.tol);
    const double pos = flag_boundary(f, P, x, opt.rows, grid, 1.0, opt.tol);
    csv << "# flags_hold_delta_min=" << format_real(neg) << " flags_hold_delta_max=" << format_real(pos) << '\n';
    return exit_code::kOk;
  });
}

inline int cmd_verify(const VerifyOptions& opt, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    const ProblemFile p = load_problem(opt.problem_path);
    const Polytope P = p.polytope();
    require_enumerable(P, "verify");
    const Vector bp = detail::read_b_prime(p, opt.b_prime);
    const Vector x = detail::analysis_point(p, opt.point);
    AuditOptions ao;
    ao.tol = opt.tol;
    ao.smoothness_override = opt.lipschitz;
    const AuditReport a = sandwich_audit(p.objective(), P, bp, x, ao);
    write_json(out, audit_json(a));
    return a.pass ? exit_code::kOk : exit_code::kCheckFailed;
  });
}

}  // namespace fwsens::cli
