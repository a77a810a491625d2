// fwsens: Frank-Wolfe solves, dual-price sensitivity analysis, perturbation
// sweeps and brute-force audits for quadratic objectives over polytopes.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fwsens/cli/commands.hpp"

namespace {

void add_point_options(CLI::App* cmd, fwsens::cli::PointSpec& point, std::string& x_arg) {
  cmd->add_option("--x", x_arg, "analysis point: 'from-solve' or an inline/file JSON array")
      ->default_val("from-solve");
  cmd->add_option("--epsilon", point.epsilon, "FW gap tolerance for the internal solve")->default_val(1e-6);
  cmd->add_option("--max-iter", point.max_iter, "iteration cap for the internal solve")->default_val(10000);
}

void resolve_point(fwsens::cli::PointSpec& point, const std::string& x_arg) {
  if (x_arg != "from-solve") point.explicit_x = x_arg;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace fwsens::cli;

  CLI::App app{"Frank-Wolfe solver with dual-price sensitivity analysis"};
  app.require_subcommand(1);

  SolveOptions solve;
  std::string trace;
  auto* solve_cmd = app.add_subcommand("solve", "run Frank-Wolfe and report the solution with dual prices");
  solve_cmd->add_option("problem", solve.problem_path, "problem JSON file")->required();
  solve_cmd->add_option("--epsilon", solve.epsilon, "stop once the FW gap is <= epsilon")->default_val(1e-6);
  solve_cmd->add_option("--max-iter", solve.max_iter, "iteration cap (>= 1)")->default_val(10000);
  solve_cmd->add_option("--trace", trace, "write per-iteration CSV trace to this file");

  SensitivityOptions sens;
  std::string sens_x;
  std::optional<double> sens_L;
  auto* sens_cmd = app.add_subcommand("sensitivity", "bound the optimal value under a perturbed right-hand side");
  sens_cmd->add_option("problem", sens.problem_path, "problem JSON file")->required();
  sens_cmd->add_option("--b-prime", sens.b_prime, "perturbed b: inline JSON array or file path")->required();
  add_point_options(sens_cmd, sens.point, sens_x);
  sens_cmd->add_option("--tol", sens.tol, "tolerance for the hypothesis checks")->default_val(1e-9);
  sens_cmd->add_option("--lipschitz", sens_L, "override the smoothness constant L");

  SweepOptions sweep;
  std::string sweep_x;
  std::string sweep_out;
  std::string sweep_mode = "single";
  auto* sweep_cmd = app.add_subcommand("sweep", "tabulate the bounds over a grid of perturbations of b");
  sweep_cmd->add_option("problem", sweep.problem_path, "problem JSON file")->required();
  sweep_cmd->add_option("--row", sweep.rows, "0-based row(s) of b to perturb")->required();
  sweep_cmd->add_option("--mode", sweep_mode, "single or uniform")
      ->check(CLI::IsMember({"single", "uniform"}))
      ->default_val("single");
  sweep_cmd->add_option("--delta-min", sweep.delta_min, "smallest delta")->required();
  sweep_cmd->add_option("--delta-max", sweep.delta_max, "largest delta")->required();
  sweep_cmd->add_option("--steps", sweep.steps, "number of grid points (>= 2)")->required();
  sweep_cmd->add_option("--out", sweep_out, "CSV output path (default: standard output)");
  add_point_options(sweep_cmd, sweep.point, sweep_x);
  sweep_cmd->add_option("--tol", sweep.tol, "tolerance for the hypothesis checks")->default_val(1e-9);

  VerifyOptions verify;
  std::string verify_x;
  std::optional<double> verify_L;
  auto* verify_cmd = app.add_subcommand("verify", "audit every bound against brute-force optima");
  verify_cmd->add_option("problem", verify.problem_path, "problem JSON file")->required();
  verify_cmd->add_option("--b-prime", verify.b_prime, "perturbed b: inline JSON array or file path")->required();
  add_point_options(verify_cmd, verify.point, verify_x);
  verify_cmd->add_option("--tol", verify.tol, "tolerance for the hypothesis checks")->default_val(1e-9);
  verify_cmd->add_option("--lipschitz", verify_L, "override the smoothness constant L");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : exit_code::kInputError;
  }

  if (*solve_cmd) {
    if (!trace.empty()) solve.trace_path = trace;
    return cmd_solve(solve, std::cout, std::cerr);
  }
  if (*sens_cmd) {
    resolve_point(sens.point, sens_x);
    sens.lipschitz = sens_L;
    return cmd_sensitivity(sens, std::cout, std::cerr);
  }
  if (*sweep_cmd) {
    resolve_point(sweep.point, sweep_x);
    sweep.mode = sweep_mode == "uniform" ? SweepMode::Uniform : SweepMode::SingleRow;
    if (!sweep_out.empty()) sweep.out_path = sweep_out;
    return cmd_sweep(sweep, std::cout, std::cerr);
  }
  resolve_point(verify.point, verify_x);
  verify.lipschitz = verify_L;
  return cmd_verify(verify, std::cout, std::cerr);
}
