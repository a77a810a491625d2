#include "fwsens/fw_solver.hpp"

#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "fwsens/reference_oracle.hpp"
#include "support/instances.hpp"

namespace fwsens {
namespace {

using testing::unit_square;
using testing::vec;

QuadraticObjective bowl_at_2_0() { return QuadraticObjective::distance_to(vec({2, 0})); }

TEST(FwGapTest, SquareExamples) {
  const auto f = bowl_at_2_0();
  const auto P = unit_square();
  auto g = fw_gap(f, P, vec({0, 0}));
  EXPECT_EQ(g.pair.v, vec({1, 0}));
  EXPECT_DOUBLE_EQ(g.gap, 2.0);
  // Cross-check: the gap is max over vertices of grad (x - z).
  double brute = -1e300;
  for (const auto& z : enumerate_vertices(P)) brute = std::max(brute, f.gradient(vec({0, 0})).dot(vec({0, 0}) - z));
  EXPECT_DOUBLE_EQ(g.gap, brute);

  g = fw_gap(f, P, vec({1, 0}));
  EXPECT_EQ(g.gap, 0.0);
  EXPECT_EQ(g.pair.v[0], 1.0);

  // Unconstrained minimizer inside P: zero gradient.
  const auto inner = QuadraticObjective::distance_to(vec({0.5, 0.5}));
  EXPECT_EQ(fw_gap(inner, P, vec({0.5, 0.5})).gap, 0.0);

  EXPECT_THROW(fw_gap(f, P, vec({3, 0})), std::invalid_argument);
}

TEST(ExactLineSearchTest, Examples) {
  const auto f = bowl_at_2_0();
  EXPECT_EQ(exact_line_search(f, vec({0, 0}), vec({1, 0})), 1.0);  // unclipped 2
  EXPECT_EQ(exact_line_search(f, vec({0, 0}), vec({0, 0})), 0.0);
  const auto origin = QuadraticObjective::distance_to(vec({0, 0}));
  EXPECT_EQ(exact_line_search(origin, vec({1, 0}), vec({-1, 0})), 1.0);

  const QuadraticObjective linear(Eigen::MatrixXd::Zero(2, 2), vec({1, 0}), 0.0);
  EXPECT_EQ(exact_line_search(linear, vec({0, 0}), vec({-1, 0})), 1.0);
  EXPECT_EQ(exact_line_search(linear, vec({0, 0}), vec({1, 0})), 0.0);
}

TEST(ExactLineSearchTest, BeatsEveryGridStep) {
  testing::InstanceGenerator gen(31);
  for (int k = 0; k < 100; ++k) {
    const auto f = gen.quadratic(3);
    const Vector x = gen.objective_vector(3);
    const Vector d = gen.objective_vector(3);
    const double gamma = exact_line_search(f, x, d);
    ASSERT_GE(gamma, 0.0);
    ASSERT_LE(gamma, 1.0);
    const double best = f.value(x + gamma * d);
    for (int s = 0; s <= 200; ++s) EXPECT_LE(best, f.value(x + (s / 200.0) * d) + 1e-12);
  }
}

TEST(RunFwTest, PinnedTieBreakConvergesInOneStep) {
  FWConfig cfg;
  cfg.gap_tol = 1e-6;
  const auto r = run_fw(bowl_at_2_0(), unit_square(), vec({0, 0}), cfg);
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.iterations, 1);
  EXPECT_EQ(r.x, vec({1, 0}));
  EXPECT_EQ(r.fw_gap, 0.0);
  EXPECT_LE(r.f_value - 0.5, 1e-6);
  EXPECT_EQ(r.lower_bound, r.f_value - r.fw_gap);
}

TEST(RunFwTest, InteriorOptimum) {
  const Polytope P = testing::centered_square();
  const auto f = QuadraticObjective::distance_to(vec({0, 0}));
  FWConfig cfg;
  cfg.gap_tol = 1e-9;
  const auto r = run_fw(f, P, vec({1, 1}), cfg);
  EXPECT_TRUE(r.converged);
  EXPECT_LE(r.fw_gap, 1e-9);
  EXPECT_LE(r.x.norm(), 1e-4);
}

TEST(RunFwTest, OptimalStartReturnsImmediately) {
  const auto r = run_fw(bowl_at_2_0(), unit_square(), vec({1, 0}), FWConfig{});
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.iterations, 0);
  ASSERT_EQ(r.decomposition.size(), 1u);
  EXPECT_EQ(r.decomposition[0].weight, 1.0);
}

TEST(RunFwTest, WorkedExampleFromDefaultStart) {
  const auto P = unit_square();
  const auto r = run_fw(testing::worked_objective(), P, default_start(P), FWConfig{});
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.x[0], 1.0, 1e-12);
  EXPECT_NEAR(r.x[1], 0.5, 1e-12);
  EXPECT_NEAR(r.f_value, 0.5, 1e-12);
}

TEST(RunFwTest, RejectsBadInputs) {
  FWConfig cfg;
  cfg.max_iter = 0;
  EXPECT_THROW(run_fw(bowl_at_2_0(), unit_square(), vec({0, 0}), cfg), std::invalid_argument);
  cfg = FWConfig{};
  cfg.gap_tol = 0.0;
  EXPECT_THROW(run_fw(bowl_at_2_0(), unit_square(), vec({0, 0}), cfg), std::invalid_argument);
  EXPECT_THROW(run_fw(bowl_at_2_0(), unit_square(), vec({2, 0}), FWConfig{}), std::invalid_argument);
}

TEST(RunFwTest, IterationCapIsReported) {
  testing::InstanceGenerator gen(8);
  const auto P = gen.polytope(4, 4, 8);
  const auto f = gen.quadratic(4);
  FWConfig cfg;
  cfg.gap_tol = 1e-14;
  cfg.max_iter = 3;
  const auto r = run_fw(f, P, default_start(P), cfg);
  if (!r.converged) {
    EXPECT_EQ(r.iterations, 3);
    EXPECT_GT(r.fw_gap, cfg.gap_tol);
  }
}

// (sum x_i^4)/4 + 1/2 |x|^2: smooth and convex but not quadratic, so only
// the open-loop step is available.
struct Quartic {
  Eigen::Index n;
  Eigen::Index dim() const { return n; }
  double value(const Vector& x) const { return 0.25 * x.array().pow(4).sum() + 0.5 * x.squaredNorm(); }
  Vector gradient(const Vector& x) const { return (x.array().pow(3) + x.array()).matrix(); }
  double smoothness() const { return 4.0; }  // on [-1,1]^n
};

TEST(RunFwTest, OpenLoopStepForNonQuadratic) {
  const Polytope P = testing::centered_square();
  FWConfig cfg;
  EXPECT_THROW(run_fw(Quartic{2}, P, vec({1, 1}), cfg), std::invalid_argument);
  cfg.step_rule = StepRule::OpenLoop;
  cfg.max_iter = 2000;
  cfg.record_trace = true;
  const auto r = run_fw(Quartic{2}, P, vec({1, 1}), cfg);
  EXPECT_LE(r.f_value, 1e-2);
  for (const auto& t : r.trace) EXPECT_GE(t.f_value + 1e-12, 0.0 + t.lower_bound);
}

TEST(OptimalValueBoundsTest, Examples) {
  const auto P = unit_square();
  auto b = optimal_value_bounds(bowl_at_2_0(), P, vec({0, 0}));
  EXPECT_DOUBLE_EQ(b.lower, 0.0);
  EXPECT_DOUBLE_EQ(b.upper, 2.0);
  b = optimal_value_bounds(bowl_at_2_0(), P, vec({1, 0}));
  EXPECT_DOUBLE_EQ(b.lower, 0.5);
  EXPECT_DOUBLE_EQ(b.upper, 0.5);
  const QuadraticObjective constant(Eigen::MatrixXd::Zero(2, 2), Vector::Zero(2), 3.25);
  b = optimal_value_bounds(constant, P, vec({0.3, 0.7}));
  EXPECT_EQ(b.lower, 3.25);
  EXPECT_EQ(b.upper, 3.25);
}

TEST(RunFwPropertyTest, InvariantsOnRandomInstances) {
  testing::InstanceGenerator gen(99);
  for (int k = 0; k < 100; ++k) {
    const auto P = gen.polytope(2, 5, 10);
    const auto f = gen.quadratic(P.dim());
    const double f_star = exact_qp_solve(f, P).f_star;

    FWConfig cfg;
    cfg.gap_tol = 1e-7;
    cfg.max_iter = 300;
    cfg.record_trace = true;

    // Re-run step by step to observe every iterate.
    Vector x = default_start(P);
    double prev_f = f.value(x);
    std::vector<WeightedVertex> atoms{{x, 1.0}};
    std::set<std::vector<double>> distinct;
    for (long t = 0; t < cfg.max_iter; ++t) {
      const auto g = fw_gap(f, P, x, 1e-8);
      const double fx = f.value(x);
      ASSERT_LE(fx - f_star, g.gap + 1e-9) << "instance " << k << " t " << t;
      ASSERT_GE(g.gap, -1e-9);
      ASSERT_LE(fx, prev_f + 1e-12);
      prev_f = fx;
      if (g.gap <= cfg.gap_tol) break;
      const Vector d = g.pair.v - x;
      const double gamma = exact_line_search(f, x, d);
      x += gamma * d;
      detail::add_atom(atoms, g.pair.v, gamma);
      distinct.insert(std::vector<double>(g.pair.v.data(), g.pair.v.data() + g.pair.v.size()));
      ASSERT_TRUE(contains(P, x, 1e-8));
      ASSERT_LE(distinct.size(), static_cast<std::size_t>(t + 1));
    }

    const auto r = run_fw(f, P, default_start(P), cfg);
    EXPECT_LE((r.x - x).lpNorm<Eigen::Infinity>(), 0.0) << "run_fw must match the step-by-step loop";
    Vector recon = Vector::Zero(P.dim());
    double wsum = 0.0;
    for (const auto& a : r.decomposition) {
      EXPECT_GE(a.weight, 0.0);
      recon += a.weight * a.vertex;
      wsum += a.weight;
    }
    EXPECT_LE((recon - r.x).lpNorm<Eigen::Infinity>(), 1e-9);
    EXPECT_NEAR(wsum, 1.0, 1e-12);
    EXPECT_EQ(r.lower_bound, r.f_value - r.fw_gap);
    EXPECT_LE(r.best_lower_bound, f_star + 1e-9);
    if (r.converged) {
      EXPECT_LE(r.fw_gap, cfg.gap_tol);
    }
    double running = -1e300;
    for (const auto& t : r.trace) {
      EXPECT_GE(t.lower_bound, running);
      running = t.lower_bound;
      EXPECT_LE(t.lower_bound, f_star + 1e-9);
    }
  }
}

}  // namespace
}  // namespace fwsens
