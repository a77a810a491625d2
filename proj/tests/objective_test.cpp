#include "fwsens/objective.hpp"

#include <random>

#include <gtest/gtest.h>

#include "support/instances.hpp"

namespace fwsens {
namespace {

using testing::vec;

QuadraticObjective bowl_at_2_0() { return QuadraticObjective(Eigen::MatrixXd::Identity(2, 2), vec({-2, 0}), 2.0); }

TEST(QuadraticObjectiveTest, Eval) {
  const auto f = bowl_at_2_0();
  EXPECT_DOUBLE_EQ(f.value(vec({0, 0})), 2.0);
  EXPECT_DOUBLE_EQ(f.value(vec({1, 0})), 0.5);
  const QuadraticObjective zero(Eigen::MatrixXd::Zero(2, 2), Vector::Zero(2), 0.0);
  EXPECT_EQ(zero.value(vec({3.5, -7})), 0.0);
  EXPECT_THROW(f.value(vec({1, 2, 3})), DimensionError);
}

TEST(QuadraticObjectiveTest, Gradient) {
  const auto f = bowl_at_2_0();
  EXPECT_EQ(f.gradient(vec({0, 0})), vec({-2, 0}));
  EXPECT_EQ(f.gradient(vec({1, 0.5})), vec({-1, 0.5}));
  const QuadraticObjective linear(Eigen::MatrixXd::Zero(2, 2), vec({3, -1}), 0.0);
  EXPECT_EQ(linear.gradient(vec({10, 20})), vec({3, -1}));
}

TEST(QuadraticObjectiveTest, SymmetrizesAndRejectsIndefinite) {
  Eigen::MatrixXd Q(2, 2);
  Q << 2, 2, 0, 2;  // symmetric part [[2,1],[1,2]]
  const QuadraticObjective f(Q, Vector::Zero(2));
  EXPECT_LE((f.Q() - f.Q().transpose()).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_DOUBLE_EQ(f.Q()(0, 1), 1.0);

  Eigen::MatrixXd bad(2, 2);
  bad << 1, 0, 0, -1e-6;
  EXPECT_THROW(QuadraticObjective(bad, Vector::Zero(2)), std::invalid_argument);
  Eigen::MatrixXd barely(2, 2);
  barely << 1, 0, 0, -1e-12;
  EXPECT_NO_THROW(QuadraticObjective(barely, Vector::Zero(2)));
}

TEST(SmoothnessConstantTest, Examples) {
  EXPECT_NEAR(smoothness_constant(QuadraticObjective(Eigen::MatrixXd::Identity(2, 2), Vector::Zero(2))), 1.0, 1e-9);
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(2, 2);
  D.diagonal() << 4, 1;
  EXPECT_NEAR(smoothness_constant(QuadraticObjective(D, Vector::Zero(2))), 4.0, 4e-9);
  Eigen::MatrixXd Q(2, 2);
  Q << 2, 1, 1, 2;
  const double L = smoothness_constant(QuadraticObjective(Q, Vector::Zero(2)));
  EXPECT_GE(L, 3.0);
  EXPECT_LE(L, 3.0 * (1 + 1e-6));
  EXPECT_EQ(smoothness_constant(QuadraticObjective(Eigen::MatrixXd::Zero(3, 3), Vector::Zero(3))), 0.0);
}

TEST(SmoothnessConstantTest, BracketsLargestEigenvalue) {
  testing::InstanceGenerator gen(5);
  for (int k = 0; k < 200; ++k) {
    const int n = gen.uniform_int(1, 8);
    const int rank = gen.uniform_int(1, n);
    Eigen::MatrixXd M(rank, n);
    for (int i = 0; i < rank; ++i)
      for (int j = 0; j < n; ++j) M(i, j) = gen.uniform(-1, 1);
    const QuadraticObjective f(M.transpose() * M, Vector::Zero(n));
    const double lmax = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(f.Q()).eigenvalues().maxCoeff();
    EXPECT_GE(f.smoothness(), lmax * (1 - 1e-14)) << k;
    EXPECT_LE(f.smoothness(), lmax * (1 + 1e-6)) << k;
  }
}

TEST(SmoothnessConstantTest, RepeatedTopEigenvalue) {
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(4, 4);
  D.diagonal() << 3, 3, 3, 0.5;
  const double L = smoothness_constant(QuadraticObjective(D, Vector::Zero(4)));
  EXPECT_GE(L, 3.0);
  EXPECT_LE(L, 3.0 * (1 + 1e-6));
}

// Quadratic with a deliberately wrong gradient in the first component.
struct CorruptedGradient {
  QuadraticObjective f;
  Eigen::Index dim() const { return f.dim(); }
  double value(const Vector& x) const { return f.value(x); }
  Vector gradient(const Vector& x) const {
    Vector g = f.gradient(x);
    g[0] += 0.1;
    return g;
  }
  double smoothness() const { return f.smoothness(); }
};

TEST(CheckGradientFdTest, Examples) {
  testing::InstanceGenerator gen(9);
  const auto f = gen.quadratic(4);
  EXPECT_LE(check_gradient_fd(f, gen.objective_vector(4), 1e-5), 1e-8);

  const QuadraticObjective iso(Eigen::MatrixXd::Identity(3, 3), Vector::Zero(3));
  EXPECT_LE(check_gradient_fd(iso, Vector::Zero(3), 0.1), 1e-15);

  EXPECT_NEAR(check_gradient_fd(CorruptedGradient{f}, gen.objective_vector(4), 1e-5), 0.1, 1e-7);
  EXPECT_THROW(check_gradient_fd(f, Vector::Zero(4), 0.0), std::invalid_argument);
}

TEST(ObjectivePropertyTest, ConvexAndSmoothOnRandomPairs) {
  testing::InstanceGenerator gen(17);
  for (int k = 0; k < 20; ++k) {
    const auto f = gen.quadratic(gen.uniform_int(1, 6));
    const double L = f.smoothness();
    for (int t = 0; t < 1000; ++t) {
      const Vector x = gen.objective_vector(f.dim());
      const Vector y = gen.objective_vector(f.dim());
      const double diff = f.value(y) - f.value(x);
      const double lin = f.gradient(x).dot(y - x);
      EXPECT_GE(diff - lin, -1e-9);
      EXPECT_GE(lin + 0.5 * L * (y - x).squaredNorm() - diff, -1e-9);
    }
    EXPECT_LE(check_gradient_fd(f, gen.objective_vector(f.dim()), 1e-5), 1e-7);
  }
}

TEST(WithSmoothnessTest, OverridesOnlyL) {
  const auto f = bowl_at_2_0();
  const WithSmoothness<QuadraticObjective> g(f, 0.5);
  EXPECT_EQ(g.smoothness(), 0.5);
  EXPECT_EQ(g.value(vec({1, 1})), f.value(vec({1, 1})));
  EXPECT_EQ(g.curvature(vec({1, 1})), 2.0);
}

}  // namespace
}  // namespace fwsens
