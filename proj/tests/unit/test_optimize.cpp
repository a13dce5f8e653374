#include <gtest/gtest.h>

#include <cmath>

#include "oitrunc/optimize.hpp"

using namespace oitrunc;

TEST(FdSteps, ExactlyRepresentable) {
  Eigen::VectorXd x(4);
  x << 0.1, -3.7, 1234.5678, 0.0;
  const Eigen::VectorXd h = fd_steps(x, 6e-6);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    EXPECT_GT(h[i], 0.0);
    EXPECT_EQ((x[i] + h[i]) - x[i], h[i]);
    EXPECT_NEAR(h[i], 6e-6 * std::max(1.0, std::abs(x[i])), 1e-6 * h[i] + 1e-12);
  }
}

TEST(CentralDifferences, QuadraticIsExact) {
  Eigen::Matrix2d A;
  A << 3.0, 1.0, 1.0, 2.0;
  const Objective f = [&](const Eigen::VectorXd& v) { return 0.5 * v.dot(A * v) - v[0]; };
  const Eigen::Vector2d x(0.3, -0.7);
  const Eigen::VectorXd g = central_gradient(f, x, 1e-5);
  const Eigen::Vector2d expected = A * x - Eigen::Vector2d(1.0, 0.0);
  EXPECT_NEAR(g[0], expected[0], 1e-9);
  EXPECT_NEAR(g[1], expected[1], 1e-9);
  const Eigen::MatrixXd H = central_hessian(f, x, fd_steps(x, 1e-3));
  EXPECT_NEAR((H - A).cwiseAbs().maxCoeff(), 0.0, 1e-6);
}

TEST(Bfgs, Rosenbrock) {
  const Objective f = [](const Eigen::VectorXd& v) {
    return 100.0 * std::pow(v[1] - v[0] * v[0], 2) + std::pow(1.0 - v[0], 2);
  };
  BfgsOptions o;
  o.gradient_tolerance = 1e-7;
  o.max_iterations = 2000;
  const BfgsResult r = minimize_bfgs(f, Eigen::Vector2d(-1.2, 1.0), o);
  EXPECT_TRUE(r.converged) << r.message;
  EXPECT_NEAR(r.x[0], 1.0, 1e-5);
  EXPECT_NEAR(r.x[1], 1.0, 1e-5);
}

TEST(Bfgs, InfeasibleStartReported) {
  const Objective f = [](const Eigen::VectorXd&) { return std::numeric_limits<double>::infinity(); };
  const BfgsResult r = minimize_bfgs(f, Eigen::Vector2d(0, 0), {});
  EXPECT_FALSE(r.converged);
  EXPECT_FALSE(r.message.empty());
}

TEST(Bfgs, RespectsDomainWall) {
  // Objective undefined for x <= 0; the line search must back off.
  const Objective f = [](const Eigen::VectorXd& v) {
    if (v[0] <= 0.0) return std::numeric_limits<double>::infinity();
    return v[0] - std::log(v[0]);
  };
  const BfgsResult r = minimize_bfgs(f, Eigen::VectorXd::Constant(1, 5.0), {});
  EXPECT_TRUE(r.converged) << r.message;
  EXPECT_NEAR(r.x[0], 1.0, 1e-7);
}
