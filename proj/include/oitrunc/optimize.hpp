#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include <Eigen/Dense>

namespace oitrunc {

/// Scalar objective to minimize. May return +inf outside its domain.
using Objective = std::function<double(const Eigen::VectorXd&)>;

struct BfgsOptions {
  double gradient_tolerance = 1e-8;
  int max_iterations = 200;
  /// Central-difference step is fd_step_scale * max(1, |x_j|).
  double fd_step_scale = std::cbrt(std::numeric_limits<double>::epsilon());
};

struct BfgsResult {
  Eigen::VectorXd x;
  double value = std::numeric_limits<double>::infinity();
  Eigen::VectorXd gradient;
  int iterations = 0;
  bool converged = false;
  std::string message;
};

/// Per-coordinate steps scale * max(1, |x_j|), adjusted so x_j + h_j is
/// exactly representable.
Eigen::VectorXd fd_steps(const Eigen::VectorXd& x, double scale);

Eigen::VectorXd central_gradient(const Objective& f, const Eigen::VectorXd& x,
                                 double step_scale);

/// Second-order central differences with explicit per-coordinate steps.
Eigen::MatrixXd central_hessian(const Objective& f, const Eigen::VectorXd& x,
                                const Eigen::VectorXd& steps);

/// Quasi-Newton minimization: BFGS inverse-Hessian updates, backtracking line
/// search on the Armijo condition, central-difference gradients. Convergence
/// is declared when the sup-norm of the gradient drops below the tolerance.
BfgsResult minimize_bfgs(const Objective& f, Eigen::VectorXd x0, const BfgsOptions& opts);

}  // namespace oitrunc
