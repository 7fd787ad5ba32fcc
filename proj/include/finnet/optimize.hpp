#pragma once

#include <Eigen/Dense>

#include <functional>

namespace finnet {

/// Objective returning f(x) and writing the gradient into `grad` when it
/// is non-null. Non-finite values are treated as +infinity.
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd* grad)>;

struct MinimizeOptions {
  int max_iterations = 500;
  /// Stop when the largest gradient component falls below this.
  double gradient_tolerance = 1e-6;
  /// Stop when the relative decrease of f over an iteration falls below this.
  double value_tolerance = 1e-12;
};

struct MinimizeResult {
  Eigen::VectorXd x;
  double value = 0.0;
  double initial_value = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Quasi-Newton minimization (BFGS update of the inverse Hessian,
/// backtracking Armijo line search).
MinimizeResult minimize_bfgs(const Objective& f, Eigen::VectorXd x0, const MinimizeOptions& options = {});

/// Central-difference gradient, used to check analytic gradients.
Eigen::VectorXd numeric_gradient(const Objective& f, const Eigen::VectorXd& x, double step = 1e-6);

}  // namespace finnet
