#include "finnet/optimize.hpp"

#include "finnet/error.hpp"

#include <cmath>
#include <limits>

namespace finnet {

namespace {

double evaluate(const Objective& f, const Eigen::VectorXd& x, Eigen::VectorXd* grad) {
  const double v = f(x, grad);
  if (!std::isfinite(v)) return std::numeric_limits<double>::infinity();
  if (grad != nullptr && !grad->allFinite()) return std::numeric_limits<double>::infinity();
  return v;
}

}  // namespace

MinimizeResult minimize_bfgs(const Objective& f, Eigen::VectorXd x0, const MinimizeOptions& options) {
  const Eigen::Index n = x0.size();
  MinimizeResult result;
  Eigen::VectorXd g(n);
  double fx = evaluate(f, x0, &g);
  if (!std::isfinite(fx)) throw NumericalError("objective is not finite at the starting point");
  result.initial_value = fx;
  Eigen::MatrixXd inv_h = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd x = std::move(x0);
  Eigen::VectorXd g_new(n);
  int quiet_steps = 0;

  for (int it = 0; it < options.max_iterations; ++it) {
    result.iterations = it + 1;
    if (g.lpNorm<Eigen::Infinity>() < options.gradient_tolerance) {
      result.converged = true;
      break;
    }
    Eigen::VectorXd dir = -inv_h * g;
    double slope = g.dot(dir);
    if (!(slope < 0.0)) {
      inv_h.setIdentity();
      dir = -g;
      slope = -g.squaredNorm();
    }
    // Keep the first trial step bounded; far steps only waste evaluations.
    double step = std::min(1.0, 10.0 / std::max(dir.lpNorm<Eigen::Infinity>(), 1e-300));
    double f_new = std::numeric_limits<double>::infinity();
    Eigen::VectorXd x_new;
    bool accepted = false;
    for (int k = 0; k < 60; ++k) {
      x_new = x + step * dir;
      f_new = evaluate(f, x_new, &g_new);
      if (f_new <= fx + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      // The line search cannot make progress along a descent direction:
      // x is stationary up to rounding.
      result.converged = g.lpNorm<Eigen::Infinity>() < std::sqrt(options.gradient_tolerance);
      break;
    }
    const Eigen::VectorXd s = x_new - x;
    const Eigen::VectorXd y = g_new - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      const double rho = 1.0 / sy;
      if (it == 0) inv_h *= sy / y.squaredNorm();
      const Eigen::MatrixXd left = Eigen::MatrixXd::Identity(n, n) - rho * s * y.transpose();
      inv_h = left * inv_h * left.transpose() + rho * s * s.transpose();
    }
    const double decrease = fx - f_new;
    x = x_new;
    g = g_new;
    fx = f_new;
    if (decrease <= options.value_tolerance * std::max(1.0, std::abs(fx))) {
      if (++quiet_steps >= 3) {
        result.converged = true;
        break;
      }
    } else {
      quiet_steps = 0;
    }
  }
  result.x = std::move(x);
  result.value = fx;
  return result;
}

Eigen::VectorXd numeric_gradient(const Objective& f, const Eigen::VectorXd& x, double step) {
  Eigen::VectorXd grad(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = step * std::max(1.0, std::abs(x(i)));
    Eigen::VectorXd up = x;
    Eigen::VectorXd down = x;
    up(i) += h;
    down(i) -= h;
    grad(i) = (f(up, nullptr) - f(down, nullptr)) / (2.0 * h);
  }
  return grad;
}

}  // namespace finnet
