#pragma once

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace finnet {

/// Linear-interpolation quantile (Hyndman-Fan type 7) of unsorted data.
double quantile(std::vector<double> values, double p);

double student_t_cdf(double t, double df);
double student_t_quantile(double p, double df);
/// P(|T| >= |t|).
double two_sided_p(double t, double df);
/// P(T >= t), the p-value of a test against a positive alternative.
double upper_tail_p(double t, double df);

double normal_quantile(double p);

struct LeastSquaresFit {
  Eigen::VectorXd coef;
  Eigen::VectorXd std_err;
  Eigen::VectorXd t_stat;
  Eigen::VectorXd p_value;  // two-sided
  Eigen::VectorXd residuals;
  double residual_variance = 0.0;  // RSS / (n - k)
  double df = 0.0;
};

/// Ordinary least squares of y on the columns of X. Throws ValidationError
/// when X is rank deficient or n <= k.
LeastSquaresFit least_squares(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

}  // namespace finnet
