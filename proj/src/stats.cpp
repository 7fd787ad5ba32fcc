#include "finnet/stats.hpp"

#include "finnet/error.hpp"

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>

namespace finnet {

double quantile(std::vector<double> values, double p) {
  require(!values.empty(), "quantile of empty data");
  require(p >= 0.0 && p <= 1.0, "quantile probability outside [0, 1]");
  std::sort(values.begin(), values.end());
  const double h = p * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

double student_t_cdf(double t, double df) {
  return boost::math::cdf(boost::math::students_t(df), t);
}

double student_t_quantile(double p, double df) {
  return boost::math::quantile(boost::math::students_t(df), p);
}

double two_sided_p(double t, double df) {
  if (!std::isfinite(t)) return 0.0;
  return 2.0 * boost::math::cdf(boost::math::complement(boost::math::students_t(df), std::abs(t)));
}

double upper_tail_p(double t, double df) {
  if (std::isinf(t)) return t > 0 ? 0.0 : 1.0;
  return boost::math::cdf(boost::math::complement(boost::math::students_t(df), t));
}

double normal_quantile(double p) { return boost::math::quantile(boost::math::normal(), p); }

LeastSquaresFit least_squares(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  const Eigen::Index n = X.rows();
  const Eigen::Index k = X.cols();
  require(y.size() == n, "least squares: regressor and response lengths differ");
  require(n > k, "least squares: need more observations than regressors");
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  qr.setThreshold(1e-10);
  require(qr.rank() == k, "least squares: regressors are collinear");

  LeastSquaresFit fit;
  fit.coef = qr.solve(y);
  fit.residuals = y - X * fit.coef;
  fit.df = static_cast<double>(n - k);
  fit.residual_variance = fit.residuals.squaredNorm() / fit.df;
  const Eigen::MatrixXd xtx_inv = (X.transpose() * X).ldlt().solve(Eigen::MatrixXd::Identity(k, k));
  fit.std_err = (fit.residual_variance * xtx_inv.diagonal().array()).sqrt().matrix();
  fit.t_stat = fit.coef.cwiseQuotient(fit.std_err);
  fit.p_value.resize(k);
  for (Eigen::Index j = 0; j < k; ++j) {
    fit.p_value(j) = fit.std_err(j) > 0.0 ? two_sided_p(fit.t_stat(j), fit.df) : 0.0;
  }
  return fit;
}

}  // namespace finnet
