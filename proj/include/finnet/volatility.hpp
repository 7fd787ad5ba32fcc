#pragma once

// Univariate GARCH(p, q) estimation and de-garching, the BEKK covariance
// recursion, and the two-step scalar DCC model.

#include "finnet/optimize.hpp"
#include "finnet/panel.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <vector>

namespace finnet {

/// GARCH(p, q): q lags of squared shocks, p lags of the variance.
struct GarchSpec {
  int p = 1;
  int q = 1;

  void validate() const;
};

/// h_t = alpha0 + sum_i alphas[i-1] eps_{t-i}^2 + sum_j betas[j-1] h_{t-j}
struct GarchParams {
  double alpha0 = 0.0;
  std::vector<double> alphas;
  std::vector<double> betas;

  [[nodiscard]] double persistence() const;
  /// alpha0 / (1 - persistence).
  [[nodiscard]] double unconditional_variance() const;
  /// Positivity and stationarity; throws ValidationError.
  void validate() const;
};

inline constexpr std::size_t kMinGarchObservations = 200;

struct GarchFit {
  GarchSpec spec;
  /// Sample mean removed before the variance recursion.
  double mu = 0.0;
  double alpha0 = 0.0;
  std::vector<double> alphas;
  std::vector<double> betas;
  /// Conditional variance for every observation; h[0] is the sample variance.
  std::vector<double> h;
  double loglik = 0.0;
  /// Log-likelihood at the optimizer's starting point.
  double initial_loglik = 0.0;
  int iterations = 0;
  bool converged = false;

  [[nodiscard]] GarchParams params() const { return {alpha0, alphas, betas}; }
};

/// Gaussian log-likelihood of `series` (demeaned by its sample mean) and the
/// variance path under `params`. The pre-sample shocks and variances, and
/// h_1, are set to the sample variance.
struct GarchPath {
  std::vector<double> h;
  double loglik = 0.0;
};
GarchPath garch_filter(std::span<const double> series, const GarchParams& params);

/// Maximum likelihood fit. Stationarity is enforced by the parameterization
/// alpha0 = exp(u), (alphas, betas, slack) = softmax(z, 0).
GarchFit garch_fit(std::span<const double> series, const GarchSpec& spec = {});

/// Negative mean log-likelihood of `series` in the unconstrained
/// parameters used by garch_fit, with its analytic gradient.
Objective garch_objective(std::span<const double> series, const GarchSpec& spec);
Eigen::VectorXd garch_to_unconstrained(const GarchParams& params);
GarchParams garch_from_unconstrained(const Eigen::VectorXd& theta, const GarchSpec& spec);

/// r_t / sqrt(h_t).
std::vector<double> degarch(std::span<const double> series, const GarchFit& fit);

/// Path of length `n` started from the unconditional variance after a
/// burn-in of 1000 steps; Gaussian innovations.
std::vector<double> garch_simulate(const GarchParams& params, std::size_t n, std::uint64_t seed);

/// H_t = C'C + sum_k A_k' r r' A_k + sum_k B_k' H_{t-1} B_k.
Eigen::MatrixXd bekk_step(const Eigen::MatrixXd& h_prev, const Eigen::VectorXd& r_prev, const Eigen::MatrixXd& c,
                          const std::vector<Eigen::MatrixXd>& a, const std::vector<Eigen::MatrixXd>& b);

inline constexpr Eigen::Index kDccMaxAssets = 100;

struct DccFit {
  std::vector<GarchFit> univariate;
  double a = 0.0;
  double b = 0.0;
  /// Sample correlation of the standardized residuals.
  Eigen::MatrixXd qbar;
  /// Conditional correlation for every observation.
  std::vector<Eigen::MatrixXd> r_path;
  /// Correlation part of the log-likelihood.
  double loglik = 0.0;
  double initial_loglik = 0.0;
  bool converged = false;
};

/// Correlation log-likelihood -1/2 sum_t (log|R_t| + z_t' R_t^{-1} z_t - z_t' z_t)
/// of standardized residuals `z` (N x T) under the scalar DCC recursion;
/// fills `path` when non-null. Returns -inf when some R_t is not positive
/// definite.
double dcc_loglik(const Eigen::MatrixXd& z, const Eigen::MatrixXd& qbar, double a, double b,
                  std::vector<Eigen::MatrixXd>* path = nullptr);

/// Two-step estimate: GARCH(1,1) per asset, then (a, b) by maximizing the
/// correlation likelihood with Q_t = (1-a-b) Qbar + a z_{t-1} z_{t-1}' + b Q_{t-1}.
DccFit dcc_fit(const ReturnsPanel& panel, unsigned threads = 1);

/// Entry-wise trailing mean of `window` matrices ending at each t (shorter
/// at the start), with the diagonal reset to one.
std::vector<Eigen::MatrixXd> trailing_average(const std::vector<Eigen::MatrixXd>& path, std::size_t window);

}  // namespace finnet
