#pragma once

// Seeded synthetic data generators with known ground truth.

#include "finnet/panel.hpp"
#include "finnet/volatility.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace finnet {

/// T draws of N(0, corr * vol^2); with `student_df` > 0 the shocks are
/// Student-t scaled to unit variance instead.
ReturnsPanel gaussian_panel(const Eigen::MatrixXd& corr, Eigen::Index t, std::uint64_t seed, double vol = 0.01,
                            double student_df = 0.0);

/// r_i = beta_i m + e_i with m ~ N(0, market_vol^2), e_i ~ N(0, idio_vol^2).
/// The market series is returned as the last row when `include_market`.
ReturnsPanel single_index_panel(const Eigen::VectorXd& betas, Eigen::Index t, std::uint64_t seed,
                                double market_vol = 0.01, double idio_vol = 0.01, bool include_market = false);

/// Block correlation matrix: `within` inside a block, `between` across.
Eigen::MatrixXd block_correlation(const std::vector<int>& sizes, double within, double between);

/// Block membership (0, 1, ...) of each asset for `block_correlation(sizes, ...)`.
std::vector<int> block_labels(const std::vector<int>& sizes);

/// Ones on the diagonal, `rho` elsewhere.
Eigen::MatrixXd equicorrelation(Eigen::Index n, double rho);

/// Independent GARCH paths, asset i seeded with split_seed(seed, i).
ReturnsPanel garch_panel(Eigen::Index n, const GarchParams& params, Eigen::Index t, std::uint64_t seed);

/// Scalar DCC with unit-variance GARCH(1,1) margins scaled to daily size.
ReturnsPanel dcc_panel(const Eigen::MatrixXd& qbar, double a, double b, const GarchParams& margin, Eigen::Index t,
                       std::uint64_t seed);

/// VAR(p) path after `burn_in` discarded steps, Gaussian shocks with covariance `omega`.
ReturnsPanel var_panel(const std::vector<Eigen::MatrixXd>& coefficients, const Eigen::VectorXd& intercept,
                       const Eigen::MatrixXd& omega, Eigen::Index t, std::uint64_t seed, Eigen::Index burn_in = 500);

/// Classical Pareto with scale 1 and tail index `alpha`, random sign.
std::vector<double> pareto_sample(double alpha, std::size_t n, std::uint64_t seed, bool symmetric = true);

std::vector<double> student_t_sample(double df, std::size_t n, std::uint64_t seed);

/// `count` consecutive weekdays from 2000-01-03 as ISO-8601 strings.
std::vector<std::string> business_dates(std::size_t count);

/// Price path p_0 exp(cumsum r) dated with `business_dates`.
PricePanel prices_from_returns(const ReturnsPanel& returns, double p0 = 100.0);

}  // namespace finnet
