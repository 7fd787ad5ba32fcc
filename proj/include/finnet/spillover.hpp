#pragma once

// Vector autoregressions, the generalized forecast-error variance
// decomposition, and the spillover networks and connectedness measures
// built from it.

#include "finnet/graph.hpp"
#include "finnet/panel.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace finnet {

inline constexpr Eigen::Index kVarMaxAssets = 50;
inline constexpr int kDefaultHorizon = 10;

/// y_t = c + sum_{l=1}^{p} A_l y_{t-l} + u_t, Cov(u_t) = omega.
struct VarFit {
  std::vector<std::string> assets;
  int p = 1;
  std::vector<Eigen::MatrixXd> coefficients;  // A_1..A_p
  Eigen::VectorXd intercept;
  Eigen::MatrixXd omega;
  double spectral_radius = 0.0;
  bool stable = false;
  Eigen::Index n_obs = 0;

  [[nodiscard]] Eigen::Index n_vars() const { return omega.rows(); }
};

/// Companion-matrix spectral radius of the lag polynomial.
double companion_spectral_radius(const std::vector<Eigen::MatrixXd>& coefficients);

/// Equation-by-equation least squares with intercept. Omega uses the
/// degrees-of-freedom divisor T - p - (N p + 1). Unstable fits are returned
/// with `stable == false`.
VarFit var_fit(const ReturnsPanel& panel, int p);

/// Theta_0 = I, Theta_h = sum_{l=1}^{min(h,p)} A_l Theta_{h-l}; returns H matrices.
std::vector<Eigen::MatrixXd> ma_coefficients(const VarFit& fit, int horizon);

struct FevdMatrix {
  int horizon = kDefaultHorizon;
  std::vector<std::string> assets;
  /// d_ij = sigma_jj^-1 sum_h (e_i' Theta_h Omega e_j)^2 / sum_h e_i' Theta_h Omega Theta_h' e_i
  Eigen::MatrixXd raw;
  /// `raw` with every row scaled to sum to one.
  Eigen::MatrixXd normalized;
  Eigen::VectorXd sigma;  // diagonal of Omega
};

/// Generalized (ordering-invariant) decomposition. Requires a stable fit.
FevdMatrix gfevd(const VarFit& fit, int horizon = kDefaultHorizon);

enum class DiagonalMode {
  own_share,  // node weight d_ii
  from_sum,  // node weight sum_{j != i} d_ij
};

/// Directed edge j -> i with weight d_ij (normalized) for every i != j with
/// d_ij > 0. The diagonal goes to `node_weights` per `mode`.
FilteredGraph spillover_network(const FevdMatrix& fevd, DiagonalMode mode = DiagonalMode::own_share);

struct Connectedness {
  Eigen::VectorXd to;    // to_j = sum_{i != j} d_ij
  Eigen::VectorXd from;  // from_i = sum_{j != i} d_ij
  double total = 0.0;    // (1/N) sum_{i != j} d_ij
};

Connectedness connectedness(const FevdMatrix& fevd);

struct SpilloverPoint {
  std::string timestamp;  // last observation of the window
  double total = 0.0;     // NaN when the window's fit is unstable
  bool missing = false;
};

/// Total connectedness of one sample.
SpilloverPoint spillover_at(const ReturnsPanel& sample, int p, int horizon);

/// Total connectedness on windows [s, s + window) for s = 0, step, 2 step, ...
std::vector<SpilloverPoint> rolling_spillover(const ReturnsPanel& panel, int p, int horizon, Eigen::Index window,
                                              Eigen::Index step, unsigned threads = 1);

}  // namespace finnet
