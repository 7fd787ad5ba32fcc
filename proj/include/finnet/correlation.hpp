#pragma once

// Dependence matrices: Pearson, covariance, exponentially weighted and
// rolling correlations, partial and rank correlation, the correlation
// distance, and significance bands for correlation coefficients.

#include "finnet/panel.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace finnet {

enum class MatrixKind { correlation, covariance, distance, pvalue, fevd };

const char* to_string(MatrixKind kind);
MatrixKind matrix_kind_from_string(const std::string& name);

struct WindowInfo {
  std::string start;  // first timestamp in the window
  std::string end;    // last timestamp; windows are labelled by this one
  Eigen::Index delta_t = 0;
  std::optional<double> theta;
};

struct DependencyMatrix {
  MatrixKind kind = MatrixKind::correlation;
  Eigen::MatrixXd values;
  std::vector<std::string> assets;
  std::optional<WindowInfo> window;

  [[nodiscard]] Eigen::Index size() const { return values.rows(); }
  /// Checks the invariants of `kind`. Throws ValidationError.
  void validate(double tolerance = 1e-8) const;
};

/// Observation weights for a window of `delta_t` returns. With `theta`
/// unset the weights are flat (1/delta_t); otherwise
/// w_t = w0 * exp((t - delta_t) / theta), t = 1..delta_t, so that the most
/// recent observation carries w0 and the weights sum to one.
struct WeightScheme {
  Eigen::Index delta_t = 0;
  std::optional<double> theta;

  void validate() const;
  [[nodiscard]] Eigen::VectorXd weights() const;
  [[nodiscard]] static double w0(Eigen::Index delta_t, double theta);
};

enum class BandMethod { parametric_t, permutation };

struct SignificanceBand {
  double alpha = 0.05;
  double lower = 0.0;
  double upper = 0.0;
  BandMethod method = BandMethod::parametric_t;
  Eigen::Index delta_t = 0;
};

struct PermutationOptions {
  std::size_t n_draws = 100000;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

inline constexpr std::size_t kMinPermutationDraws = 10000;

/// Pearson coefficient of two equally long series.
double pearson_pair(std::span<const double> x, std::span<const double> y);

DependencyMatrix pearson(const ReturnsPanel& panel);
DependencyMatrix covariance(const ReturnsPanel& panel,
                            VarianceConvention convention = VarianceConvention::sample);

/// Window w covers observations [w*step, w*step + delta_t).
std::vector<DependencyMatrix> rolling_corr(const ReturnsPanel& panel, Eigen::Index delta_t,
                                           Eigen::Index step);

/// Weighted correlation over the last `scheme.delta_t` observations.
DependencyMatrix weighted_corr(const ReturnsPanel& panel, const WeightScheme& scheme);

/// weighted_corr evaluated on right-aligned windows advanced by `step`.
std::vector<DependencyMatrix> rolling_weighted_corr(const ReturnsPanel& panel, const WeightScheme& scheme,
                                                    Eigen::Index step);

/// First-order partial correlation given C_ij, C_im, C_jm.
double partial_correlation(double c_ij, double c_im, double c_jm);

/// Partial correlations of all assets given an external mediator series.
DependencyMatrix partial_corr(const ReturnsPanel& panel, std::span<const double> mediator);
/// Mediator taken from the panel; that asset is dropped from the output.
DependencyMatrix partial_corr(const ReturnsPanel& panel, const std::string& mediator_asset);

/// 1-based ranks, ties receive the mean of the ranks they span.
std::vector<double> mid_ranks(std::span<const double> values);

DependencyMatrix spearman(const ReturnsPanel& panel);

/// Band of |r| expected for independent Gaussian pairs of length delta_t,
/// from the t distribution of r*sqrt((delta_t-2)/(1-r^2)).
SignificanceBand parametric_band(Eigen::Index delta_t, double alpha);

/// Empirical alpha/2 and 1-alpha/2 quantiles of the correlation between
/// independently permuted windows of randomly chosen source assets.
SignificanceBand permutation_band(Eigen::Index delta_t, double alpha, const ReturnsPanel& source,
                                  const PermutationOptions& options);

/// Dispatches on `method`; the permutation method requires `source`.
SignificanceBand significance_band(Eigen::Index delta_t, double alpha, BandMethod method,
                                   const ReturnsPanel* source = nullptr, const PermutationOptions& options = {});

/// Raw permutation draws, exposed for plotting the null distribution.
std::vector<double> permutation_draws(Eigen::Index delta_t, const ReturnsPanel& source,
                                      const PermutationOptions& options);

/// D_ij = sqrt(2 (1 - C_ij)).
DependencyMatrix to_distance(const DependencyMatrix& corr);

}  // namespace finnet
