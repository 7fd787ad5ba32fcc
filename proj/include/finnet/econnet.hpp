#pragma once

// Factor regressions and pairwise regression networks (Granger causality
// and robust pairwise regression) on de-garched returns.

#include "finnet/correlation.hpp"
#include "finnet/graph.hpp"
#include "finnet/panel.hpp"

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace finnet {

struct FactorFit {
  double alpha = 0.0;
  Eigen::VectorXd betas;
  double residual_variance = 0.0;
  double alpha_p_value = 1.0;
  Eigen::VectorXd beta_p_values;
  Eigen::VectorXd residuals;
};

/// Least squares of the asset on an intercept and the factors. With a
/// risk-free series the excess-return form is fitted: r_F is subtracted from
/// the asset and from the first (market) factor; the remaining factors are
/// taken to be spreads already.
FactorFit factor_fit(std::span<const double> asset, const std::vector<std::vector<double>>& factors,
                     std::optional<std::span<const double>> riskfree = std::nullopt);

/// Returns that have been divided by their GARCH volatility. Only
/// `degarch_panel` and the explicit `assume_filtered` produce one, so raw
/// returns cannot reach the pairwise estimators by accident.
class FilteredReturns {
 public:
  /// For data known to be filtered already (e.g. simulated homoskedastic noise).
  static FilteredReturns assume_filtered(ReturnsPanel panel) { return FilteredReturns(std::move(panel)); }

  [[nodiscard]] const ReturnsPanel& panel() const { return panel_; }
  [[nodiscard]] Eigen::Index n_assets() const { return panel_.n_assets(); }

 private:
  explicit FilteredReturns(ReturnsPanel panel) : panel_(std::move(panel)) {}
  friend FilteredReturns degarch_panel(const ReturnsPanel& raw, unsigned threads);

  ReturnsPanel panel_;
};

/// GARCH(1,1) per asset, then r_t / sqrt(h_t).
FilteredReturns degarch_panel(const ReturnsPanel& raw, unsigned threads = 1);

enum class EdgeDirection { undirected, forward, backward, bidirectional };

struct PairEdge {
  int i = 0;
  int j = 0;
  double beta = 0.0;
  double t_stat = 0.0;
  double p_value = 1.0;
  EdgeDirection direction = EdgeDirection::forward;
};

inline constexpr std::size_t kMinGrangerObservations = 30;

/// Lag-one Granger regressions without intercept on the demeaned series,
///   r_j,t = a_j r_j,t-1 + b_ji r_i,t-1 + e   (first: i -> j)
///   r_i,t = a_i r_i,t-1 + b_ij r_j,t-1 + e   (second: j -> i)
/// with two-sided t-test p-values on b. Edges point from cause to effect.
std::pair<PairEdge, PairEdge> granger_pair(const FilteredReturns& panel, int i, int j);

/// Directed edge i -> j iff the b coefficient of j's equation on i is
/// significant at `alpha` (p < alpha). Weight is the coefficient; the
/// p-value is attached.
FilteredGraph granger_network(const FilteredReturns& panel, double alpha, unsigned threads = 1);
/// De-garches `raw` first.
FilteredGraph granger_network(const ReturnsPanel& raw, double alpha, unsigned threads = 1);

struct RobustFit {
  Eigen::VectorXd coef;
  Eigen::VectorXd std_err;
  Eigen::VectorXd t_stat;
  double scale = 0.0;
  double df = 0.0;
  int iterations = 0;
  bool converged = false;
};

inline constexpr double kDefaultStudentNu = 5.0;

/// Student-t M-estimation by iteratively reweighted least squares with
/// weights (nu + 1) / (nu + u^2), u = residual / scale. Standard errors use
/// the sandwich form scale^2 (X'X)^-1 E[psi^2] / E[psi']^2.
RobustFit robust_regression(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double nu = kDefaultStudentNu);

/// Regression of asset i on asset j with intercept; the p-value tests
/// beta_1 > 0 (one-sided).
PairEdge robust_pair(const FilteredReturns& panel, int i, int j, double nu = kDefaultStudentNu);

enum class EdgeRule { either, both };

struct PairNetworkOptions {
  double nu = kDefaultStudentNu;
  EdgeRule rule = EdgeRule::either;
  unsigned threads = 1;
};

struct PValueNetwork {
  /// Undirected; weight (gamma - p) scaled so the largest weight is 1.
  FilteredGraph graph;
  double gamma = 0.05;
  /// p-value of the regression of row asset on column asset (diagonal 0).
  DependencyMatrix p_values;
};

/// Edge {i, j} iff p < gamma for either (or both) of the two directed
/// regressions; the edge carries the smaller (or larger) p-value.
PValueNetwork robust_pair_network(const FilteredReturns& panel, double gamma, const PairNetworkOptions& options = {});
/// De-garches `raw` first.
PValueNetwork robust_pair_network(const ReturnsPanel& raw, double gamma, const PairNetworkOptions& options = {});

/// Collapses assets into (country, sector) groups, named "country/sector"
/// and ordered by name. The weight between two groups is the mean weight
/// over all member pairs, counting absent edges as zero; groups with zero
/// mean are not linked and self-loops are dropped.
FilteredGraph aggregate_network(const FilteredGraph& net, const LabelMap& labels);

}  // namespace finnet
