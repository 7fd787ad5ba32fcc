#pragma once

// Eigen-analysis of correlation matrices, the Marchenko-Pastur reference
// spectrum, and the principal-component view of a returns panel.
//
// Moments inside this module use the population (1/T) convention so that
// the sample correlation equals (1/T) * X X' for standardized rows X. The
// panel module defaults to the sample (1/(T-1)) convention; correlations
// are identical under both, only the standardized series differ by a
// factor sqrt(T/(T-1)).

#include "finnet/correlation.hpp"
#include "finnet/panel.hpp"

#include <Eigen/Dense>

#include <vector>

namespace finnet {

/// Eigenpairs in descending eigenvalue order. Column k of `vectors` is
/// paired with `values(k)`; each column has its largest-magnitude
/// component positive (first such component on exact ties).
struct EigenSystem {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
};

struct MpSpectrum {
  double q = 0.0;        // T / N
  double sigma_r = 1.0;
  double lambda_minus = 0.0;
  double lambda_plus = 0.0;
};

struct SpectrumPartition {
  std::vector<Eigen::Index> above;  // lambda > lambda_plus
  std::vector<Eigen::Index> bulk;
  std::vector<Eigen::Index> below;  // lambda < lambda_minus
};

struct PcaResult {
  EigenSystem eigen;
  Eigen::MatrixXd standardized;  // N x T, population convention
  Eigen::MatrixXd factors;       // k x T, F = V_k' X; var(F_k) = lambda_k
  Eigen::MatrixXd loadings;      // N x k, V_k * diag(sqrt(lambda_k))

  /// V_k F, which equals `standardized` when k = N.
  [[nodiscard]] Eigen::MatrixXd reconstruct() const;
  /// Fraction of total variance carried by each retained factor.
  [[nodiscard]] Eigen::VectorXd explained_variance() const;
};

EigenSystem eigensystem(const DependencyMatrix& corr);
/// Same decomposition for a raw symmetric matrix.
EigenSystem symmetric_eigensystem(const Eigen::MatrixXd& m);

MpSpectrum mp_bounds(Eigen::Index n, Eigen::Index t, double sigma_r = 1.0);
double mp_density(double lambda, const MpSpectrum& spec);
/// Numerically integrated MP distribution function.
double mp_cdf(double lambda, const MpSpectrum& spec);
/// sup |F_empirical - F_MP| over the supplied eigenvalues.
double mp_ks_distance(const Eigen::VectorXd& eigenvalues, const MpSpectrum& spec);

SpectrumPartition outside_mp(const EigenSystem& eigs, const MpSpectrum& spec);

PcaResult pca_decompose(const ReturnsPanel& panel, Eigen::Index k);

/// r_{i,t} = sum_k sqrt(lambda_k) v_{k,i} eps_{k,t} using the K leading
/// eigenpairs, K = shocks.rows().
ReturnsPanel pca_synthesize(const EigenSystem& eigs, const Eigen::MatrixXd& shocks);

}  // namespace finnet
