#include "finnet/spectrum.hpp"

#include "finnet/error.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace finnet {

EigenSystem symmetric_eigensystem(const Eigen::MatrixXd& m) {
  require(m.rows() == m.cols(), "eigensystem: matrix must be square");
  require((m - m.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, m.cwiseAbs().maxCoeff()),
          "eigensystem: matrix is not symmetric");
  const Eigen::Index n = m.rows();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  if (es.info() != Eigen::Success) throw NumericalError("eigensystem: decomposition failed");

  // Eigen returns ascending order; reverse with a stable tie rule.
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return es.eigenvalues()(a) > es.eigenvalues()(b); });

  EigenSystem out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index src = order[static_cast<std::size_t>(k)];
    out.values(k) = es.eigenvalues()(src);
    Eigen::VectorXd v = es.eigenvectors().col(src);
    Eigen::Index pivot = 0;
    for (Eigen::Index i = 1; i < n; ++i) {
      if (std::abs(v(i)) > std::abs(v(pivot)) + 1e-12) pivot = i;
    }
    if (v(pivot) < 0.0) v = -v;
    out.vectors.col(k) = v;
  }
  return out;
}

EigenSystem eigensystem(const DependencyMatrix& corr) {
  require(corr.kind == MatrixKind::correlation, "eigensystem expects a correlation matrix");
  return symmetric_eigensystem(corr.values);
}

MpSpectrum mp_bounds(Eigen::Index n, Eigen::Index t, double sigma_r) {
  require(n >= 2, "mp_bounds: need at least two assets");
  require(t > n, "mp_bounds: requires T > N (Q > 1)");
  require(sigma_r > 0.0, "mp_bounds: sigma_r must be positive");
  MpSpectrum s;
  s.q = static_cast<double>(t) / static_cast<double>(n);
  s.sigma_r = sigma_r;
  const double inv_q = 1.0 / s.q;
  const double s2 = sigma_r * sigma_r;
  s.lambda_plus = s2 * (1.0 + inv_q + 2.0 * std::sqrt(inv_q));
  s.lambda_minus = s2 * (1.0 + inv_q - 2.0 * std::sqrt(inv_q));
  return s;
}

double mp_density(double lambda, const MpSpectrum& spec) {
  if (!(lambda > spec.lambda_minus && lambda < spec.lambda_plus) || lambda <= 0.0) return 0.0;
  const double s2 = spec.sigma_r * spec.sigma_r;
  return spec.q / (2.0 * std::numbers::pi * s2) *
         std::sqrt((spec.lambda_plus - lambda) * (lambda - spec.lambda_minus)) / lambda;
}

double mp_cdf(double lambda, const MpSpectrum& spec) {
  const double a = spec.lambda_minus;
  const double b = spec.lambda_plus;
  if (lambda <= a) return 0.0;
  if (lambda >= b) return 1.0;
  // lambda(phi) = a + (b - a)(1 - cos phi)/2 removes both square-root
  // endpoint singularities from the integrand.
  const double half = 0.5 * (b - a);
  const double s2 = spec.sigma_r * spec.sigma_r;
  const double scale = spec.q / (2.0 * std::numbers::pi * s2) * half * half;
  auto integrand = [&](double phi) {
    const double s = std::sin(phi);
    return scale * s * s / (a + half * (1.0 - std::cos(phi)));
  };
  const double phi_max = std::acos(std::clamp(1.0 - (lambda - a) / half, -1.0, 1.0));
  const double value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, 0.0, phi_max, 10, 1e-12);
  return std::clamp(value, 0.0, 1.0);
}

double mp_ks_distance(const Eigen::VectorXd& eigenvalues, const MpSpectrum& spec) {
  require(eigenvalues.size() > 0, "mp_ks_distance: no eigenvalues");
  std::vector<double> sorted(eigenvalues.data(), eigenvalues.data() + eigenvalues.size());
  std::sort(sorted.begin(), sorted.end());
  const auto n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    const double f = mp_cdf(sorted[k], spec);
    d = std::max({d, std::abs(static_cast<double>(k + 1) / n - f), std::abs(f - static_cast<double>(k) / n)});
  }
  return d;
}

SpectrumPartition outside_mp(const EigenSystem& eigs, const MpSpectrum& spec) {
  SpectrumPartition p;
  for (Eigen::Index k = 0; k < eigs.values.size(); ++k) {
    const double l = eigs.values(k);
    if (l > spec.lambda_plus) {
      p.above.push_back(k);
    } else if (l < spec.lambda_minus) {
      p.below.push_back(k);
    } else {
      p.bulk.push_back(k);
    }
  }
  return p;
}

Eigen::MatrixXd PcaResult::reconstruct() const {
  return eigen.vectors.leftCols(factors.rows()) * factors;
}

Eigen::VectorXd PcaResult::explained_variance() const {
  const double total = eigen.values.sum();
  return eigen.values.head(factors.rows()) / total;
}

PcaResult pca_decompose(const ReturnsPanel& panel, Eigen::Index k) {
  panel.validate();
  const Eigen::Index n = panel.n_assets();
  const Eigen::Index t = panel.n_obs();
  require(k >= 1 && k <= n, "pca_decompose: k must lie in [1, N]");
  require(t >= 2, "pca_decompose: need at least two observations");

  PcaResult out;
  out.standardized = panel.returns.colwise() - panel.returns.rowwise().mean();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double sd = std::sqrt(out.standardized.row(i).squaredNorm() / static_cast<double>(t));
    if (!(sd > 0.0)) throw ValidationError("pca_decompose: zero variance for asset " + panel.assets[i]);
    out.standardized.row(i) /= sd;
  }
  Eigen::MatrixXd corr = out.standardized * out.standardized.transpose() / static_cast<double>(t);
  corr = 0.5 * (corr + corr.transpose()).eval();
  corr.diagonal().setOnes();
  out.eigen = symmetric_eigensystem(corr);
  out.factors = out.eigen.vectors.leftCols(k).transpose() * out.standardized;
  out.loadings = out.eigen.vectors.leftCols(k) * out.eigen.values.head(k).cwiseMax(0.0).cwiseSqrt().asDiagonal();
  return out;
}

ReturnsPanel pca_synthesize(const EigenSystem& eigs, const Eigen::MatrixXd& shocks) {
  const Eigen::Index n = eigs.values.size();
  require(eigs.vectors.rows() == n && eigs.vectors.cols() == n, "pca_synthesize: malformed eigensystem");
  require(shocks.rows() >= 1 && shocks.rows() <= n, "pca_synthesize: shock rows must lie in [1, N]");
  const Eigen::Index k = shocks.rows();
  const Eigen::VectorXd scale = eigs.values.head(k).cwiseMax(0.0).cwiseSqrt();
  Eigen::MatrixXd r = eigs.vectors.leftCols(k) * scale.asDiagonal() * shocks;
  return make_returns_panel(std::move(r));
}

}  // namespace finnet
