#include "finnet/spillover.hpp"

#include "finnet/error.hpp"
#include "finnet/parallel.hpp"
#include "finnet/stats.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>

namespace finnet {

double companion_spectral_radius(const std::vector<Eigen::MatrixXd>& coefficients) {
  require(!coefficients.empty(), "VAR needs at least one lag");
  const Eigen::Index n = coefficients.front().rows();
  const auto p = static_cast<Eigen::Index>(coefficients.size());
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(n * p, n * p);
  for (Eigen::Index l = 0; l < p; ++l) companion.block(0, l * n, n, n) = coefficients[static_cast<std::size_t>(l)];
  if (p > 1) companion.block(n, 0, n * (p - 1), n * (p - 1)).setIdentity();
  const Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

VarFit var_fit(const ReturnsPanel& panel, int p) {
  panel.validate();
  require(p >= 1, "VAR lag order must be at least 1");
  const Eigen::Index n = panel.n_assets();
  const Eigen::Index t = panel.n_obs();
  require(n >= 1, "VAR needs at least one series");
  require(n <= kVarMaxAssets, "VAR is limited to 50 series");
  require(t > n * p + 10, "VAR needs more than N*p + 10 observations");

  const Eigen::Index rows = t - p;
  const Eigen::Index k = n * p + 1;
  Eigen::MatrixXd x(rows, k);
  for (Eigen::Index r = 0; r < rows; ++r) {
    x(r, 0) = 1.0;
    for (Eigen::Index l = 1; l <= p; ++l) x.block(r, 1 + (l - 1) * n, 1, n) = panel.returns.col(p + r - l).transpose();
  }
  VarFit fit;
  fit.assets = panel.assets;
  fit.p = p;
  fit.n_obs = rows;
  fit.intercept.resize(n);
  fit.coefficients.assign(static_cast<std::size_t>(p), Eigen::MatrixXd(n, n));
  Eigen::MatrixXd resid(rows, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd y = panel.returns.row(i).segment(p, rows).transpose();
    const LeastSquaresFit eq = least_squares(x, y);
    fit.intercept(i) = eq.coef(0);
    for (Eigen::Index l = 0; l < p; ++l) fit.coefficients[static_cast<std::size_t>(l)].row(i) = eq.coef.segment(1 + l * n, n).transpose();
    resid.col(i) = eq.residuals;
  }
  fit.omega = resid.transpose() * resid / static_cast<double>(rows - k);
  fit.omega = 0.5 * (fit.omega + fit.omega.transpose()).eval();
  fit.spectral_radius = companion_spectral_radius(fit.coefficients);
  fit.stable = fit.spectral_radius < 1.0;
  return fit;
}

std::vector<Eigen::MatrixXd> ma_coefficients(const VarFit& fit, int horizon) {
  require(horizon >= 1, "horizon must be at least 1");
  const Eigen::Index n = fit.n_vars();
  std::vector<Eigen::MatrixXd> theta;
  theta.reserve(static_cast<std::size_t>(horizon));
  theta.push_back(Eigen::MatrixXd::Identity(n, n));
  for (int h = 1; h < horizon; ++h) {
    Eigen::MatrixXd next = Eigen::MatrixXd::Zero(n, n);
    for (int l = 1; l <= std::min(h, fit.p); ++l) {
      next += fit.coefficients[static_cast<std::size_t>(l - 1)] * theta[static_cast<std::size_t>(h - l)];
    }
    theta.push_back(std::move(next));
  }
  return theta;
}

FevdMatrix gfevd(const VarFit& fit, int horizon) {
  require(fit.stable, "generalized FEVD needs a stable VAR");
  const Eigen::Index n = fit.n_vars();
  FevdMatrix out;
  out.horizon = horizon;
  out.assets = fit.assets;
  out.sigma = fit.omega.diagonal();
  for (Eigen::Index j = 0; j < n; ++j) {
    if (!(out.sigma(j) > 0.0)) throw NumericalError("generalized FEVD: zero shock variance for series " + std::to_string(j));
  }
  Eigen::MatrixXd numerator = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd denominator = Eigen::VectorXd::Zero(n);
  for (const Eigen::MatrixXd& theta : ma_coefficients(fit, horizon)) {
    const Eigen::MatrixXd response = theta * fit.omega;  // (i, j) = e_i' Theta_h Omega e_j
    numerator += response.cwiseAbs2();
    denominator += (response * theta.transpose()).diagonal();
  }
  out.raw.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) out.raw(i, j) = numerator(i, j) / (out.sigma(j) * denominator(i));
  }
  out.normalized = out.raw.array().colwise() / out.raw.rowwise().sum().array();
  return out;
}

FilteredGraph spillover_network(const FevdMatrix& fevd, DiagonalMode mode) {
  const Eigen::MatrixXd& d = fevd.normalized;
  const Eigen::Index n = d.rows();
  FilteredGraph g;
  g.nodes = fevd.assets;
  g.directed = true;
  g.provenance = Provenance::fevd;
  g.node_weights.resize(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    double off = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j != i) off += d(i, j);
    }
    g.node_weights[static_cast<std::size_t>(i)] = mode == DiagonalMode::own_share ? d(i, i) : off;
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      if (i != j && d(i, j) > 0.0) g.edges.push_back({static_cast<int>(j), static_cast<int>(i), d(i, j), std::nullopt});
    }
  }
  return g;
}

Connectedness connectedness(const FevdMatrix& fevd) {
  const Eigen::MatrixXd& d = fevd.normalized;
  const Eigen::Index n = d.rows();
  Eigen::MatrixXd off = d;
  off.diagonal().setZero();
  Connectedness c;
  c.from = off.rowwise().sum();
  c.to = off.colwise().sum().transpose();
  c.total = off.sum() / static_cast<double>(n);
  return c;
}

SpilloverPoint spillover_at(const ReturnsPanel& sample, int p, int horizon) {
  SpilloverPoint point;
  if (!sample.timestamps.empty()) point.timestamp = sample.timestamps.back();
  const VarFit fit = var_fit(sample, p);
  if (!fit.stable) {
    point.total = std::numeric_limits<double>::quiet_NaN();
    point.missing = true;
    return point;
  }
  point.total = connectedness(gfevd(fit, horizon)).total;
  return point;
}

std::vector<SpilloverPoint> rolling_spillover(const ReturnsPanel& panel, int p, int horizon, Eigen::Index window,
                                              Eigen::Index step, unsigned threads) {
  require(window >= 2 && window <= panel.n_obs(), "spillover window must lie in [2, T]");
  require(step >= 1, "spillover step must be at least 1");
  const auto count = static_cast<std::size_t>((panel.n_obs() - window) / step + 1);
  std::vector<SpilloverPoint> out(count);
  parallel_for(count, threads, [&](std::size_t w) {
    out[w] = spillover_at(panel.window(static_cast<Eigen::Index>(w) * step, window), p, horizon);
  });
  return out;
}

}  // namespace finnet
