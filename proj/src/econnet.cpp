#include "finnet/econnet.hpp"

#include "finnet/error.hpp"
#include "finnet/parallel.hpp"
#include "finnet/stats.hpp"
#include "finnet/volatility.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace finnet {

namespace {

Eigen::VectorXd demeaned_row(const ReturnsPanel& panel, int i) {
  Eigen::VectorXd row = panel.returns.row(i);
  return row.array() - row.mean();
}

void require_pair(const FilteredReturns& panel, int i, int j) {
  const auto n = static_cast<int>(panel.n_assets());
  require(i >= 0 && i < n && j >= 0 && j < n, "pair index out of range");
  require(i != j, "pair needs two distinct assets");
}

// b coefficient of `effect` on lagged `cause`, controlling for the effect's own lag.
PairEdge granger_direction(const Eigen::VectorXd& cause, const Eigen::VectorXd& effect, int cause_id, int effect_id) {
  const Eigen::Index t = effect.size() - 1;
  Eigen::MatrixXd x(t, 2);
  x.col(0) = effect.head(t);
  x.col(1) = cause.head(t);
  const Eigen::VectorXd y = effect.tail(t);
  const LeastSquaresFit fit = least_squares(x, y);
  PairEdge e;
  e.i = cause_id;
  e.j = effect_id;
  e.beta = fit.coef(1);
  e.t_stat = fit.t_stat(1);
  e.p_value = fit.p_value(1);
  e.direction = EdgeDirection::forward;
  return e;
}

}  // namespace

FactorFit factor_fit(std::span<const double> asset, const std::vector<std::vector<double>>& factors,
                     std::optional<std::span<const double>> riskfree) {
  const auto n = static_cast<Eigen::Index>(asset.size());
  const auto k = static_cast<Eigen::Index>(factors.size());
  require(k >= 1, "factor fit needs at least one factor");
  for (const auto& f : factors) require(static_cast<Eigen::Index>(f.size()) == n, "factor series length differs from asset");
  if (riskfree) require(static_cast<Eigen::Index>(riskfree->size()) == n, "risk-free series length differs from asset");
  require(n >= k + 3, "factor fit needs at least two more observations than coefficients");

  Eigen::MatrixXd x(n, k + 1);
  Eigen::VectorXd y(n);
  for (Eigen::Index t = 0; t < n; ++t) {
    const double rf = riskfree ? (*riskfree)[static_cast<std::size_t>(t)] : 0.0;
    y(t) = asset[static_cast<std::size_t>(t)] - rf;
    x(t, 0) = 1.0;
    for (Eigen::Index m = 0; m < k; ++m) {
      x(t, m + 1) = factors[static_cast<std::size_t>(m)][static_cast<std::size_t>(t)] - (m == 0 ? rf : 0.0);
    }
  }
  const LeastSquaresFit fit = least_squares(x, y);
  FactorFit out;
  out.alpha = fit.coef(0);
  out.betas = fit.coef.tail(k);
  out.residual_variance = fit.residual_variance;
  out.alpha_p_value = fit.p_value(0);
  out.beta_p_values = fit.p_value.tail(k);
  out.residuals = fit.residuals;
  return out;
}

FilteredReturns degarch_panel(const ReturnsPanel& raw, unsigned threads) {
  raw.validate();
  ReturnsPanel out = raw;
  parallel_for(static_cast<std::size_t>(raw.n_assets()), threads, [&](std::size_t i) {
    const Eigen::VectorXd row = raw.returns.row(static_cast<Eigen::Index>(i));
    const std::span<const double> series(row.data(), static_cast<std::size_t>(row.size()));
    const GarchFit fit = garch_fit(series);
    const auto filtered = degarch(series, fit);
    for (std::size_t t = 0; t < filtered.size(); ++t) out.returns(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t)) = filtered[t];
  });
  return FilteredReturns(std::move(out));
}

std::pair<PairEdge, PairEdge> granger_pair(const FilteredReturns& panel, int i, int j) {
  require_pair(panel, i, j);
  require(static_cast<std::size_t>(panel.panel().n_obs()) >= kMinGrangerObservations,
          "Granger regression needs at least 30 observations");
  const Eigen::VectorXd ri = demeaned_row(panel.panel(), i);
  const Eigen::VectorXd rj = demeaned_row(panel.panel(), j);
  return {granger_direction(ri, rj, i, j), granger_direction(rj, ri, j, i)};
}

FilteredGraph granger_network(const FilteredReturns& panel, double alpha, unsigned threads) {
  require(alpha > 0.0 && alpha < 1.0, "significance level must lie in (0, 1)");
  const auto n = static_cast<int>(panel.n_assets());
  FilteredGraph g;
  g.nodes = panel.panel().assets;
  g.directed = true;
  g.provenance = Provenance::regression;
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
  }
  std::vector<std::pair<PairEdge, PairEdge>> results(pairs.size());
  parallel_for(pairs.size(), threads, [&](std::size_t k) { results[k] = granger_pair(panel, pairs[k].first, pairs[k].second); });
  for (const auto& [forward, backward] : results) {
    for (const PairEdge& e : {forward, backward}) {
      if (e.p_value < alpha) g.edges.push_back({e.i, e.j, e.beta, e.p_value});
    }
  }
  std::sort(g.edges.begin(), g.edges.end(), [](const Edge& a, const Edge& b) {
    return std::pair{a.source, a.target} < std::pair{b.source, b.target};
  });
  return g;
}

FilteredGraph granger_network(const ReturnsPanel& raw, double alpha, unsigned threads) {
  return granger_network(degarch_panel(raw, threads), alpha, threads);
}

RobustFit robust_regression(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double nu) {
  require(nu > 0.0, "Student-t degrees of freedom must be positive");
  const Eigen::Index n = x.rows();
  const Eigen::Index k = x.cols();
  const LeastSquaresFit start = least_squares(x, y);
  RobustFit fit;
  fit.coef = start.coef;
  Eigen::VectorXd resid = start.residuals;
  double scale2 = std::max(start.residual_variance, 1e-300);
  Eigen::VectorXd w(n);
  constexpr int max_iterations = 200;
  for (int it = 1; it <= max_iterations; ++it) {
    fit.iterations = it;
    for (Eigen::Index t = 0; t < n; ++t) w(t) = (nu + 1.0) / (nu + resid(t) * resid(t) / scale2);
    const Eigen::VectorXd sw = w.cwiseSqrt();
    const Eigen::MatrixXd xw = sw.asDiagonal() * x;
    const Eigen::VectorXd yw = sw.cwiseProduct(y);
    const Eigen::VectorXd coef = xw.colPivHouseholderQr().solve(yw);
    resid = y - x * coef;
    const double new_scale2 = std::max((w.array() * resid.array().square()).sum() / static_cast<double>(n), 1e-300);
    const double change = (coef - fit.coef).lpNorm<Eigen::Infinity>() / std::max(1.0, coef.lpNorm<Eigen::Infinity>());
    const double scale_change = std::abs(new_scale2 - scale2) / scale2;
    fit.coef = coef;
    scale2 = new_scale2;
    if (change < 1e-10 && scale_change < 1e-10) {
      fit.converged = true;
      break;
    }
  }
  fit.scale = std::sqrt(scale2);
  double psi2 = 0.0;
  double dpsi = 0.0;
  for (Eigen::Index t = 0; t < n; ++t) {
    const double u = resid(t) / fit.scale;
    const double den = nu + u * u;
    const double psi = (nu + 1.0) * u / den;
    psi2 += psi * psi;
    dpsi += (nu + 1.0) * (nu - u * u) / (den * den);
  }
  psi2 /= static_cast<double>(n);
  dpsi /= static_cast<double>(n);
  if (!(dpsi > 0.0)) throw NumericalError("robust regression: sandwich variance is undefined");
  const Eigen::MatrixXd xtx_inv = (x.transpose() * x).ldlt().solve(Eigen::MatrixXd::Identity(k, k));
  const double factor = scale2 * psi2 / (dpsi * dpsi);
  fit.std_err = (factor * xtx_inv.diagonal().array()).sqrt().matrix();
  fit.t_stat = fit.coef.cwiseQuotient(fit.std_err);
  fit.df = static_cast<double>(n - k);
  return fit;
}

PairEdge robust_pair(const FilteredReturns& panel, int i, int j, double nu) {
  require_pair(panel, i, j);
  const Eigen::Index t = panel.panel().n_obs();
  require(t >= 3, "pair regression needs at least three observations");
  Eigen::MatrixXd x(t, 2);
  x.col(0).setOnes();
  x.col(1) = panel.panel().returns.row(j).transpose();
  const Eigen::VectorXd y = panel.panel().returns.row(i).transpose();
  const RobustFit fit = robust_regression(x, y, nu);
  PairEdge e;
  e.i = i;
  e.j = j;
  e.beta = fit.coef(1);
  e.t_stat = fit.t_stat(1);
  e.p_value = upper_tail_p(fit.t_stat(1), fit.df);
  e.direction = EdgeDirection::undirected;
  return e;
}

PValueNetwork robust_pair_network(const FilteredReturns& panel, double gamma, const PairNetworkOptions& options) {
  require(gamma > 0.0 && gamma < 1.0, "gamma must lie in (0, 1)");
  const auto n = static_cast<int>(panel.n_assets());
  PValueNetwork out;
  out.gamma = gamma;
  out.p_values.kind = MatrixKind::pvalue;
  out.p_values.assets = panel.panel().assets;
  out.p_values.values = Eigen::MatrixXd::Zero(n, n);
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j) pairs.emplace_back(i, j);
    }
  }
  std::vector<double> p(pairs.size());
  parallel_for(pairs.size(), options.threads, [&](std::size_t k) {
    p[k] = robust_pair(panel, pairs[k].first, pairs[k].second, options.nu).p_value;
  });
  for (std::size_t k = 0; k < pairs.size(); ++k) out.p_values.values(pairs[k].first, pairs[k].second) = p[k];

  FilteredGraph& g = out.graph;
  g.nodes = panel.panel().assets;
  g.provenance = Provenance::regression;
  double top = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double pij = out.p_values.values(i, j);
      const double pji = out.p_values.values(j, i);
      const double pe = options.rule == EdgeRule::either ? std::min(pij, pji) : std::max(pij, pji);
      if (pe < gamma) {
        g.edges.push_back({i, j, gamma - pe, pe});
        top = std::max(top, gamma - pe);
      }
    }
  }
  for (auto& e : g.edges) e.weight /= top;
  return out;
}

PValueNetwork robust_pair_network(const ReturnsPanel& raw, double gamma, const PairNetworkOptions& options) {
  return robust_pair_network(degarch_panel(raw, options.threads), gamma, options);
}

FilteredGraph aggregate_network(const FilteredGraph& net, const LabelMap& labels) {
  const std::size_t n = net.nodes.size();
  std::vector<std::string> group_of(n);
  std::map<std::string, int> groups;
  for (std::size_t i = 0; i < n; ++i) {
    const auto it = labels.find(net.nodes[i]);
    if (it == labels.end()) throw ValidationError("missing sector/country label for asset " + net.nodes[i]);
    group_of[i] = it->second.country + "/" + it->second.sector;
    groups.emplace(group_of[i], 0);
  }
  FilteredGraph out;
  out.directed = net.directed;
  out.provenance = Provenance::aggregate;
  for (auto& [name, id] : groups) {
    id = static_cast<int>(out.nodes.size());
    out.nodes.push_back(name);
  }
  const std::size_t ng = out.nodes.size();
  std::vector<int> gid(n);
  std::vector<double> size(ng, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    gid[i] = groups.at(group_of[i]);
    size[static_cast<std::size_t>(gid[i])] += 1.0;
  }
  Eigen::MatrixXd total = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(ng), static_cast<Eigen::Index>(ng));
  for (const auto& e : net.edges) {
    const int a = gid[static_cast<std::size_t>(e.source)];
    const int b = gid[static_cast<std::size_t>(e.target)];
    if (a == b) continue;
    total(a, b) += e.weight;
    if (!net.directed) total(b, a) += e.weight;
  }
  for (std::size_t a = 0; a < ng; ++a) {
    for (std::size_t b = 0; b < ng; ++b) {
      if (a == b || (!net.directed && b < a)) continue;
      const double w = total(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) / (size[a] * size[b]);
      if (w != 0.0) out.edges.push_back({static_cast<int>(a), static_cast<int>(b), w, std::nullopt});
    }
  }
  return out;
}

}  // namespace finnet
