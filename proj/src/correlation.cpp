#include "finnet/correlation.hpp"

#include "finnet/error.hpp"
#include "finnet/parallel.hpp"
#include "finnet/random.hpp"
#include "finnet/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace finnet {

namespace {

// Turns a covariance-like matrix into an exactly symmetric, unit-diagonal,
// clamped correlation matrix.
Eigen::MatrixXd normalize_covariance(const Eigen::MatrixXd& cov, const std::vector<std::string>& assets) {
  const Eigen::Index n = cov.rows();
  Eigen::VectorXd sd(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(cov(i, i) > 0.0)) throw ValidationError("zero variance for asset " + assets[i]);
    sd(i) = std::sqrt(cov(i, i));
  }
  Eigen::MatrixXd corr(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    corr(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double c = std::clamp(cov(i, j) / (sd(i) * sd(j)), -1.0, 1.0);
      corr(i, j) = c;
      corr(j, i) = c;
    }
  }
  return corr;
}

Eigen::MatrixXd centered(const Eigen::MatrixXd& data) {
  return data.colwise() - data.rowwise().mean();
}

WindowInfo describe_window(const ReturnsPanel& panel, Eigen::Index start, Eigen::Index length,
                           std::optional<double> theta = std::nullopt) {
  WindowInfo w;
  if (length > 0 && !panel.timestamps.empty()) {
    w.start = panel.timestamps[static_cast<std::size_t>(start)];
    w.end = panel.timestamps[static_cast<std::size_t>(start + length - 1)];
  }
  w.delta_t = length;
  w.theta = theta;
  return w;
}

bool symmetric(const Eigen::MatrixXd& m, double tol) {
  return m.rows() == m.cols() && (m - m.transpose()).cwiseAbs().maxCoeff() <= tol;
}

}  // namespace

const char* to_string(MatrixKind kind) {
  switch (kind) {
    case MatrixKind::correlation: return "correlation";
    case MatrixKind::covariance: return "covariance";
    case MatrixKind::distance: return "distance";
    case MatrixKind::pvalue: return "pvalue";
    case MatrixKind::fevd: return "fevd";
  }
  return "unknown";
}

MatrixKind matrix_kind_from_string(const std::string& name) {
  for (auto k : {MatrixKind::correlation, MatrixKind::covariance, MatrixKind::distance, MatrixKind::pvalue,
                 MatrixKind::fevd}) {
    if (name == to_string(k)) return k;
  }
  throw ValidationError("unknown matrix kind: " + name);
}

void DependencyMatrix::validate(double tolerance) const {
  require(values.rows() == values.cols(), "dependency matrix must be square");
  require(static_cast<Eigen::Index>(assets.size()) == values.rows(), "dependency matrix: asset count mismatch");
  require(values.allFinite(), "dependency matrix contains non-finite values");
  const Eigen::Index n = values.rows();
  switch (kind) {
    case MatrixKind::correlation:
      require(symmetric(values, 0.0), "correlation matrix is not symmetric");
      for (Eigen::Index i = 0; i < n; ++i) require(values(i, i) == 1.0, "correlation diagonal must be 1");
      require(values.cwiseAbs().maxCoeff() <= 1.0, "correlation entries outside [-1, 1]");
      break;
    case MatrixKind::covariance: {
      require(symmetric(values, tolerance), "covariance matrix is not symmetric");
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(values, Eigen::EigenvaluesOnly);
      require(n == 0 || es.eigenvalues().minCoeff() >= -tolerance, "covariance matrix is not PSD");
      break;
    }
    case MatrixKind::distance:
      require(symmetric(values, 0.0), "distance matrix is not symmetric");
      for (Eigen::Index i = 0; i < n; ++i) require(values(i, i) == 0.0, "distance diagonal must be 0");
      require(n == 0 || (values.minCoeff() >= 0.0 && values.maxCoeff() <= 2.0), "distance entries outside [0, 2]");
      break;
    case MatrixKind::pvalue:
      require(n == 0 || (values.minCoeff() >= 0.0 && values.maxCoeff() <= 1.0), "p-values outside [0, 1]");
      break;
    case MatrixKind::fevd:
      require(n == 0 || values.minCoeff() >= 0.0, "fevd entries must be non-negative");
      break;
  }
}

void WeightScheme::validate() const {
  require(delta_t >= 2, "weight scheme: delta_t must be at least 2");
  if (theta) require(*theta > 0.0 && std::isfinite(*theta), "weight scheme: theta must be positive");
}

double WeightScheme::w0(Eigen::Index delta_t, double theta) {
  require(theta > 0.0, "theta must be positive");
  // expm1 keeps precision when theta is much larger than delta_t.
  return std::expm1(-1.0 / theta) / std::expm1(-static_cast<double>(delta_t) / theta);
}

Eigen::VectorXd WeightScheme::weights() const {
  validate();
  if (!theta) return Eigen::VectorXd::Constant(delta_t, 1.0 / static_cast<double>(delta_t));
  const double base = w0(delta_t, *theta);
  Eigen::VectorXd w(delta_t);
  for (Eigen::Index t = 1; t <= delta_t; ++t) {
    w(t - 1) = base * std::exp(static_cast<double>(t - delta_t) / *theta);
  }
  return w;
}

double pearson_pair(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size() && x.size() >= 2, "pearson_pair: series must have equal length >= 2");
  const double mx = mean(x);
  const double my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t t = 0; t < x.size(); ++t) {
    const double dx = x[t] - mx;
    const double dy = y[t] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  require(sxx > 0.0 && syy > 0.0, "pearson_pair: zero variance series");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

DependencyMatrix covariance(const ReturnsPanel& panel, VarianceConvention convention) {
  panel.validate();
  require(panel.n_obs() >= 2, "covariance needs at least two observations");
  const Eigen::MatrixXd x = centered(panel.returns);
  const double divisor = static_cast<double>(panel.n_obs()) - (convention == VarianceConvention::sample ? 1.0 : 0.0);
  Eigen::MatrixXd cov = (x * x.transpose()) / divisor;
  cov = 0.5 * (cov + cov.transpose()).eval();
  return {MatrixKind::covariance, std::move(cov), panel.assets, describe_window(panel, 0, panel.n_obs())};
}

DependencyMatrix pearson(const ReturnsPanel& panel) {
  DependencyMatrix cov = covariance(panel);
  cov.values = normalize_covariance(cov.values, panel.assets);
  cov.kind = MatrixKind::correlation;
  return cov;
}

std::vector<DependencyMatrix> rolling_corr(const ReturnsPanel& panel, Eigen::Index delta_t, Eigen::Index step) {
  require(delta_t >= 3, "rolling_corr: delta_t must be at least 3");
  require(step >= 1, "rolling_corr: step must be at least 1");
  require(delta_t <= panel.n_obs(), "rolling_corr: delta_t exceeds the number of observations");
  std::vector<DependencyMatrix> out;
  for (Eigen::Index start = 0; start + delta_t <= panel.n_obs(); start += step) {
    DependencyMatrix m = pearson(panel.window(start, delta_t));
    m.window = describe_window(panel, start, delta_t);
    out.push_back(std::move(m));
  }
  return out;
}

namespace {

DependencyMatrix weighted_corr_window(const ReturnsPanel& panel, const Eigen::VectorXd& w, Eigen::Index start,
                                      const WeightScheme& scheme) {
  const Eigen::MatrixXd x = panel.returns.middleCols(start, scheme.delta_t);
  const Eigen::VectorXd mu = x * w;
  const Eigen::MatrixXd xc = x.colwise() - mu;
  const Eigen::MatrixXd cov = xc * w.asDiagonal() * xc.transpose();
  return {MatrixKind::correlation, normalize_covariance(cov, panel.assets), panel.assets,
          describe_window(panel, start, scheme.delta_t, scheme.theta)};
}

}  // namespace

DependencyMatrix weighted_corr(const ReturnsPanel& panel, const WeightScheme& scheme) {
  panel.validate();
  scheme.validate();
  require(scheme.delta_t <= panel.n_obs(), "weighted_corr: window longer than the panel");
  return weighted_corr_window(panel, scheme.weights(), panel.n_obs() - scheme.delta_t, scheme);
}

std::vector<DependencyMatrix> rolling_weighted_corr(const ReturnsPanel& panel, const WeightScheme& scheme,
                                                    Eigen::Index step) {
  panel.validate();
  scheme.validate();
  require(step >= 1, "rolling_weighted_corr: step must be at least 1");
  require(scheme.delta_t <= panel.n_obs(), "rolling_weighted_corr: window longer than the panel");
  const Eigen::VectorXd w = scheme.weights();
  std::vector<DependencyMatrix> out;
  for (Eigen::Index start = 0; start + scheme.delta_t <= panel.n_obs(); start += step) {
    out.push_back(weighted_corr_window(panel, w, start, scheme));
  }
  return out;
}

double partial_correlation(double c_ij, double c_im, double c_jm) {
  const double denom = (1.0 - c_im * c_im) * (1.0 - c_jm * c_jm);
  if (!(denom > 0.0)) throw ValidationError("partial correlation: mediator perfectly correlated with an asset");
  return std::clamp((c_ij - c_im * c_jm) / std::sqrt(denom), -1.0, 1.0);
}

DependencyMatrix partial_corr(const ReturnsPanel& panel, std::span<const double> mediator) {
  require(static_cast<Eigen::Index>(mediator.size()) == panel.n_obs(), "partial_corr: mediator length mismatch");
  const DependencyMatrix c = pearson(panel);
  const Eigen::Index n = panel.n_assets();
  std::vector<double> c_m(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd row = panel.returns.row(i).transpose();
    c_m[static_cast<std::size_t>(i)] = pearson_pair({row.data(), static_cast<std::size_t>(row.size())}, mediator);
    if (std::abs(c_m[static_cast<std::size_t>(i)]) >= 1.0) {
      throw ValidationError("partial_corr: mediator perfectly correlated with asset " + panel.assets[i]);
    }
  }
  DependencyMatrix out = c;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double p = partial_correlation(c.values(i, j), c_m[static_cast<std::size_t>(i)],
                                           c_m[static_cast<std::size_t>(j)]);
      out.values(i, j) = p;
      out.values(j, i) = p;
    }
  }
  return out;
}

DependencyMatrix partial_corr(const ReturnsPanel& panel, const std::string& mediator_asset) {
  const Eigen::Index m = panel.index_of(mediator_asset);
  const Eigen::VectorXd mediator = panel.returns.row(m).transpose();
  ReturnsPanel rest;
  rest.timestamps = panel.timestamps;
  rest.labels = panel.labels;
  rest.returns.resize(panel.n_assets() - 1, panel.n_obs());
  for (Eigen::Index i = 0, r = 0; i < panel.n_assets(); ++i) {
    if (i == m) continue;
    rest.assets.push_back(panel.assets[i]);
    rest.returns.row(r++) = panel.returns.row(i);
  }
  return partial_corr(rest, {mediator.data(), static_cast<std::size_t>(mediator.size())});
}

std::vector<double> mid_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  for (std::size_t k = 0; k < order.size();) {
    std::size_t j = k;
    while (j < order.size() && values[order[j]] == values[order[k]]) ++j;
    const double rank = 0.5 * static_cast<double>(k + 1 + j);  // mean of k+1..j
    for (std::size_t m = k; m < j; ++m) ranks[order[m]] = rank;
    k = j;
  }
  return ranks;
}

DependencyMatrix spearman(const ReturnsPanel& panel) {
  panel.validate();
  ReturnsPanel ranked = panel;
  for (Eigen::Index i = 0; i < panel.n_assets(); ++i) {
    const Eigen::VectorXd row = panel.returns.row(i).transpose();
    const auto r = mid_ranks({row.data(), static_cast<std::size_t>(row.size())});
    ranked.returns.row(i) = Eigen::Map<const Eigen::RowVectorXd>(r.data(), static_cast<Eigen::Index>(r.size()));
  }
  return pearson(ranked);
}

SignificanceBand parametric_band(Eigen::Index delta_t, double alpha) {
  require(delta_t >= 4, "significance band: delta_t must be at least 4");
  require(alpha > 0.0 && alpha < 1.0, "significance band: alpha must lie in (0, 1)");
  const double df = static_cast<double>(delta_t - 2);
  const double t = student_t_quantile(1.0 - alpha / 2.0, df);
  const double r = t / std::sqrt(df + t * t);
  return {alpha, -r, r, BandMethod::parametric_t, delta_t};
}

std::vector<double> permutation_draws(Eigen::Index delta_t, const ReturnsPanel& source,
                                      const PermutationOptions& options) {
  source.validate();
  require(delta_t >= 3 && delta_t <= source.n_obs(), "permutation draws: delta_t outside [3, T]");
  require(source.n_assets() >= 1, "permutation draws: empty source panel");
  constexpr std::size_t kChunk = 1024;
  const std::size_t n_chunks = (options.n_draws + kChunk - 1) / kChunk;
  std::vector<double> draws(options.n_draws);
  const auto n_assets = static_cast<std::uint64_t>(source.n_assets());
  const auto n_starts = static_cast<std::uint64_t>(source.n_obs() - delta_t + 1);
  const auto len = static_cast<std::size_t>(delta_t);

  parallel_for(n_chunks, options.threads, [&](std::size_t chunk) {
    Rng rng(split_seed(options.seed, chunk));
    std::vector<double> x(len), y(len);
    const std::size_t end = std::min(options.n_draws, (chunk + 1) * kChunk);
    for (std::size_t d = chunk * kChunk; d < end; ++d) {
      const auto i = static_cast<Eigen::Index>(rng() % n_assets);
      auto j = static_cast<Eigen::Index>(rng() % n_assets);
      if (n_assets > 1) {
        while (j == i) j = static_cast<Eigen::Index>(rng() % n_assets);
      }
      const auto si = static_cast<Eigen::Index>(rng() % n_starts);
      const auto sj = static_cast<Eigen::Index>(rng() % n_starts);
      for (std::size_t t = 0; t < len; ++t) {
        x[t] = source.returns(i, si + static_cast<Eigen::Index>(t));
        y[t] = source.returns(j, sj + static_cast<Eigen::Index>(t));
      }
      // Fisher-Yates on both series.
      for (std::size_t t = len - 1; t > 0; --t) {
        std::swap(x[t], x[rng() % (t + 1)]);
        std::swap(y[t], y[rng() % (t + 1)]);
      }
      draws[d] = pearson_pair(x, y);
    }
  });
  return draws;
}

SignificanceBand permutation_band(Eigen::Index delta_t, double alpha, const ReturnsPanel& source,
                                  const PermutationOptions& options) {
  require(alpha > 0.0 && alpha < 1.0, "significance band: alpha must lie in (0, 1)");
  require(options.n_draws >= kMinPermutationDraws, "permutation band needs at least 10^4 draws");
  auto draws = permutation_draws(delta_t, source, options);
  return {alpha, quantile(draws, alpha / 2.0), quantile(draws, 1.0 - alpha / 2.0), BandMethod::permutation,
          delta_t};
}

SignificanceBand significance_band(Eigen::Index delta_t, double alpha, BandMethod method,
                                   const ReturnsPanel* source, const PermutationOptions& options) {
  if (method == BandMethod::parametric_t) return parametric_band(delta_t, alpha);
  if (source == nullptr) throw ValidationError("permutation band requires a source returns panel");
  return permutation_band(delta_t, alpha, *source, options);
}

DependencyMatrix to_distance(const DependencyMatrix& corr) {
  require(corr.kind == MatrixKind::correlation, "to_distance expects a correlation matrix");
  DependencyMatrix out = corr;
  out.kind = MatrixKind::distance;
  const Eigen::Index n = corr.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    out.values(i, i) = 0.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double d = std::clamp(std::sqrt(std::max(0.0, 2.0 * (1.0 - corr.values(i, j)))), 0.0, 2.0);
      out.values(i, j) = d;
      out.values(j, i) = d;
    }
  }
  return out;
}

}  // namespace finnet
