#include "finnet/panel.hpp"

#include "finnet/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace finnet {

void PricePanel::validate() const {
  require(static_cast<Eigen::Index>(assets.size()) == prices.rows(),
          "price panel: asset count does not match price rows");
  require(static_cast<Eigen::Index>(timestamps.size()) == prices.cols(),
          "price panel: timestamp count does not match price columns");
  for (std::size_t t = 1; t < timestamps.size(); ++t) {
    require(timestamps[t - 1] < timestamps[t],
            "price panel: timestamps not strictly increasing at " + timestamps[t]);
  }
  for (Eigen::Index i = 0; i < prices.rows(); ++i) {
    for (Eigen::Index t = 0; t < prices.cols(); ++t) {
      const double p = prices(i, t);
      if (!(std::isfinite(p) && p > 0.0)) {
        throw ValidationError("non-positive price for asset " + assets[i] + " at " + timestamps[t]);
      }
    }
  }
}

ReturnsPanel ReturnsPanel::window(Eigen::Index start, Eigen::Index length) const {
  require(start >= 0 && length >= 0 && start + length <= n_obs(), "returns window out of range");
  ReturnsPanel out;
  out.assets = assets;
  out.labels = labels;
  out.timestamps.assign(timestamps.begin() + start, timestamps.begin() + start + length);
  out.returns = returns.middleCols(start, length);
  if (!filled.empty()) {
    out.filled.reserve(filled.size());
    for (const auto& row : filled) out.filled.emplace_back(row.begin() + start, row.begin() + start + length);
  }
  return out;
}

Eigen::Index ReturnsPanel::index_of(const std::string& asset) const {
  const auto it = std::find(assets.begin(), assets.end(), asset);
  require(it != assets.end(), "unknown asset: " + asset);
  return static_cast<Eigen::Index>(it - assets.begin());
}

void ReturnsPanel::validate() const {
  require(static_cast<Eigen::Index>(assets.size()) == returns.rows(),
          "returns panel: asset count does not match rows");
  require(static_cast<Eigen::Index>(timestamps.size()) == returns.cols(),
          "returns panel: timestamp count does not match columns");
  for (std::size_t t = 1; t < timestamps.size(); ++t) {
    require(timestamps[t - 1] < timestamps[t], "returns panel: timestamps not strictly increasing at " + timestamps[t]);
  }
  require(returns.allFinite(), "returns panel contains non-finite values");
}

ReturnsPanel make_returns_panel(Eigen::MatrixXd returns, std::vector<std::string> assets,
                                std::vector<std::string> timestamps) {
  ReturnsPanel out;
  if (assets.empty()) {
    for (Eigen::Index i = 0; i < returns.rows(); ++i) assets.push_back("A" + std::to_string(i));
  }
  if (timestamps.empty()) {
    const std::size_t width = std::to_string(std::max<Eigen::Index>(returns.cols() - 1, 0)).size();
    for (Eigen::Index t = 0; t < returns.cols(); ++t) {
      std::string s = std::to_string(t);
      timestamps.push_back(std::string(width - s.size(), '0') + s);
    }
  }
  out.assets = std::move(assets);
  out.timestamps = std::move(timestamps);
  out.returns = std::move(returns);
  out.validate();
  return out;
}

ReturnsPanel log_returns(const PricePanel& panel) {
  panel.validate();
  require(panel.n_obs() >= 2, "log returns need at least two prices");
  ReturnsPanel out;
  out.assets = panel.assets;
  out.labels = panel.labels;
  out.timestamps.assign(panel.timestamps.begin() + 1, panel.timestamps.end());
  const Eigen::MatrixXd logp = panel.prices.array().log().matrix();
  out.returns = logp.rightCols(panel.n_obs() - 1) - logp.leftCols(panel.n_obs() - 1);
  return out;
}

Eigen::MatrixXd normalized_prices(const PricePanel& panel) {
  panel.validate();
  Eigen::MatrixXd out = panel.prices;
  for (Eigen::Index i = 0; i < out.rows(); ++i) out.row(i) /= panel.prices(i, 0);
  return out;
}

double mean(std::span<const double> series) {
  require(!series.empty(), "mean of empty series");
  return std::accumulate(series.begin(), series.end(), 0.0) / static_cast<double>(series.size());
}

double variance(std::span<const double> series, VarianceConvention convention) {
  require(series.size() >= 2, "variance needs at least two observations");
  const double m = mean(series);
  double ss = 0.0;
  for (double x : series) ss += (x - m) * (x - m);
  const auto n = static_cast<double>(series.size());
  return convention == VarianceConvention::sample ? ss / (n - 1.0) : ss / n;
}

double sample_variance(std::span<const double> series) {
  return variance(series, VarianceConvention::sample);
}

std::vector<double> standardize(std::span<const double> series, VarianceConvention convention) {
  const double v = variance(series, convention);
  require(v > 0.0, "cannot standardize a zero-variance series");
  const double m = mean(series);
  const double sd = std::sqrt(v);
  std::vector<double> out(series.size());
  std::transform(series.begin(), series.end(), out.begin(), [&](double x) { return (x - m) / sd; });
  return out;
}

std::vector<double> acf(std::span<const double> series, std::size_t max_lag) {
  require(max_lag < series.size(), "acf: max_lag must be smaller than the series length");
  const double m = mean(series);
  double denom = 0.0;
  for (double x : series) denom += (x - m) * (x - m);
  require(denom > 0.0, "acf of a constant series is undefined");
  std::vector<double> out(max_lag + 1);
  for (std::size_t k = 0; k <= max_lag; ++k) {
    double num = 0.0;
    for (std::size_t t = 0; t + k < series.size(); ++t) num += (series[t] - m) * (series[t + k] - m);
    out[k] = num / denom;
  }
  return out;
}

std::vector<CcdfPoint> ccdf(std::span<const double> values) {
  require(!values.empty(), "ccdf of empty input");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const auto n = static_cast<double>(sorted.size());
  std::vector<CcdfPoint> out;
  for (std::size_t k = 0; k < sorted.size();) {
    std::size_t j = k;
    while (j < sorted.size() && sorted[j] == sorted[k]) ++j;
    out.push_back({sorted[k], static_cast<double>(sorted.size() - j) / n});
    k = j;
  }
  return out;
}

TailFit tail_exponent(std::span<const double> values, double tail_fraction) {
  require(tail_fraction > 0.0 && tail_fraction <= 1.0, "tail fraction must lie in (0, 1]");
  std::vector<double> mags;
  mags.reserve(values.size());
  for (double v : values) {
    if (v != 0.0) mags.push_back(std::abs(v));
  }
  const auto k = static_cast<std::size_t>(std::floor(tail_fraction * static_cast<double>(mags.size())));
  if (k < kMinTailPoints || k >= mags.size()) {
    throw ValidationError("tail exponent: too few tail observations (" + std::to_string(k) + ", need " +
                          std::to_string(kMinTailPoints) + ")");
  }
  // Top k order statistics plus the threshold X_(k+1).
  std::nth_element(mags.begin(), mags.begin() + static_cast<std::ptrdiff_t>(k), mags.end(), std::greater<>());
  const double threshold = mags[k];
  double sum_log = 0.0;
  for (std::size_t i = 0; i < k; ++i) sum_log += std::log(mags[i] / threshold);
  require(sum_log > 0.0, "tail exponent: degenerate tail (all tail values equal)");
  return TailFit{static_cast<double>(k) / sum_log, tail_fraction, k};
}

}  // namespace finnet
