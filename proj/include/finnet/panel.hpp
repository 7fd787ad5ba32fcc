#pragma once

// Price/return panels and the univariate stylized-fact statistics used
// throughout the library.

#include <Eigen/Dense>

#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace finnet {

struct AssetLabel {
  std::string sector;
  std::string country;

  friend bool operator==(const AssetLabel&, const AssetLabel&) = default;
};

using LabelMap = std::map<std::string, AssetLabel>;

/// N x T matrix of strictly positive prices, one row per asset.
struct PricePanel {
  std::vector<std::string> assets;
  std::vector<std::string> timestamps;
  Eigen::MatrixXd prices;
  LabelMap labels;

  [[nodiscard]] Eigen::Index n_assets() const { return prices.rows(); }
  [[nodiscard]] Eigen::Index n_obs() const { return prices.cols(); }

  /// Throws ValidationError naming the first offending asset/timestamp.
  void validate() const;
};

/// N x (T-1) matrix of log returns. `timestamps[t]` is the date of the
/// later price of the pair that produced column t.
struct ReturnsPanel {
  std::vector<std::string> assets;
  std::vector<std::string> timestamps;
  Eigen::MatrixXd returns;
  LabelMap labels;
  /// Set for returns touched by a forward-filled price (same shape as
  /// `returns`); empty when the panel had no gaps.
  std::vector<std::vector<bool>> filled;

  [[nodiscard]] Eigen::Index n_assets() const { return returns.rows(); }
  [[nodiscard]] Eigen::Index n_obs() const { return returns.cols(); }

  /// Column slice [start, start + length).
  [[nodiscard]] ReturnsPanel window(Eigen::Index start, Eigen::Index length) const;
  /// Row index of `asset`; throws when absent.
  [[nodiscard]] Eigen::Index index_of(const std::string& asset) const;
  void validate() const;
};

/// Build a ReturnsPanel from raw data, generating asset ids A0, A1, ...
/// and zero-padded integer timestamps when none are supplied.
ReturnsPanel make_returns_panel(Eigen::MatrixXd returns, std::vector<std::string> assets = {},
                                std::vector<std::string> timestamps = {});

enum class VarianceConvention {
  sample,      // divisor T-1
  population,  // divisor T
};

struct TailFit {
  double exponent = 0.0;
  double tail_fraction = 0.0;
  std::size_t n_tail = 0;
};

struct CcdfPoint {
  double x = 0.0;
  double survival = 0.0;  // fraction of values strictly greater than x
};

/// ln p[t+1] - ln p[t] for every asset.
ReturnsPanel log_returns(const PricePanel& panel);

/// Each row divided by its first price.
Eigen::MatrixXd normalized_prices(const PricePanel& panel);

double mean(std::span<const double> series);
double sample_variance(std::span<const double> series);
double variance(std::span<const double> series, VarianceConvention convention);

std::vector<double> standardize(std::span<const double> series,
                                VarianceConvention convention = VarianceConvention::sample);

/// Sample autocorrelation for lags 0..max_lag (value at lag 0 is 1).
std::vector<double> acf(std::span<const double> series, std::size_t max_lag);

/// Empirical survival function at each distinct value, ascending in x.
std::vector<CcdfPoint> ccdf(std::span<const double> values);

inline constexpr double kDefaultTailFraction = 0.05;
inline constexpr std::size_t kMinTailPoints = 50;

/// Hill estimator over the largest `tail_fraction` of |values|.
TailFit tail_exponent(std::span<const double> values, double tail_fraction = kDefaultTailFraction);

}  // namespace finnet
