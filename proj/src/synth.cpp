#include "finnet/synth.hpp"

#include "finnet/error.hpp"
#include "finnet/random.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>

namespace finnet {

namespace {

Eigen::MatrixXd cholesky_factor(const Eigen::MatrixXd& m, const char* what) {
  const Eigen::LLT<Eigen::MatrixXd> llt(m);
  require(llt.info() == Eigen::Success, std::string(what) + " must be positive definite");
  return llt.matrixL();
}

Eigen::VectorXd normal_vector(Eigen::Index n, Rng& rng) {
  std::normal_distribution<double> normal;
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = normal(rng);
  return v;
}

}  // namespace

ReturnsPanel gaussian_panel(const Eigen::MatrixXd& corr, Eigen::Index t, std::uint64_t seed, double vol,
                            double student_df) {
  require(t >= 1, "generator needs at least one observation");
  require(student_df == 0.0 || student_df > 2.0, "Student-t shocks need more than 2 degrees of freedom");
  const Eigen::MatrixXd l = cholesky_factor(corr, "correlation matrix");
  const Eigen::Index n = corr.rows();
  Rng rng(seed);
  std::normal_distribution<double> normal;
  std::chi_squared_distribution<double> chi2(student_df > 0.0 ? student_df : 1.0);
  const double t_scale = student_df > 0.0 ? std::sqrt((student_df - 2.0) / student_df) : 1.0;
  Eigen::MatrixXd r(n, t);
  Eigen::VectorXd z(n);
  for (Eigen::Index s = 0; s < t; ++s) {
    for (Eigen::Index i = 0; i < n; ++i) {
      z(i) = normal(rng);
      if (student_df > 0.0) z(i) *= t_scale / std::sqrt(chi2(rng) / student_df);
    }
    r.col(s) = vol * (l * z);
  }
  return make_returns_panel(std::move(r));
}

ReturnsPanel single_index_panel(const Eigen::VectorXd& betas, Eigen::Index t, std::uint64_t seed, double market_vol,
                                double idio_vol, bool include_market) {
  require(t >= 1, "generator needs at least one observation");
  const Eigen::Index n = betas.size();
  Rng rng(seed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd r(n + (include_market ? 1 : 0), t);
  for (Eigen::Index s = 0; s < t; ++s) {
    const double m = market_vol * normal(rng);
    for (Eigen::Index i = 0; i < n; ++i) r(i, s) = betas(i) * m + idio_vol * normal(rng);
    if (include_market) r(n, s) = m;
  }
  std::vector<std::string> names;
  for (Eigen::Index i = 0; i < n; ++i) names.push_back("A" + std::to_string(i));
  if (include_market) names.emplace_back("MKT");
  return make_returns_panel(std::move(r), std::move(names));
}

Eigen::MatrixXd block_correlation(const std::vector<int>& sizes, double within, double between) {
  const std::vector<int> label = block_labels(sizes);
  const auto n = static_cast<Eigen::Index>(label.size());
  Eigen::MatrixXd c(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      c(i, j) = i == j ? 1.0 : (label[static_cast<std::size_t>(i)] == label[static_cast<std::size_t>(j)] ? within : between);
    }
  }
  return c;
}

std::vector<int> block_labels(const std::vector<int>& sizes) {
  std::vector<int> label;
  for (std::size_t b = 0; b < sizes.size(); ++b) {
    require(sizes[b] >= 1, "block sizes must be positive");
    label.insert(label.end(), static_cast<std::size_t>(sizes[b]), static_cast<int>(b));
  }
  return label;
}

Eigen::MatrixXd equicorrelation(Eigen::Index n, double rho) {
  Eigen::MatrixXd c = Eigen::MatrixXd::Constant(n, n, rho);
  c.diagonal().setOnes();
  return c;
}

ReturnsPanel garch_panel(Eigen::Index n, const GarchParams& params, Eigen::Index t, std::uint64_t seed) {
  require(n >= 1 && t >= 1, "generator needs at least one asset and one observation");
  Eigen::MatrixXd r(n, t);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto path = garch_simulate(params, static_cast<std::size_t>(t), split_seed(seed, static_cast<std::uint64_t>(i)));
    r.row(i) = Eigen::Map<const Eigen::RowVectorXd>(path.data(), t);
  }
  return make_returns_panel(std::move(r));
}

ReturnsPanel dcc_panel(const Eigen::MatrixXd& qbar, double a, double b, const GarchParams& margin, Eigen::Index t,
                       std::uint64_t seed) {
  require(a >= 0.0 && b >= 0.0 && a + b < 1.0, "DCC parameters need a, b >= 0 and a + b < 1");
  require(margin.alphas.size() == 1 && margin.betas.size() == 1, "DCC margins are GARCH(1,1)");
  margin.validate();
  cholesky_factor(qbar, "Qbar");
  const Eigen::Index n = qbar.rows();
  constexpr Eigen::Index burn_in = 500;
  Rng rng(seed);
  Eigen::MatrixXd q = qbar;
  Eigen::VectorXd h = Eigen::VectorXd::Constant(n, margin.unconditional_variance());
  Eigen::VectorXd z_prev = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd r_prev = Eigen::VectorXd::Zero(n);
  Eigen::MatrixXd r(n, t);
  for (Eigen::Index s = 0; s < burn_in + t; ++s) {
    if (s > 0) {
      q = (1.0 - a - b) * qbar + a * z_prev * z_prev.transpose() + b * q;
      h = (margin.alpha0 + margin.alphas[0] * r_prev.array().square() + margin.betas[0] * h.array()).matrix();
    }
    const Eigen::VectorXd d = q.diagonal().cwiseSqrt().cwiseInverse();
    const Eigen::MatrixXd corr = d.asDiagonal() * q * d.asDiagonal();
    const Eigen::VectorXd z = cholesky_factor(corr, "conditional correlation") * normal_vector(n, rng);
    r_prev = h.cwiseSqrt().cwiseProduct(z);
    z_prev = z;
    if (s >= burn_in) r.col(s - burn_in) = r_prev;
  }
  return make_returns_panel(std::move(r));
}

ReturnsPanel var_panel(const std::vector<Eigen::MatrixXd>& coefficients, const Eigen::VectorXd& intercept,
                       const Eigen::MatrixXd& omega, Eigen::Index t, std::uint64_t seed, Eigen::Index burn_in) {
  require(!coefficients.empty(), "VAR needs at least one lag");
  const Eigen::Index n = omega.rows();
  require(intercept.size() == n, "intercept length differs from the shock covariance");
  const Eigen::MatrixXd l = cholesky_factor(omega, "shock covariance");
  const std::size_t p = coefficients.size();
  Rng rng(seed);
  std::vector<Eigen::VectorXd> history(p, Eigen::VectorXd::Zero(n));  // most recent first
  Eigen::MatrixXd r(n, t);
  for (Eigen::Index s = 0; s < burn_in + t; ++s) {
    Eigen::VectorXd y = intercept + l * normal_vector(n, rng);
    for (std::size_t k = 0; k < p; ++k) y += coefficients[k] * history[k];
    history.pop_back();
    history.insert(history.begin(), y);
    if (s >= burn_in) r.col(s - burn_in) = y;
  }
  return make_returns_panel(std::move(r));
}

std::vector<double> pareto_sample(double alpha, std::size_t n, std::uint64_t seed, bool symmetric) {
  require(alpha > 0.0, "Pareto index must be positive");
  Rng rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::bernoulli_distribution sign;
  std::vector<double> out(n);
  for (auto& x : out) {
    x = std::pow(1.0 - uniform(rng), -1.0 / alpha);
    if (symmetric && sign(rng)) x = -x;
  }
  return out;
}

std::vector<double> student_t_sample(double df, std::size_t n, std::uint64_t seed) {
  require(df > 0.0, "degrees of freedom must be positive");
  Rng rng(seed);
  std::student_t_distribution<double> dist(df);
  std::vector<double> out(n);
  for (auto& x : out) x = dist(rng);
  return out;
}

std::vector<std::string> business_dates(std::size_t count) {
  using namespace std::chrono;
  std::vector<std::string> out;
  out.reserve(count);
  sys_days day = year{2000} / January / 3;
  while (out.size() < count) {
    const unsigned wd = weekday(day).c_encoding();
    if (wd != 0 && wd != 6) {
      const year_month_day ymd(day);
      char buf[16];
      std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                    static_cast<unsigned>(ymd.day()));
      out.emplace_back(buf);
    }
    day += days{1};
  }
  return out;
}

PricePanel prices_from_returns(const ReturnsPanel& returns, double p0) {
  require(p0 > 0.0, "starting price must be positive");
  const Eigen::Index n = returns.n_assets();
  const Eigen::Index t = returns.n_obs();
  PricePanel out;
  out.assets = returns.assets;
  out.labels = returns.labels;
  out.prices.resize(n, t + 1);
  out.prices.col(0).setConstant(p0);
  for (Eigen::Index s = 0; s < t; ++s) out.prices.col(s + 1) = out.prices.col(s).array() * returns.returns.col(s).array().exp();
  out.timestamps = business_dates(static_cast<std::size_t>(t + 1));
  return out;
}

}  // namespace finnet
