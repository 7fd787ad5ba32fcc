#include "finnet/volatility.hpp"

#include "finnet/correlation.hpp"
#include "finnet/error.hpp"
#include "finnet/optimize.hpp"
#include "finnet/parallel.hpp"
#include "finnet/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <random>

namespace finnet {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

struct Demeaned {
  std::vector<double> eps;
  double mu = 0.0;
  double var = 0.0;  // sample variance (divisor T-1)
};

Demeaned demean(std::span<const double> series) {
  Demeaned d;
  d.mu = mean(series);
  d.eps.resize(series.size());
  double ss = 0.0;
  for (std::size_t t = 0; t < series.size(); ++t) {
    d.eps[t] = series[t] - d.mu;
    ss += d.eps[t] * d.eps[t];
  }
  d.var = ss / static_cast<double>(series.size() - 1);
  return d;
}

// Softmax over (z, 0); the last, implicit share is the slack.
std::vector<double> shares(const Eigen::VectorXd& z, Eigen::Index offset, Eigen::Index count) {
  double top = 0.0;
  for (Eigen::Index k = 0; k < count; ++k) top = std::max(top, z(offset + k));
  std::vector<double> w(static_cast<std::size_t>(count));
  double total = std::exp(-top);
  for (Eigen::Index k = 0; k < count; ++k) {
    w[static_cast<std::size_t>(k)] = std::exp(z(offset + k) - top);
    total += w[static_cast<std::size_t>(k)];
  }
  for (double& x : w) x /= total;
  return w;
}

GarchParams unpack(const Eigen::VectorXd& theta, const GarchSpec& spec) {
  GarchParams p;
  p.alpha0 = std::exp(theta(0));
  const auto w = shares(theta, 1, spec.q + spec.p);
  p.alphas.assign(w.begin(), w.begin() + spec.q);
  p.betas.assign(w.begin() + spec.q, w.end());
  return p;
}

Eigen::VectorXd pack(const GarchParams& p) {
  const auto k = static_cast<Eigen::Index>(p.alphas.size() + p.betas.size());
  Eigen::VectorXd theta(k + 1);
  theta(0) = std::log(p.alpha0);
  const double slack = 1.0 - p.persistence();
  Eigen::Index i = 1;
  for (double a : p.alphas) theta(i++) = std::log(a / slack);
  for (double b : p.betas) theta(i++) = std::log(b / slack);
  return theta;
}

// Negative mean log-likelihood in the unconstrained parameters, with the
// analytic gradient from the dh/dphi recursion.
class GarchObjective {
 public:
  GarchObjective(const Demeaned& data, const GarchSpec& spec) : data_(data), spec_(spec) {}

  double operator()(const Eigen::VectorXd& theta, Eigen::VectorXd* grad) const {
    const GarchParams p = unpack(theta, spec_);
    const auto q = static_cast<std::size_t>(spec_.q);
    const auto pp = static_cast<std::size_t>(spec_.p);
    const std::size_t k = 1 + q + pp;
    const std::size_t n = data_.eps.size();
    const double s2 = data_.var;
    std::vector<double> h(n);
    // dh[t * k + m] = d h_t / d phi_m, phi = (alpha0, alphas, betas).
    std::vector<double> dh(grad != nullptr ? n * k : 0, 0.0);
    std::vector<double> dphi(k, 0.0);
    double ll = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      if (t == 0) {
        h[0] = s2;
      } else {
        double ht = p.alpha0;
        for (std::size_t i = 1; i <= q; ++i) ht += p.alphas[i - 1] * (t >= i ? data_.eps[t - i] * data_.eps[t - i] : s2);
        for (std::size_t j = 1; j <= pp; ++j) ht += p.betas[j - 1] * (t >= j ? h[t - j] : s2);
        h[t] = ht;
        if (grad != nullptr) {
          double* d = &dh[t * k];
          d[0] = 1.0;
          for (std::size_t i = 1; i <= q; ++i) d[i] = t >= i ? data_.eps[t - i] * data_.eps[t - i] : s2;
          for (std::size_t j = 1; j <= pp; ++j) d[q + j] = t >= j ? h[t - j] : s2;
          for (std::size_t j = 1; j <= pp; ++j) {
            if (t < j) continue;
            const double* prev = &dh[(t - j) * k];
            for (std::size_t m = 0; m < k; ++m) d[m] += p.betas[j - 1] * prev[m];
          }
        }
      }
      if (!(h[t] > 0.0)) return std::numeric_limits<double>::infinity();
      const double e2 = data_.eps[t] * data_.eps[t];
      ll += -0.5 * (kLog2Pi + std::log(h[t]) + e2 / h[t]);
      if (grad != nullptr && t > 0) {
        const double dl = -0.5 * (1.0 / h[t] - e2 / (h[t] * h[t]));
        for (std::size_t m = 0; m < k; ++m) dphi[m] += dl * dh[t * k + m];
      }
    }
    const double scale = 1.0 / static_cast<double>(n);
    if (grad != nullptr) {
      grad->resize(static_cast<Eigen::Index>(k));
      (*grad)(0) = -scale * dphi[0] * p.alpha0;
      std::vector<double> w(p.alphas);
      w.insert(w.end(), p.betas.begin(), p.betas.end());
      double weighted = 0.0;
      for (std::size_t m = 0; m + 1 < k; ++m) weighted += dphi[m + 1] * w[m];
      for (std::size_t m = 0; m + 1 < k; ++m) {
        (*grad)(static_cast<Eigen::Index>(m + 1)) = -scale * w[m] * (dphi[m + 1] - weighted);
      }
    }
    return -scale * ll;
  }

 private:
  const Demeaned& data_;
  GarchSpec spec_;
};

GarchParams starting_point(const GarchSpec& spec, double var, double alpha_total, double beta_total) {
  GarchParams p;
  p.alpha0 = var * (1.0 - alpha_total - beta_total);
  p.alphas.assign(static_cast<std::size_t>(spec.q), alpha_total / spec.q);
  p.betas.assign(static_cast<std::size_t>(spec.p), beta_total / spec.p);
  return p;
}

}  // namespace

void GarchSpec::validate() const { require(p >= 1 && q >= 1, "GARCH orders p and q must be at least 1"); }

double GarchParams::persistence() const {
  return std::accumulate(alphas.begin(), alphas.end(), 0.0) + std::accumulate(betas.begin(), betas.end(), 0.0);
}

double GarchParams::unconditional_variance() const { return alpha0 / (1.0 - persistence()); }

void GarchParams::validate() const {
  require(alpha0 > 0.0, "GARCH alpha0 must be positive");
  require(std::all_of(alphas.begin(), alphas.end(), [](double a) { return a >= 0.0; }), "GARCH alphas must be non-negative");
  require(std::all_of(betas.begin(), betas.end(), [](double b) { return b >= 0.0; }), "GARCH betas must be non-negative");
  require(persistence() < 1.0, "GARCH parameters are not stationary (sum of alphas and betas >= 1)");
}

GarchPath garch_filter(std::span<const double> series, const GarchParams& params) {
  params.validate();
  require(series.size() >= 2, "GARCH filter needs at least two observations");
  const Demeaned data = demean(series);
  require(data.var > 0.0, "GARCH input has zero variance");
  GarchPath out;
  out.h.resize(series.size());
  const std::size_t n = series.size();
  double ll = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    if (t == 0) {
      out.h[0] = data.var;
    } else {
      double ht = params.alpha0;
      for (std::size_t i = 1; i <= params.alphas.size(); ++i) {
        ht += params.alphas[i - 1] * (t >= i ? data.eps[t - i] * data.eps[t - i] : data.var);
      }
      for (std::size_t j = 1; j <= params.betas.size(); ++j) ht += params.betas[j - 1] * (t >= j ? out.h[t - j] : data.var);
      out.h[t] = ht;
    }
    ll += -0.5 * (kLog2Pi + std::log(out.h[t]) + data.eps[t] * data.eps[t] / out.h[t]);
  }
  out.loglik = ll;
  return out;
}

GarchFit garch_fit(std::span<const double> series, const GarchSpec& spec) {
  spec.validate();
  require(series.size() >= kMinGarchObservations, "GARCH fit needs at least 200 observations");
  for (double x : series) require(std::isfinite(x), "GARCH input contains a non-finite value");
  const Demeaned data = demean(series);
  require(data.var > 0.0, "GARCH input has zero variance");
  const GarchObjective objective(data, spec);
  const Objective f = [&](const Eigen::VectorXd& x, Eigen::VectorXd* g) { return objective(x, g); };
  const double n = static_cast<double>(series.size());

  MinimizeOptions options;
  options.max_iterations = 1000;
  options.gradient_tolerance = 1e-7;
  MinimizeResult best;
  bool have = false;
  double first_start = 0.0;
  const double starts[][2] = {{0.05, 0.90}, {0.15, 0.60}};
  for (const auto& s : starts) {
    const MinimizeResult r = minimize_bfgs(f, pack(starting_point(spec, data.var, s[0], s[1])), options);
    if (!have) first_start = r.initial_value;
    if (!have || r.value < best.value || (r.value == best.value && r.converged && !best.converged)) {
      best = r;
      have = true;
    }
  }

  const GarchParams p = unpack(best.x, spec);
  GarchFit fit;
  fit.spec = spec;
  fit.mu = data.mu;
  fit.alpha0 = p.alpha0;
  fit.alphas = p.alphas;
  fit.betas = p.betas;
  const GarchPath path = garch_filter(series, p);
  fit.h = path.h;
  fit.loglik = path.loglik;
  fit.initial_loglik = -first_start * n;
  fit.iterations = best.iterations;
  fit.converged = best.converged;
  return fit;
}

Objective garch_objective(std::span<const double> series, const GarchSpec& spec) {
  spec.validate();
  require(series.size() >= 2, "GARCH objective needs at least two observations");
  auto data = std::make_shared<const Demeaned>(demean(series));
  require(data->var > 0.0, "GARCH input has zero variance");
  return [data, spec](const Eigen::VectorXd& x, Eigen::VectorXd* g) { return GarchObjective(*data, spec)(x, g); };
}

Eigen::VectorXd garch_to_unconstrained(const GarchParams& params) {
  params.validate();
  require(std::all_of(params.alphas.begin(), params.alphas.end(), [](double a) { return a > 0.0; }) &&
              std::all_of(params.betas.begin(), params.betas.end(), [](double b) { return b > 0.0; }),
          "GARCH parameters on the boundary have no unconstrained representation");
  return pack(params);
}

GarchParams garch_from_unconstrained(const Eigen::VectorXd& theta, const GarchSpec& spec) {
  spec.validate();
  require(theta.size() == 1 + spec.p + spec.q, "GARCH parameter vector has the wrong length");
  return unpack(theta, spec);
}

std::vector<double> degarch(std::span<const double> series, const GarchFit& fit) {
  require(series.size() == fit.h.size(), "degarch: series and variance path lengths differ");
  std::vector<double> out(series.size());
  for (std::size_t t = 0; t < series.size(); ++t) {
    require(fit.h[t] > 0.0, "degarch: non-positive conditional variance");
    out[t] = series[t] / std::sqrt(fit.h[t]);
  }
  return out;
}

std::vector<double> garch_simulate(const GarchParams& params, std::size_t n, std::uint64_t seed) {
  params.validate();
  constexpr std::size_t burn_in = 1000;
  Rng rng(seed);
  std::normal_distribution<double> normal;
  const std::size_t q = params.alphas.size();
  const std::size_t p = params.betas.size();
  const double uncond = params.unconditional_variance();
  std::vector<double> eps2(q, uncond);  // most recent first
  std::vector<double> hist(p, uncond);
  std::vector<double> out;
  out.reserve(n);
  for (std::size_t t = 0; t < burn_in + n; ++t) {
    double h = params.alpha0;
    for (std::size_t i = 0; i < q; ++i) h += params.alphas[i] * eps2[i];
    for (std::size_t j = 0; j < p; ++j) h += params.betas[j] * hist[j];
    const double e = std::sqrt(h) * normal(rng);
    if (q > 0) {
      std::rotate(eps2.rbegin(), eps2.rbegin() + 1, eps2.rend());
      eps2[0] = e * e;
    }
    if (p > 0) {
      std::rotate(hist.rbegin(), hist.rbegin() + 1, hist.rend());
      hist[0] = h;
    }
    if (t >= burn_in) out.push_back(e);
  }
  return out;
}

Eigen::MatrixXd bekk_step(const Eigen::MatrixXd& h_prev, const Eigen::VectorXd& r_prev, const Eigen::MatrixXd& c,
                          const std::vector<Eigen::MatrixXd>& a, const std::vector<Eigen::MatrixXd>& b) {
  const Eigen::Index n = r_prev.size();
  require(h_prev.rows() == n && h_prev.cols() == n, "bekk_step: H dimension mismatch");
  require(c.rows() == n && c.cols() == n, "bekk_step: C dimension mismatch");
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < i; ++j) require(c(i, j) == 0.0, "bekk_step: C must be upper triangular");
  }
  Eigen::MatrixXd h = c.transpose() * c;
  const Eigen::MatrixXd rr = r_prev * r_prev.transpose();
  for (const auto& ak : a) {
    require(ak.rows() == n && ak.cols() == n, "bekk_step: A dimension mismatch");
    h += ak.transpose() * rr * ak;
  }
  for (const auto& bk : b) {
    require(bk.rows() == n && bk.cols() == n, "bekk_step: B dimension mismatch");
    h += bk.transpose() * h_prev * bk;
  }
  return (h + h.transpose()) / 2.0;
}

double dcc_loglik(const Eigen::MatrixXd& z, const Eigen::MatrixXd& qbar, double a, double b,
                  std::vector<Eigen::MatrixXd>* path) {
  const Eigen::Index t_len = z.cols();
  if (a < 0.0 || b < 0.0 || a + b >= 1.0) return -std::numeric_limits<double>::infinity();
  if (path != nullptr) path->assign(static_cast<std::size_t>(t_len), Eigen::MatrixXd());
  Eigen::MatrixXd q = qbar;
  double ll = 0.0;
  for (Eigen::Index t = 0; t < t_len; ++t) {
    if (t > 0) {
      const Eigen::VectorXd zp = z.col(t - 1);
      q = (1.0 - a - b) * qbar + a * zp * zp.transpose() + b * q;
    }
    const Eigen::VectorXd inv_sd = q.diagonal().cwiseSqrt().cwiseInverse();
    Eigen::MatrixXd r = inv_sd.asDiagonal() * q * inv_sd.asDiagonal();
    r = 0.5 * (r + r.transpose()).eval();
    r.diagonal().setOnes();
    Eigen::LLT<Eigen::MatrixXd> llt(r);
    if (llt.info() != Eigen::Success) return -std::numeric_limits<double>::infinity();
    const Eigen::VectorXd zt = z.col(t);
    const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    ll += -0.5 * (logdet + zt.dot(llt.solve(zt)) - zt.squaredNorm());
    if (path != nullptr) (*path)[static_cast<std::size_t>(t)] = std::move(r);
  }
  return ll;
}

DccFit dcc_fit(const ReturnsPanel& panel, unsigned threads) {
  const Eigen::Index n = panel.n_assets();
  const Eigen::Index t_len = panel.n_obs();
  require(n >= 2, "DCC needs at least two assets");
  require(n <= kDccMaxAssets, "DCC is limited to 100 assets");
  DccFit fit;
  fit.univariate.resize(static_cast<std::size_t>(n));
  parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t i) {
    const Eigen::VectorXd row = panel.returns.row(static_cast<Eigen::Index>(i));
    fit.univariate[i] = garch_fit(std::span<const double>(row.data(), static_cast<std::size_t>(row.size())));
  });
  Eigen::MatrixXd z(n, t_len);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& g = fit.univariate[static_cast<std::size_t>(i)];
    for (Eigen::Index t = 0; t < t_len; ++t) {
      z(i, t) = (panel.returns(i, t) - g.mu) / std::sqrt(g.h[static_cast<std::size_t>(t)]);
    }
  }
  const Eigen::VectorXd zmean = z.rowwise().mean();
  const Eigen::MatrixXd zc = z.colwise() - zmean;
  const Eigen::MatrixXd cov = zc * zc.transpose() / static_cast<double>(t_len);
  const Eigen::VectorXd inv_sd = cov.diagonal().cwiseSqrt().cwiseInverse();
  fit.qbar = inv_sd.asDiagonal() * cov * inv_sd.asDiagonal();
  fit.qbar = 0.5 * (fit.qbar + fit.qbar.transpose()).eval();
  fit.qbar.diagonal().setOnes();

  // (a, b, slack) = softmax(x0, x1, 0).
  const auto to_ab = [](const Eigen::VectorXd& x) {
    const double top = std::max({x(0), x(1), 0.0});
    const double e0 = std::exp(x(0) - top);
    const double e1 = std::exp(x(1) - top);
    const double total = e0 + e1 + std::exp(-top);
    return std::pair{e0 / total, e1 / total};
  };
  const double scale = 1.0 / static_cast<double>(t_len * n);
  const Objective value_only = [&](const Eigen::VectorXd& x, Eigen::VectorXd*) {
    const auto [a, b] = to_ab(x);
    return -scale * dcc_loglik(z, fit.qbar, a, b);
  };
  const Objective f = [&](const Eigen::VectorXd& x, Eigen::VectorXd* g) {
    const double v = value_only(x, nullptr);
    if (g != nullptr) *g = numeric_gradient(value_only, x, 1e-6);
    return v;
  };
  Eigen::VectorXd x0(2);
  x0 << std::log(0.05 / 0.05), std::log(0.90 / 0.05);
  MinimizeOptions options;
  options.max_iterations = 300;
  options.gradient_tolerance = 1e-7;
  const MinimizeResult r = minimize_bfgs(f, x0, options);
  const auto [a, b] = to_ab(r.x);
  fit.a = a;
  fit.b = b;
  fit.loglik = dcc_loglik(z, fit.qbar, a, b, &fit.r_path);
  fit.initial_loglik = -r.initial_value / scale;
  fit.converged = r.converged && a + b < 1.0 - 1e-6;
  return fit;
}

std::vector<Eigen::MatrixXd> trailing_average(const std::vector<Eigen::MatrixXd>& path, std::size_t window) {
  require(window >= 1, "averaging window must be at least 1");
  std::vector<Eigen::MatrixXd> out;
  out.reserve(path.size());
  for (std::size_t t = 0; t < path.size(); ++t) {
    const std::size_t first = t + 1 >= window ? t + 1 - window : 0;
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(path[t].rows(), path[t].cols());
    for (std::size_t s = first; s <= t; ++s) acc += path[s];
    acc /= static_cast<double>(t - first + 1);
    acc.diagonal().setOnes();
    out.push_back(std::move(acc));
  }
  return out;
}

}  // namespace finnet
