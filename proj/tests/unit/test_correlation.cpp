#include "finnet/correlation.hpp"
#include "finnet/error.hpp"
#include "finnet/random.hpp"
#include "finnet/synth.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

using namespace finnet;

namespace {

ReturnsPanel two_rows(const std::vector<double>& a, const std::vector<double>& b) {
  Eigen::MatrixXd m(2, static_cast<Eigen::Index>(a.size()));
  for (std::size_t t = 0; t < a.size(); ++t) {
    m(0, static_cast<Eigen::Index>(t)) = a[t];
    m(1, static_cast<Eigen::Index>(t)) = b[t];
  }
  return make_returns_panel(m);
}

void check_correlation_invariants(const DependencyMatrix& c) {
  CHECK(c.values == c.values.transpose());
  CHECK(c.values.diagonal() == Eigen::VectorXd::Ones(c.size()));
  CHECK(c.values.maxCoeff() <= 1.0);
  CHECK(c.values.minCoeff() >= -1.0);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c.values);
  CHECK(es.eigenvalues().minCoeff() >= -1e-8);
}

}  // namespace

TEST_SUITE("correlation") {
  TEST_CASE("pearson diagonal and antisymmetry") {
    const ReturnsPanel g = gaussian_panel(Eigen::MatrixXd::Identity(1, 1), 100, 1);
    std::vector<double> x(g.returns.data(), g.returns.data() + 100);
    std::vector<double> neg(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) neg[i] = -x[i];
    const DependencyMatrix c = pearson(two_rows(x, neg));
    CHECK(c.values(0, 0) == 1.0);
    CHECK(c.values(0, 1) == doctest::Approx(-1.0));
    check_correlation_invariants(c);
  }

  TEST_CASE("pearson rejects a zero-variance asset by name") {
    const ReturnsPanel p = two_rows({1.0, 2.0, 3.0}, {1.0, 1.0, 1.0});
    try {
      [[maybe_unused]] const auto c = pearson(p);
      FAIL("expected rejection");
    } catch (const ValidationError& e) {
      CHECK(std::string(e.what()).find("A1") != std::string::npos);
    }
  }

  TEST_CASE("independent long series fall inside 1.96/sqrt(T) about 95% of the time") {
    int inside = 0;
    constexpr int pairs = 400;
    for (int k = 0; k < pairs; ++k) {
      const DependencyMatrix c = pearson(gaussian_panel(Eigen::MatrixXd::Identity(2, 2), 3775, split_seed(2, k)));
      inside += std::abs(c.values(0, 1)) < 1.96 / std::sqrt(3775.0) ? 1 : 0;
    }
    CHECK(inside / static_cast<double>(pairs) > 0.92);
    CHECK(inside / static_cast<double>(pairs) < 0.98);
  }

  TEST_CASE("random panels satisfy the correlation invariants") {
    for (std::uint64_t s = 0; s < 5; ++s) {
      check_correlation_invariants(pearson(gaussian_panel(equicorrelation(8, 0.4), 50, s)));
      check_correlation_invariants(spearman(gaussian_panel(equicorrelation(8, 0.4), 50, s)));
    }
  }

  TEST_CASE("covariance hand case and rescaling identity") {
    const DependencyMatrix cov = covariance(two_rows({0.0, 2.0}, {0.0, 4.0}));
    CHECK(cov.values(0, 1) == doctest::Approx(4.0));
    const ReturnsPanel p = gaussian_panel(equicorrelation(4, 0.3), 200, 7);
    const DependencyMatrix c = covariance(p);
    const DependencyMatrix r = pearson(p);
    const Eigen::VectorXd sd = c.values.diagonal().cwiseSqrt();
    const Eigen::MatrixXd rescaled = c.values.array() / (sd * sd.transpose()).array();
    CHECK((rescaled - r.values).cwiseAbs().maxCoeff() < 1e-12);
    ReturnsPanel scaled = p;
    scaled.returns.row(1) *= 3.0;
    const DependencyMatrix cs = covariance(scaled);
    CHECK(cs.values(1, 2) == doctest::Approx(3.0 * c.values(1, 2)).epsilon(1e-12));
    CHECK(cs.values(1, 1) == doctest::Approx(9.0 * c.values(1, 1)).epsilon(1e-12));
  }

  TEST_CASE("covariance of standardized rows equals correlation") {
    ReturnsPanel p = gaussian_panel(equicorrelation(3, 0.5), 100, 8);
    for (Eigen::Index i = 0; i < 3; ++i) {
      const Eigen::RowVectorXd row = p.returns.row(i);
      const auto z = standardize(std::vector<double>(row.data(), row.data() + row.size()));
      p.returns.row(i) = Eigen::Map<const Eigen::RowVectorXd>(z.data(), 100);
    }
    CHECK((covariance(p).values - pearson(p).values).cwiseAbs().maxCoeff() < 1e-12);
  }

  TEST_CASE("rolling windows") {
    const ReturnsPanel p = gaussian_panel(equicorrelation(4, 0.5), 400, 9);
    const auto full = rolling_corr(p, 400, 1);
    REQUIRE(full.size() == 1);
    CHECK((full[0].values - pearson(p).values).cwiseAbs().maxCoeff() < 1e-12);
    const auto ws = rolling_corr(p, 100, 50);
    CHECK(ws.size() == 7);
    CHECK(ws[1].window->start == p.timestamps[50]);
    CHECK(ws[1].window->end == p.timestamps[149]);
    double mean_dev = 0.0;
    for (const auto& w : ws) {
      check_correlation_invariants(w);
      mean_dev += (w.values - pearson(p).values).cwiseAbs().maxCoeff() / static_cast<double>(ws.size());
    }
    CHECK(mean_dev < 0.3);
    CHECK_THROWS_AS(rolling_corr(p, 401, 1), ValidationError);
    const ReturnsPanel same = two_rows({1, 3, 2, 5, 4, 6}, {2, 6, 4, 10, 8, 12});
    for (const auto& w : rolling_corr(same, 3, 1)) CHECK(w.values(0, 1) == doctest::Approx(1.0));
  }

  TEST_CASE("exponential weights") {
    for (auto [dt, theta] : {std::pair{60, 20.0}, std::pair{20, 5.0}, std::pair{250, 1000.0}}) {
      const Eigen::VectorXd w = WeightScheme{dt, theta}.weights();
      CHECK(w.sum() == doctest::Approx(1.0).epsilon(1e-14));
      CHECK(w.minCoeff() > 0.0);
    }
    const double w0 = (1.0 - std::exp(-1.0 / 20.0)) / (1.0 - std::exp(-60.0 / 20.0));
    CHECK(std::abs(WeightScheme::w0(60, 20.0) - w0) < 1e-12);
    CHECK(std::abs(WeightScheme{60, 20.0}.weights()(59) - w0) < 1e-12);
    CHECK_THROWS_AS(WeightScheme({60, 0.0}).validate(), ValidationError);
  }

  TEST_CASE("weighted correlation limits") {
    const ReturnsPanel p = gaussian_panel(equicorrelation(5, 0.4), 60, 10);
    const DependencyMatrix flat = weighted_corr(p, WeightScheme{60, std::nullopt});
    CHECK((flat.values - pearson(p).values).cwiseAbs().maxCoeff() < 1e-10);
    const DependencyMatrix slow = weighted_corr(p, WeightScheme{60, 1e6});
    const DependencyMatrix slower = weighted_corr(p, WeightScheme{60, 1e7});
    const double dev6 = (slow.values - pearson(p).values).cwiseAbs().maxCoeff();
    const double dev7 = (slower.values - pearson(p).values).cwiseAbs().maxCoeff();
    CHECK(dev6 < 1e-5);
    CHECK(dev6 / dev7 == doctest::Approx(10.0).epsilon(1e-3));
    check_correlation_invariants(weighted_corr(p, WeightScheme{60, 10.0}));
  }

  TEST_CASE("large theta deviation follows the first-order weight perturbation") {
    const ReturnsPanel p = gaussian_panel(equicorrelation(4, 0.4), 60, 17);
    const DependencyMatrix flat = pearson(p);
    const Eigen::VectorXd dw = WeightScheme{60, 1e6}.weights().array() - 1.0 / 60.0;
    const DependencyMatrix slow = weighted_corr(p, WeightScheme{60, 1e6});
    for (Eigen::Index i = 0; i < 4; ++i) {
      for (Eigen::Index j = i + 1; j < 4; ++j) {
        const Eigen::RowVectorXd xi = p.returns.row(i).array() - p.returns.row(i).mean();
        const Eigen::RowVectorXd xj = p.returns.row(j).array() - p.returns.row(j).mean();
        const Eigen::RowVectorXd zi = xi / std::sqrt(xi.squaredNorm() / 60.0);
        const Eigen::RowVectorXd zj = xj / std::sqrt(xj.squaredNorm() / 60.0);
        const double r = flat.values(i, j);
        const Eigen::RowVectorXd g = zi.cwiseProduct(zj) - 0.5 * r * (zi.cwiseAbs2() + zj.cwiseAbs2());
        const double predicted = g.dot(dw.transpose());
        CHECK(slow.values(i, j) - r == doctest::Approx(predicted).epsilon(1e-3));
      }
    }
  }

  TEST_CASE("partial correlation") {
    CHECK(partial_correlation(0.5, 0.5, 0.5) == doctest::Approx(1.0 / 3.0));
    CHECK(partial_correlation(0.37, 0.0, 0.0) == 0.37);
    CHECK_THROWS_AS(partial_correlation(0.5, 1.0, 0.2), ValidationError);
    Eigen::VectorXd betas(4);
    betas << 1.0, 1.2, 0.8, 1.1;
    const ReturnsPanel p = single_index_panel(betas, 20000, 11, 0.02, 0.01, true);
    const DependencyMatrix raw = pearson(p);
    const DependencyMatrix part = partial_corr(p, "MKT");
    CHECK(part.size() == 4);
    CHECK(raw.values(0, 1) > 0.5);
    CHECK(part.values.cwiseAbs().triangularView<Eigen::StrictlyUpper>().toDenseMatrix().maxCoeff() < 0.05);
  }

  TEST_CASE("partial correlation against an uncorrelated mediator is the raw correlation") {
    const ReturnsPanel p = gaussian_panel(equicorrelation(3, 0.4), 500, 12);
    // A mediator orthogonal to every asset in-sample.
    Eigen::VectorXd m = Eigen::VectorXd::LinSpaced(500, -1.0, 1.0).array().sin();
    Eigen::MatrixXd x = p.returns.transpose();
    x.rowwise() -= x.colwise().mean();
    m.array() -= m.mean();
    m -= x * (x.transpose() * x).ldlt().solve(x.transpose() * m);
    const DependencyMatrix part = partial_corr(p, std::vector<double>(m.data(), m.data() + m.size()));
    CHECK((part.values - pearson(p).values).cwiseAbs().maxCoeff() < 1e-10);
  }

  TEST_CASE("spearman") {
    const ReturnsPanel g = gaussian_panel(Eigen::MatrixXd::Identity(1, 1), 200, 13);
    std::vector<double> x(g.returns.data(), g.returns.data() + 200);
    std::vector<double> ex(x.size());
    std::vector<double> neg(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      ex[i] = std::exp(x[i]);
      neg[i] = -x[i];
    }
    CHECK(spearman(two_rows(x, ex)).values(0, 1) == doctest::Approx(1.0));
    CHECK(spearman(two_rows(x, neg)).values(0, 1) == doctest::Approx(-1.0));
    const double expected = 6.0 / std::numbers::pi * std::asin(0.25);
    const DependencyMatrix s = spearman(gaussian_panel(equicorrelation(2, 0.5), 100000, 14));
    CHECK(std::abs(s.values(0, 1) - expected) < 0.01);
    const auto r = mid_ranks(std::vector<double>{3.0, 1.0, 3.0, 2.0});
    CHECK(r == std::vector<double>{3.5, 1.0, 3.5, 2.0});
  }

  TEST_CASE("parametric band against the integrated t quantile") {
    const SignificanceBand b = parametric_band(3775, 0.05);
    const double t = oracle::t_quantile(0.975, 3773.0);
    const double r = t / std::sqrt(t * t + 3773.0);
    CHECK(std::abs(b.upper - r) < 1e-6);
    CHECK(b.lower == -b.upper);
    CHECK(b.upper == doctest::Approx(0.0319).epsilon(0.005));
    const SignificanceBand small = parametric_band(20, 0.05);
    const double ts = oracle::t_quantile(0.975, 18.0);
    CHECK(std::abs(small.upper - ts / std::sqrt(ts * ts + 18.0)) < 1e-6);
  }

  TEST_CASE("permutation band") {
    const ReturnsPanel source = gaussian_panel(Eigen::MatrixXd::Identity(5, 5), 4000, 15);
    PermutationOptions o;
    o.n_draws = 20000;
    o.seed = 3;
    const SignificanceBand perm = permutation_band(250, 0.05, source, o);
    const SignificanceBand par = parametric_band(250, 0.05);
    CHECK(perm.lower < 0.0);
    CHECK(perm.upper > 0.0);
    CHECK(std::abs(perm.upper - par.upper) / par.upper < 0.05);
    CHECK(std::abs(perm.lower - par.lower) / par.upper < 0.05);
    o.n_draws = 40000;
    const SignificanceBand twice = permutation_band(250, 0.05, source, o);
    CHECK(std::abs(twice.upper - perm.upper) / perm.upper < 0.02);
    o.threads = 3;
    const SignificanceBand threaded = permutation_band(250, 0.05, source, o);
    CHECK(threaded.upper == twice.upper);
    CHECK(threaded.lower == twice.lower);
    CHECK_THROWS_AS(significance_band(250, 0.05, BandMethod::permutation), ValidationError);
    o.n_draws = 100;
    CHECK_THROWS_AS(permutation_band(250, 0.05, source, o), ValidationError);
  }

  TEST_CASE("distance transform") {
    DependencyMatrix c;
    c.assets = {"a", "b", "c"};
    c.values.resize(3, 3);
    c.values << 1.0, 0.0, -1.0, 0.0, 1.0, 0.5, -1.0, 0.5, 1.0;
    const DependencyMatrix d = to_distance(c);
    CHECK(d.kind == MatrixKind::distance);
    CHECK(d.values(0, 0) == 0.0);
    CHECK(d.values(0, 1) == doctest::Approx(std::sqrt(2.0)));
    CHECK(d.values(0, 2) == doctest::Approx(2.0));
    CHECK(d.values(1, 2) < d.values(0, 1));
    CHECK_THROWS_AS(to_distance(d), ValidationError);
  }

  TEST_CASE("distance reverses the correlation order") {
    const DependencyMatrix c = pearson(gaussian_panel(equicorrelation(10, 0.3), 100, 16));
    const DependencyMatrix d = to_distance(c);
    std::vector<std::pair<double, double>> pairs;
    for (Eigen::Index i = 0; i < 10; ++i) {
      for (Eigen::Index j = i + 1; j < 10; ++j) pairs.emplace_back(c.values(i, j), d.values(i, j));
    }
    std::sort(pairs.begin(), pairs.end());
    for (std::size_t k = 1; k < pairs.size(); ++k) CHECK(pairs[k].second < pairs[k - 1].second);
  }
}
