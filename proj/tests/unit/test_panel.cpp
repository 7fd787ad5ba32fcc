#include "finnet/error.hpp"
#include "finnet/panel.hpp"
#include "finnet/random.hpp"
#include "finnet/synth.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace finnet;

namespace {

PricePanel one_asset(std::vector<double> prices) {
  PricePanel p;
  p.assets = {"X"};
  p.prices = Eigen::Map<Eigen::RowVectorXd>(prices.data(), static_cast<Eigen::Index>(prices.size()));
  p.timestamps = business_dates(prices.size());
  return p;
}

std::vector<double> white_noise(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> normal;
  std::vector<double> x(n);
  for (auto& v : x) v = normal(rng);
  return x;
}

}  // namespace

TEST_SUITE("panel") {
  TEST_CASE("log returns of exact exponentials") {
    const ReturnsPanel r = log_returns(one_asset({1.0, std::numbers::e, std::exp(2.0)}));
    REQUIRE(r.n_obs() == 2);
    CHECK(r.returns(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(r.returns(0, 1) == doctest::Approx(1.0).epsilon(1e-15));
  }

  TEST_CASE("log returns hand values and constant series") {
    const ReturnsPanel r = log_returns(one_asset({100.0, 105.0, 99.0}));
    CHECK(r.returns(0, 0) == doctest::Approx(std::log(1.05)).epsilon(1e-15));
    CHECK(r.returns(0, 1) == doctest::Approx(std::log(99.0 / 105.0)).epsilon(1e-15));
    const ReturnsPanel flat = log_returns(one_asset({7.0, 7.0, 7.0, 7.0}));
    CHECK(flat.returns.cwiseAbs().maxCoeff() == 0.0);
    CHECK(flat.timestamps.front() == business_dates(4)[1]);
  }

  TEST_CASE("non-positive price is rejected naming asset and date") {
    PricePanel p = one_asset({1.0, -2.0, 3.0});
    try {
      log_returns(p);
      FAIL("expected rejection");
    } catch (const ValidationError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("X") != std::string::npos);
      CHECK(msg.find(p.timestamps[1]) != std::string::npos);
    }
  }

  TEST_CASE("non-increasing timestamps are rejected") {
    PricePanel p = one_asset({1.0, 2.0, 3.0});
    p.timestamps[2] = p.timestamps[1];
    CHECK_THROWS_AS(p.validate(), ValidationError);
  }

  TEST_CASE("summation property of log returns") {
    const PricePanel prices = prices_from_returns(gaussian_panel(Eigen::MatrixXd::Identity(3, 3), 60, 5));
    const ReturnsPanel daily = log_returns(prices);
    constexpr Eigen::Index k = 5;
    PricePanel coarse;
    coarse.assets = prices.assets;
    coarse.prices.resize(3, 13);
    for (Eigen::Index c = 0; c < 13; ++c) {
      coarse.prices.col(c) = prices.prices.col(c * k);
      coarse.timestamps.push_back(prices.timestamps[static_cast<std::size_t>(c * k)]);
    }
    const ReturnsPanel agg = log_returns(coarse);
    for (Eigen::Index c = 0; c < 12; ++c) {
      const Eigen::VectorXd sum = daily.returns.middleCols(c * k, k).rowwise().sum();
      CHECK((agg.returns.col(c) - sum).cwiseAbs().maxCoeff() < 1e-12);
    }
  }

  TEST_CASE("normalized prices") {
    CHECK(normalized_prices(one_asset({50.0, 100.0})).isApprox(Eigen::RowVector2d(1.0, 2.0)));
    const Eigen::MatrixXd m = normalized_prices(one_asset({200.0, 100.0, 300.0}));
    CHECK(m(0, 0) == 1.0);
    CHECK(m(0, 1) == 0.5);
    CHECK(m(0, 2) == 1.5);
  }

  TEST_CASE("sample variance") {
    const std::vector<double> flat{1.0, 1.0, 1.0};
    const std::vector<double> two{0.0, 2.0};
    const std::vector<double> one{3.0};
    CHECK(sample_variance(flat) == 0.0);
    CHECK(sample_variance(two) == doctest::Approx(2.0));
    CHECK_THROWS_AS(sample_variance(one), ValidationError);
    const auto z = standardize(white_noise(100, 1));
    CHECK(std::abs(sample_variance(z) - 1.0) < 1e-12);
  }

  TEST_CASE("standardize under both conventions") {
    const std::vector<double> unit{-1.0, 1.0};
    const auto pop = standardize(unit, VarianceConvention::population);
    CHECK(pop[0] == doctest::Approx(-1.0));
    CHECK(pop[1] == doctest::Approx(1.0));
    // Sample convention: variance of [-1, 1] is 2, so the result is +-1/sqrt(2).
    const auto smp = standardize(unit);
    CHECK(smp[0] == doctest::Approx(-std::sqrt(0.5)));
    const std::vector<double> shifted{0.0, 2.0};
    const auto s2 = standardize(shifted);
    CHECK(s2[0] == doctest::Approx(-std::sqrt(0.5)));
    CHECK(s2[1] == doctest::Approx(std::sqrt(0.5)));
    const std::vector<double> flat{2.0, 2.0};
    CHECK_THROWS_AS(standardize(flat), ValidationError);
  }

  TEST_CASE("standardize is affine invariant and idempotent") {
    const auto x = white_noise(200, 3);
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = 3.5 * x[i] - 2.0;
    const auto zx = standardize(x);
    const auto zy = standardize(y);
    const auto zz = standardize(zx);
    for (std::size_t i = 0; i < x.size(); ++i) {
      CHECK(std::abs(zx[i] - zy[i]) < 1e-12);
      CHECK(std::abs(zz[i] - zx[i]) < 1e-12);
    }
  }

  TEST_CASE("acf basics and errors") {
    const auto x = white_noise(5000, 4);
    const auto a = acf(x, 10);
    CHECK(a[0] == 1.0);
    for (std::size_t k = 1; k <= 10; ++k) CHECK(std::abs(a[k]) < 3.0 / std::sqrt(5000.0));
    CHECK_THROWS_AS(acf(std::vector<double>{1.0, 2.0}, 2), ValidationError);
  }

  TEST_CASE("acf of white noise exceeds the 1.96 band rarely") {
    const std::size_t t = 4000;
    const auto a = acf(white_noise(t, 11), 50);
    int outside = 0;
    for (std::size_t k = 1; k <= 50; ++k) outside += std::abs(a[k]) > 1.96 / std::sqrt(static_cast<double>(t)) ? 1 : 0;
    CHECK(outside <= 5);
  }

  TEST_CASE("acf of AR(1) matches phi^k") {
    const std::size_t t = 100000;
    const auto e = white_noise(t, 12);
    std::vector<double> x(t);
    x[0] = e[0];
    for (std::size_t s = 1; s < t; ++s) x[s] = 0.5 * x[s - 1] + e[s];
    const auto a = acf(x, 5);
    for (int k = 1; k <= 5; ++k) CHECK(std::abs(a[static_cast<std::size_t>(k)] - std::pow(0.5, k)) < 0.02);
  }

  TEST_CASE("ccdf convention") {
    const auto c = ccdf(std::vector<double>{1.0, 2.0, 3.0});
    REQUIRE(c.size() == 3);
    CHECK(c[0].x == 1.0);
    CHECK(c[0].survival == doctest::Approx(2.0 / 3.0));
    CHECK(c[2].survival == 0.0);
    const auto same = ccdf(std::vector<double>{4.0, 4.0, 4.0});
    CHECK(same.size() == 1);
    CHECK_THROWS_AS(ccdf(std::vector<double>{}), ValidationError);
  }

  TEST_CASE("ccdf is a survival function") {
    const auto c = ccdf(white_noise(1000, 13));
    for (std::size_t k = 0; k < c.size(); ++k) {
      CHECK(c[k].survival >= 0.0);
      CHECK(c[k].survival <= 1.0);
      if (k > 0) {
        CHECK(c[k].x > c[k - 1].x);
        CHECK(c[k].survival <= c[k - 1].survival);
      }
    }
  }

  TEST_CASE("Hill estimator on Pareto samples") {
    CHECK(std::abs(tail_exponent(pareto_sample(3.0, 100000, 21)).exponent - 3.0) < 0.1);
    CHECK(std::abs(tail_exponent(pareto_sample(2.0, 100000, 22)).exponent - 2.0) < 0.1);
    CHECK_THROWS_AS(tail_exponent(pareto_sample(3.0, 500, 23)), ValidationError);
  }

  TEST_CASE("Hill error shrinks with sample size") {
    double small = 0.0;
    double large = 0.0;
    for (std::uint64_t s = 0; s < 10; ++s) {
      small += std::abs(tail_exponent(pareto_sample(3.0, 10000, split_seed(30, s))).exponent - 3.0);
      large += std::abs(tail_exponent(pareto_sample(3.0, 100000, split_seed(31, s))).exponent - 3.0);
    }
    CHECK(large < small);
  }

  TEST_CASE("returns window slices columns") {
    const ReturnsPanel r = gaussian_panel(Eigen::MatrixXd::Identity(2, 2), 20, 1);
    const ReturnsPanel w = r.window(5, 10);
    CHECK(w.n_obs() == 10);
    CHECK(w.returns == r.returns.middleCols(5, 10));
    CHECK(w.timestamps.front() == r.timestamps[5]);
    CHECK(r.index_of("A1") == 1);
    CHECK_THROWS_AS([&] { [[maybe_unused]] const auto i = r.index_of("nope"); }(), ValidationError);
  }
}
