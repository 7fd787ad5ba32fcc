#include "finnet/econnet.hpp"
#include "finnet/error.hpp"
#include "finnet/random.hpp"
#include "finnet/synth.hpp"
#include "finnet/volatility.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace finnet;

namespace {

Eigen::MatrixXd noise(Eigen::Index n, Eigen::Index t, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd m(n, t);
  for (Eigen::Index c = 0; c < t; ++c) {
    for (Eigen::Index r = 0; r < n; ++r) m(r, c) = normal(rng);
  }
  return m;
}

FilteredReturns filtered(Eigen::MatrixXd m) { return FilteredReturns::assume_filtered(make_returns_panel(std::move(m))); }

bool has_directed(const FilteredGraph& g, int a, int b) {
  for (const Edge& e : g.edges) {
    if (e.source == a && e.target == b) return true;
  }
  return false;
}

}  // namespace

TEST_SUITE("econnet") {
  TEST_CASE("factor fit recovers an exact market model") {
    const Eigen::MatrixXd m = noise(2, 300, 1);
    std::vector<double> market(300);
    std::vector<double> asset(300);
    for (Eigen::Index t = 0; t < 300; ++t) {
      market[static_cast<std::size_t>(t)] = m(0, t);
      asset[static_cast<std::size_t>(t)] = 0.001 + 1.2 * m(0, t);
    }
    const FactorFit exact = factor_fit(asset, {market});
    CHECK(exact.alpha == doctest::Approx(0.001).epsilon(1e-10));
    CHECK(exact.betas(0) == doctest::Approx(1.2).epsilon(1e-12));
    CHECK(exact.residual_variance < 1e-20);
    for (Eigen::Index t = 0; t < 300; ++t) asset[static_cast<std::size_t>(t)] += 0.1 * m(1, t);
    const FactorFit noisy = factor_fit(asset, {market});
    CHECK(std::abs(noisy.betas(0) - 1.2) < 0.03);
    CHECK(noisy.beta_p_values(0) < 1e-10);
    CHECK(noisy.alpha_p_value > 0.01);
    CHECK(noisy.residuals.size() == 300);
  }

  TEST_CASE("factor fit with a risk-free rate uses excess returns") {
    const Eigen::MatrixXd m = noise(2, 300, 2);
    std::vector<double> market(300);
    std::vector<double> size(300);
    std::vector<double> rf(300);
    std::vector<double> asset(300);
    for (std::size_t t = 0; t < 300; ++t) {
      const auto c = static_cast<Eigen::Index>(t);
      rf[t] = 0.0001 * (1.0 + 0.1 * std::sin(0.1 * static_cast<double>(t)));
      market[t] = m(0, c);
      size[t] = 0.5 * m(1, c);
      asset[t] = rf[t] + 0.9 * (market[t] - rf[t]) + 0.3 * size[t];
    }
    const FactorFit f = factor_fit(asset, {market, size}, std::span<const double>(rf));
    CHECK(std::abs(f.alpha) < 1e-12);
    CHECK(f.betas(0) == doctest::Approx(0.9).epsilon(1e-10));
    CHECK(f.betas(1) == doctest::Approx(0.3).epsilon(1e-10));
    CHECK_THROWS_AS(factor_fit(asset, {std::vector<double>(299, 0.0)}), ValidationError);
  }

  TEST_CASE("Granger detects a lagged driver in one direction") {
    Eigen::MatrixXd m = noise(2, 1000, 3);
    for (Eigen::Index t = 999; t >= 1; --t) m(1, t) += 0.5 * m(0, t - 1);
    const FilteredReturns f = filtered(m);
    const auto [forward, backward] = granger_pair(f, 0, 1);
    CHECK(forward.p_value < 0.001);
    CHECK(forward.beta == doctest::Approx(0.5).epsilon(0.15));
    CHECK(forward.i == 0);
    CHECK(forward.j == 1);
    CHECK(backward.p_value > 0.001);
    const FilteredGraph g = granger_network(f, 0.01);
    CHECK(g.directed);
    CHECK(g.provenance == Provenance::regression);
    CHECK(has_directed(g, 0, 1));
    CHECK_FALSE(has_directed(g, 1, 0));
    REQUIRE(g.edges.front().p_value.has_value());
  }

  TEST_CASE("Granger chain gives A to B to C") {
    Eigen::MatrixXd m = noise(3, 5000, 4);
    for (Eigen::Index t = 1; t < 5000; ++t) {
      m(1, t) += 0.5 * m(0, t - 1);
      m(2, t) += 0.5 * m(1, t - 1);
    }
    const FilteredGraph g = granger_network(filtered(m), 0.001);
    CHECK(has_directed(g, 0, 1));
    CHECK(has_directed(g, 1, 2));
    CHECK_FALSE(has_directed(g, 1, 0));
    CHECK_FALSE(has_directed(g, 2, 1));
    CHECK_FALSE(has_directed(g, 0, 2));
  }

  TEST_CASE("Granger edge cases") {
    CHECK(granger_network(filtered(noise(1, 500, 5)), 0.05).n_edges() == 0);
    CHECK_THROWS_AS(granger_network(filtered(noise(2, 20, 6)), 0.05), ValidationError);
    CHECK_THROWS_AS(granger_network(filtered(noise(2, 200, 6)), 1.5), ValidationError);
  }

  TEST_CASE("Granger p-values are uniform under the null") {
    const FilteredReturns f = filtered(noise(40, 1000, 7));
    const FilteredGraph g = granger_network(f, 0.05);
    const double rate = static_cast<double>(g.n_edges()) / (40.0 * 39.0);
    CHECK(rate > 0.03);
    CHECK(rate < 0.07);
  }

  TEST_CASE("robust regression on clean and contaminated data") {
    const Eigen::MatrixXd m = noise(2, 2000, 8);
    Eigen::MatrixXd x(2000, 2);
    x.col(0).setOnes();
    x.col(1) = m.row(0).transpose();
    Eigen::VectorXd y = 0.3 + 0.7 * x.col(1).array() + 0.2 * m.row(1).transpose().array();
    const RobustFit clean = robust_regression(x, y);
    CHECK(clean.converged);
    CHECK(std::abs(clean.coef(1) - 0.7) < 0.02);
    CHECK(clean.df == 1998.0);
    for (Eigen::Index t = 0; t < 2000; t += 50) y(t) += 25.0;
    const RobustFit dirty = robust_regression(x, y);
    CHECK(std::abs(dirty.coef(1) - 0.7) < 0.03);
    CHECK(std::abs(dirty.coef(0) - 0.3) < 0.03);
    const Eigen::VectorXd ols = x.colPivHouseholderQr().solve(y);
    CHECK(std::abs(ols(0) - 0.3) > 0.4);
    CHECK(dirty.t_stat(1) == doctest::Approx(dirty.coef(1) / dirty.std_err(1)));
  }

  TEST_CASE("robust regression is equivariant") {
    const Eigen::MatrixXd m = noise(2, 500, 9);
    Eigen::MatrixXd x(500, 2);
    x.col(0).setOnes();
    x.col(1) = m.row(0).transpose();
    const Eigen::VectorXd y = 0.5 * x.col(1) + m.row(1).transpose();
    const RobustFit a = robust_regression(x, y);
    const RobustFit b = robust_regression(x, 3.0 * y);
    CHECK(b.coef(1) == doctest::Approx(3.0 * a.coef(1)).epsilon(1e-7));
    CHECK(b.t_stat(1) == doctest::Approx(a.t_stat(1)).epsilon(1e-6));
  }

  TEST_CASE("robust pair network null rate") {
    const PValueNetwork either = robust_pair_network(filtered(noise(40, 1000, 10)), 0.05);
    const double rate = static_cast<double>(either.graph.n_edges()) / (40.0 * 39.0 / 2.0);
    CHECK(rate > 0.025);
    CHECK(rate < 0.085);
    PairNetworkOptions both;
    both.rule = EdgeRule::both;
    const PValueNetwork strict = robust_pair_network(filtered(noise(40, 1000, 10)), 0.05, both);
    CHECK(strict.graph.n_edges() <= either.graph.n_edges());
  }

  TEST_CASE("robust pair network on two blocks") {
    const std::vector<int> sizes{8, 8};
    const ReturnsPanel p = gaussian_panel(block_correlation(sizes, 0.5, 0.0), 1000, 11, 1.0);
    const PValueNetwork net = robust_pair_network(FilteredReturns::assume_filtered(p), 0.01);
    const auto labels = block_labels(sizes);
    int within = 0;
    int between = 0;
    for (const Edge& e : net.graph.edges) {
      (labels[static_cast<std::size_t>(e.source)] == labels[static_cast<std::size_t>(e.target)] ? within : between) += 1;
    }
    CHECK(within == 56);
    CHECK(between <= 3);
    double top = 0.0;
    for (const Edge& e : net.graph.edges) {
      CHECK(e.weight > 0.0);
      CHECK(e.weight <= 1.0);
      CHECK(e.source < e.target);
      top = std::max(top, e.weight);
    }
    CHECK(top == 1.0);
  }

  TEST_CASE("robust pair network threshold is strict") {
    const ReturnsPanel p = gaussian_panel(equicorrelation(5, 0.05), 300, 12, 1.0);
    const FilteredReturns f = FilteredReturns::assume_filtered(p);
    const PValueNetwork wide = robust_pair_network(f, 0.5);
    const Eigen::MatrixXd& pv = wide.p_values.values;
    CHECK(pv.diagonal().isZero());
    const double g01 = std::min(pv(0, 1), pv(1, 0));
    const PValueNetwork at = robust_pair_network(f, g01);
    CHECK_FALSE(at.graph.has_edge(0, 1));
    const PValueNetwork above = robust_pair_network(f, std::nextafter(g01, 1.0));
    CHECK(above.graph.has_edge(0, 1));
    const PairEdge e = robust_pair(f, 0, 1);
    CHECK(e.p_value == pv(0, 1));
  }

  TEST_CASE("robust pair p-values are close to symmetric") {
    const ReturnsPanel p = gaussian_panel(equicorrelation(6, 0.1), 1000, 13, 1.0);
    const PValueNetwork net = robust_pair_network(FilteredReturns::assume_filtered(p), 0.05);
    const Eigen::MatrixXd& pv = net.p_values.values;
    for (Eigen::Index i = 0; i < 6; ++i) {
      for (Eigen::Index j = i + 1; j < 6; ++j) CHECK(std::abs(pv(i, j) - pv(j, i)) < 0.05);
    }
  }

  TEST_CASE("de-garched panel matches per-asset filtering") {
    const ReturnsPanel raw = garch_panel(3, GarchParams{0.05, {0.1}, {0.85}}, 2000, 14);
    const FilteredReturns f = degarch_panel(raw);
    const FilteredReturns threaded = degarch_panel(raw, 2);
    CHECK(f.panel().returns == threaded.panel().returns);
    const Eigen::RowVectorXd row = raw.returns.row(1);
    const std::vector<double> series(row.data(), row.data() + row.size());
    const auto expected = degarch(series, garch_fit(series));
    for (Eigen::Index t = 0; t < 2000; ++t) CHECK(f.panel().returns(1, t) == expected[static_cast<std::size_t>(t)]);
  }

  TEST_CASE("aggregation into country and sector groups") {
    FilteredGraph g;
    g.nodes = {"a", "b", "c", "d"};
    g.provenance = Provenance::regression;
    LabelMap labels{{"a", {"Tech", "US"}}, {"b", {"Tech", "US"}}, {"c", {"Bank", "UK"}}, {"d", {"Bank", "UK"}}};
    for (int s = 0; s < 2; ++s) {
      for (int t = 2; t < 4; ++t) g.edges.push_back({s, t, 0.8, std::nullopt});
    }
    g.edges.push_back({0, 1, 0.3, std::nullopt});
    const FilteredGraph full = aggregate_network(g, labels);
    CHECK(full.provenance == Provenance::aggregate);
    REQUIRE(full.nodes == std::vector<std::string>{"UK/Bank", "US/Tech"});
    REQUIRE(full.n_edges() == 1);
    CHECK(full.edges[0].weight == doctest::Approx(0.8));
    g.edges.erase(g.edges.begin() + 1, g.edges.begin() + 3);
    const FilteredGraph half = aggregate_network(g, labels);
    REQUIRE(half.n_edges() == 1);
    CHECK(half.edges[0].weight == doctest::Approx(0.4));
    LabelMap same{{"a", {"X", "Y"}}, {"b", {"X", "Y"}}, {"c", {"X", "Y"}}, {"d", {"X", "Y"}}};
    const FilteredGraph one = aggregate_network(g, same);
    CHECK(one.n_nodes() == 1);
    CHECK(one.n_edges() == 0);
    labels.erase("d");
    CHECK_THROWS_AS(aggregate_network(g, labels), ValidationError);
  }
}
