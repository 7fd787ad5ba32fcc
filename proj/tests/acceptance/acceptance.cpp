// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails.

#include "finnet/correlation.hpp"
#include "finnet/econnet.hpp"
#include "finnet/filtergraph.hpp"
#include "finnet/panel.hpp"
#include "finnet/random.hpp"
#include "finnet/spectrum.hpp"
#include "finnet/spillover.hpp"
#include "finnet/synth.hpp"
#include "finnet/volatility.hpp"
#include "oracles.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace finnet;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id = 0;
  std::string name;
  double budget_seconds = 0.0;
  std::function<Outcome()> run;
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

DependencyMatrix random_distance(int n, std::uint64_t seed, Eigen::Index t) {
  return to_distance(pearson(gaussian_panel(Eigen::MatrixXd::Identity(n, n), t, seed)));
}

std::vector<int> canonical(std::vector<int> a) {
  canonicalize_labels(a);
  return a;
}

// 1. MST total weight equals the exhaustive minimum.
constexpr double kMstTolerance = 1e-12;

Outcome mst_optimality() {
  int agree = 0;
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const int n = 4 + k % 5;
    const DependencyMatrix d = random_distance(n, split_seed(101, static_cast<std::uint64_t>(k)), 20);
    double total = 0.0;
    for (const Edge& e : mst(d).edges) total += e.weight;
    const double gap = std::abs(total - oracle::brute_force_mst_weight(d.values));
    worst = std::max(worst, gap);
    agree += gap <= kMstTolerance ? 1 : 0;
  }
  return {agree == 100, fmt("%d/100 instances match exhaustive enumeration, max |diff| %.2g", agree, worst)};
}

// 2. PMFG structure.
Outcome pmfg_structure() {
  int ok = 0;
  std::string first_failure;
  for (int k = 0; k < 50; ++k) {
    const int n = 5 + (k * 35) / 49;
    const DependencyMatrix d = random_distance(n, split_seed(202, static_cast<std::uint64_t>(k)), 100);
    std::set<double> distinct;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) distinct.insert(d.values(i, j));
    }
    const bool unique_weights = distinct.size() == static_cast<std::size_t>(n * (n - 1) / 2);
    const FilteredGraph g = pmfg(d);
    std::vector<std::pair<int, int>> edges;
    for (const Edge& e : g.edges) edges.emplace_back(e.source, e.target);
    const bool count = g.n_edges() == static_cast<std::size_t>(3 * (n - 2));
    const bool planar = oracle::boost_is_planar(n, edges);
    bool contains_mst = true;
    for (const Edge& e : mst(d).edges) contains_mst = contains_mst && g.has_edge(e.source, e.target);
    const bool no_k5 = !oracle::has_k5(n, edges);
    if (unique_weights && count && planar && contains_mst && no_k5) {
      ++ok;
    } else if (first_failure.empty()) {
      first_failure = fmt(" (first failure N=%d: distinct=%d count=%d planar=%d mst=%d noK5=%d)", n, unique_weights,
                          count, planar, contains_mst, no_k5);
    }
  }
  return {ok == 50, fmt("%d/50 instances: 3(N-2) edges, Boyer-Myrvold planar, MST subset, no K5", ok) + first_failure};
}

// 3. Marchenko-Pastur law.
constexpr double kMpInsideRate = 0.99;
constexpr double kMpKs = 0.05;
constexpr double kMpHandTolerance = 1e-3;

Outcome mp_law() {
  const ReturnsPanel p = gaussian_panel(Eigen::MatrixXd::Identity(100, 100), 1000, 303);
  const EigenSystem e = eigensystem(pearson(p));
  const MpSpectrum m = mp_bounds(100, 1000);
  const double inside = static_cast<double>(outside_mp(e, m).bulk.size()) / 100.0;
  const double ks = mp_ks_distance(e.values, m);
  // Hand evaluation of (1 +- sqrt(N/T))^2 for N = 404, T = 3775.
  const MpSpectrum big = mp_bounds(404, 3775);
  const bool hand = std::abs(big.lambda_minus - 0.453) < kMpHandTolerance && std::abs(big.lambda_plus - 1.761) < kMpHandTolerance;
  return {inside >= kMpInsideRate && ks < kMpKs && hand,
          fmt("inside bulk %.0f%%, KS %.4f; N=404,T=3775 bounds (%.4f, %.4f) vs (0.453, 1.761)", 100.0 * inside, ks,
              big.lambda_minus, big.lambda_plus)};
}

// 4. GARCH recovery and de-garched squared-return whiteness.
constexpr double kGarchMeanAbsError = 0.03;
constexpr double kGarchAcfRate = 0.80;

Outcome garch_recovery() {
  const GarchParams truth{0.05, {0.10}, {0.85}};
  constexpr int runs = 20;
  constexpr std::size_t t = 20000;
  double err[3] = {0.0, 0.0, 0.0};
  int inside = 0;
  int all_lags = 0;
  int converged = 0;
  const double band = 2.0 / std::sqrt(static_cast<double>(t));
  for (int run = 0; run < runs; ++run) {
    const auto r = garch_simulate(truth, t, split_seed(404, static_cast<std::uint64_t>(run)));
    const GarchFit fit = garch_fit(r);
    converged += fit.converged ? 1 : 0;
    err[0] += std::abs(fit.alpha0 - truth.alpha0) / runs;
    err[1] += std::abs(fit.alphas[0] - truth.alphas[0]) / runs;
    err[2] += std::abs(fit.betas[0] - truth.betas[0]) / runs;
    const auto f = degarch(r, fit);
    std::vector<double> sq(f.size());
    for (std::size_t k = 0; k < f.size(); ++k) sq[k] = f[k] * f[k];
    const auto a = acf(sq, 10);
    int run_inside = 0;
    for (std::size_t lag = 1; lag <= 10; ++lag) run_inside += std::abs(a[lag]) < band ? 1 : 0;
    inside += run_inside;
    all_lags += run_inside == 10 ? 1 : 0;
  }
  const double rate = inside / (10.0 * runs);
  const bool pass = converged == runs && err[0] < kGarchMeanAbsError && err[1] < kGarchMeanAbsError &&
                    err[2] < kGarchMeanAbsError && rate >= kGarchAcfRate;
  return {pass, fmt("mean |err| alpha0 %.4f alpha1 %.4f beta1 %.4f; ACF inside band %.1f%% of (run, lag) pairs "
                    "(%d/%d runs all 10 lags); %d/%d converged",
                    err[0], err[1], err[2], 100.0 * rate, all_lags, runs, converged, runs)};
}

// 5. Null calibration of the regression networks.
constexpr double kNullLow = 0.035;
constexpr double kNullHigh = 0.065;

Outcome null_calibration() {
  constexpr int pairs = 2000;
  int granger_edges = 0;
  int robust_edges = 0;
  for (int k = 0; k < pairs; ++k) {
    const ReturnsPanel p = gaussian_panel(Eigen::MatrixXd::Identity(2, 2), 1000, split_seed(505, static_cast<std::uint64_t>(k)));
    const FilteredReturns f = degarch_panel(p);
    granger_edges += static_cast<int>(granger_network(f, 0.05).n_edges());
    robust_edges += static_cast<int>(robust_pair_network(f, 0.05).graph.n_edges());
  }
  // Granger tests both directions of each pair; the robust network has one candidate edge per pair.
  const double granger = granger_edges / (2.0 * pairs);
  const double robust = robust_edges / static_cast<double>(pairs);
  const auto in = [](double x) { return x >= kNullLow && x <= kNullHigh; };
  return {in(granger) && in(robust), fmt("Granger edge rate %.2f%%, robust pairwise edge rate %.2f%% (band [3.5%%, 6.5%%])",
                                         100.0 * granger, 100.0 * robust)};
}

// 6. Generalized FEVD.
constexpr double kRowSum = 1e-10;
constexpr double kOracleAbs = 0.02;
constexpr double kIdentity = 1e-10;

VarFit known_var(const std::vector<Eigen::MatrixXd>& coefficients, const Eigen::MatrixXd& omega) {
  VarFit f;
  for (Eigen::Index i = 0; i < omega.rows(); ++i) f.assets.push_back("V" + std::to_string(i));
  f.p = static_cast<int>(coefficients.size());
  f.coefficients = coefficients;
  f.intercept = Eigen::VectorXd::Zero(omega.rows());
  f.omega = omega;
  f.spectral_radius = companion_spectral_radius(coefficients);
  f.stable = f.spectral_radius < 1.0;
  return f;
}

Outcome gfevd_correctness() {
  Eigen::Matrix3d a;
  a << 0.5, 0.2, 0.0, 0.1, 0.4, 0.1, 0.0, 0.3, 0.3;
  Eigen::Matrix3d omega;
  omega << 1.0, 0.3, 0.1, 0.3, 1.5, 0.2, 0.1, 0.2, 0.8;
  const FevdMatrix d = gfevd(known_var({a}, omega), 10);
  const double row_err = (d.normalized.rowwise().sum().array() - 1.0).abs().maxCoeff();
  const Eigen::MatrixXd sim = oracle::simulated_gfevd({a}, omega, 10, 100000, 606);
  const double oracle_err = (d.normalized - sim).cwiseAbs().maxCoeff();
  Eigen::Matrix3d diag_a = Eigen::Matrix3d::Zero();
  diag_a.diagonal() << 0.6, -0.2, 0.4;
  Eigen::Matrix3d diag_omega = Eigen::Matrix3d::Zero();
  diag_omega.diagonal() << 1.0, 0.5, 2.0;
  const double id_err =
      (gfevd(known_var({diag_a}, diag_omega), 10).normalized - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  return {row_err < kRowSum && oracle_err < kOracleAbs && id_err < kIdentity,
          fmt("row-sum error %.2g, max |analytic - simulated| %.4f, diagonal-VAR identity error %.2g", row_err,
              oracle_err, id_err)};
}

// 7. Weighted correlation.
constexpr double kFlatLimit = 1e-6;
constexpr double kW0 = 1e-12;

Outcome weighted_correlation() {
  const ReturnsPanel p = gaussian_panel(equicorrelation(5, 0.4), 60, 707);
  const DependencyMatrix slow = weighted_corr(p, WeightScheme{60, 1e6});
  const DependencyMatrix flat = pearson(p);
  const double dev = (slow.values - flat.values).cwiseAbs().maxCoeff();
  // First-order size of the deviation for comparison: sum_t dw_t (z_i z_j - r (z_i^2 + z_j^2) / 2).
  const Eigen::VectorXd dw = WeightScheme{60, 1e6}.weights().array() - 1.0 / 60.0;
  double predicted = 0.0;
  for (Eigen::Index i = 0; i < 5; ++i) {
    for (Eigen::Index j = i + 1; j < 5; ++j) {
      const Eigen::RowVectorXd xi = p.returns.row(i).array() - p.returns.row(i).mean();
      const Eigen::RowVectorXd xj = p.returns.row(j).array() - p.returns.row(j).mean();
      const Eigen::RowVectorXd zi = xi / std::sqrt(xi.squaredNorm() / 60.0);
      const Eigen::RowVectorXd zj = xj / std::sqrt(xj.squaredNorm() / 60.0);
      const double r = flat.values(i, j);
      predicted = std::max(predicted, std::abs((zi.cwiseProduct(zj) - 0.5 * r * (zi.cwiseAbs2() + zj.cwiseAbs2())).dot(dw.transpose())));
    }
  }
  const double w0 = (1.0 - std::exp(-1.0 / 20.0)) / (1.0 - std::exp(-60.0 / 20.0));
  const double w0_err = std::abs(WeightScheme::w0(60, 20.0) - w0);
  return {dev < kFlatLimit && w0_err < kW0,
          fmt("theta=1e6 max |weighted - Pearson| %.3g (limit 1e-6; first-order prediction %.3g); w0(60,20) = %.10f, "
              "error %.2g",
              dev, predicted, WeightScheme::w0(60, 20.0), w0_err)};
}

// 8. Permutation against parametric significance band. The heavy-tail
// direction is measured by how many permutation draws fall beyond the
// parametric 99.8% bound, compared between sources with a two-proportion
// z statistic.
constexpr double kBandRelative = 0.05;
constexpr double kExtremeAlpha = 0.002;
constexpr double kExcessZ = 3.0;

Outcome permutation_band_check() {
  const ReturnsPanel gauss = gaussian_panel(Eigen::MatrixXd::Identity(20, 20), 4000, 808);
  const ReturnsPanel heavy = gaussian_panel(Eigen::MatrixXd::Identity(20, 20), 4000, 808, 0.01, 3.0);
  PermutationOptions o;
  o.n_draws = 100000;
  o.seed = 809;
  const SignificanceBand par = parametric_band(3775, 0.05);
  const SignificanceBand perm = permutation_band(3775, 0.05, gauss, o);
  const double rel = std::max(std::abs(perm.upper - par.upper), std::abs(perm.lower - par.lower)) / par.upper;
  const double bound = parametric_band(3775, kExtremeAlpha).upper;
  const auto beyond = [&](const ReturnsPanel& source) {
    const auto draws = permutation_draws(3775, source, o);
    return static_cast<double>(std::count_if(draws.begin(), draws.end(), [&](double r) { return std::abs(r) > bound; }));
  };
  const double n = static_cast<double>(o.n_draws);
  const double g = beyond(gauss);
  const double h = beyond(heavy);
  const double pooled = (g + h) / (2.0 * n);
  const double z = (h - g) / n / std::sqrt(2.0 * pooled * (1.0 - pooled) / n);
  return {rel < kBandRelative && z > kExcessZ,
          fmt("95%% band: permutation [%.5f, %.5f] vs parametric +-%.5f (rel. diff %.2f%%); draws beyond the "
              "parametric 99.8%% bound: Gaussian %.0f, Student-t(3) %.0f of 1e5 (z = %.1f)",
              perm.lower, perm.upper, par.upper, 100.0 * rel, g, h, z)};
}

// 9. Planted two-block clustering.
Outcome clustering_ground_truth() {
  const std::vector<int> sizes{20, 20};
  const ReturnsPanel p = gaussian_panel(block_correlation(sizes, 0.7, 0.1), 1000, 909);
  const DependencyMatrix d = to_distance(pearson(p));
  const std::vector<int> truth = canonical(block_labels(sizes));
  const Dendrogram den = hierarchical(d);
  const double cut = 0.5 * (den.merges.back().height + den.merges[den.merges.size() - 2].height);
  const Clustering by_cut = cut_dendrogram(den, cut);
  const Clustering first = dbht(d);
  const Clustering second = dbht(d);
  const bool cut_ok = by_cut.assignment == truth;
  const bool dbht_ok = first.assignment == truth;
  const bool same = first.assignment == second.assignment && first.n_clusters == second.n_clusters;
  return {cut_ok && dbht_ok && same, fmt("dendrogram cut %s (%d clusters), DBHT %s (%d clusters), DBHT repeat %s",
                                         cut_ok ? "exact" : "wrong", by_cut.n_clusters, dbht_ok ? "exact" : "wrong",
                                         first.n_clusters, same ? "identical" : "differs")};
}

// 10. Tail index.
constexpr double kHillTolerance = 0.1;

Outcome tail_index() {
  const TailFit t = tail_exponent(pareto_sample(3.0, 100000, 1010));
  return {std::abs(t.exponent - 3.0) <= kHillTolerance, fmt("Hill estimate %.4f for Pareto(3), n=1e5", t.exponent)};
}

// 11. CLI determinism.
struct CliSetup {
  std::string binary;
  std::string fixtures;
  std::string work;
};

std::string quoted(const std::string& s) { return "'" + s + "'"; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome cli_determinism(const CliSetup& cli) {
  const std::string prices = quoted(cli.fixtures + "/prices.csv");
  const std::string labels = quoted(cli.fixtures + "/labels.csv");
  const std::string in = " --prices " + prices + " --labels " + labels;
  const std::vector<std::pair<std::string, std::string>> commands{
      {"returns", "returns" + in},
      {"corr", "corr" + in + " --window 100 --theta 20 --step 50 --band permutation --draws 20000 --threshold-quantile 0.8"},
      {"spectrum", "spectrum" + in},
      {"mst", "mst" + in},
      {"pmfg", "pmfg" + in},
      {"dbht", "dbht" + in},
      {"cluster", "cluster" + in + " --linkage average --cut 1.0"},
      {"garch", "garch" + in},
      {"dcc", "dcc" + in},
      {"granger-net", "granger-net" + in + " --aggregate"},
      {"pair-net", "pair-net" + in + " --aggregate"},
      {"spillover", "spillover" + in + " --window 200 --step 50"},
      {"spillover-volatility", "spillover" + in + " --series volatility"},
      {"generate-two-block", "generate --model two-block --n 10 --t 300"},
      {"generate-single-index", "generate --model single-index --n 8 --t 300"},
      {"generate-garch", "generate --model garch --n 4 --t 300 --student-df 5"},
      {"generate-dcc", "generate --model dcc --n 4 --t 300"},
      {"generate-var", "generate --model var --n 3 --t 300"},
  };
  int identical = 0;
  std::string problems;
  for (const auto& [name, args] : commands) {
    std::vector<fs::path> dirs;
    bool ran = true;
    for (int rep = 0; rep < 2; ++rep) {
      const fs::path dir = fs::path(cli.work) / ("run" + std::to_string(rep)) / name;
      fs::remove_all(dir);
      const std::string cmd = quoted(cli.binary) + " --out " + quoted(dir.string()) + " --seed 42 " + args + " > /dev/null 2>&1";
      ran = ran && std::system(cmd.c_str()) == 0;
      dirs.push_back(dir);
    }
    bool same = ran;
    std::size_t files = 0;
    if (ran) {
      for (const auto& entry : fs::recursive_directory_iterator(dirs[0])) {
        if (!entry.is_regular_file()) continue;
        ++files;
        const fs::path other = dirs[1] / fs::relative(entry.path(), dirs[0]);
        same = same && fs::exists(other) && slurp(entry.path()) == slurp(other);
      }
      std::size_t other_files = 0;
      for (const auto& entry : fs::recursive_directory_iterator(dirs[1])) other_files += entry.is_regular_file() ? 1 : 0;
      same = same && files == other_files && files > 0;
    }
    if (same) {
      ++identical;
    } else {
      problems += " " + name + (ran ? "(differs)" : "(failed)");
    }
  }
  return {identical == static_cast<int>(commands.size()),
          fmt("%d/%zu subcommands byte-identical across two runs", identical, commands.size()) + problems};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks"};
  CliSetup cli;
  std::vector<int> only;
  app.add_option("--cli", cli.binary, "Path to the finnet executable")->required();
  app.add_option("--fixtures", cli.fixtures, "Directory holding prices.csv and labels.csv")->required();
  app.add_option("--work", cli.work, "Scratch directory for CLI runs")->required();
  app.add_option("--only", only, "Run only these criteria");
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> criteria{
      {1, "MST optimality", 30.0, mst_optimality},
      {2, "PMFG structure", 60.0, pmfg_structure},
      {3, "Marchenko-Pastur law", 10.0, mp_law},
      {4, "GARCH recovery", 120.0, garch_recovery},
      {5, "Null calibration of networks", 120.0, null_calibration},
      {6, "GFEVD correctness", 60.0, gfevd_correctness},
      {7, "Weighted correlation", 0.0, weighted_correlation},
      {8, "Permutation vs parametric significance", 0.0, permutation_band_check},
      {9, "Clustering ground truth", 0.0, clustering_ground_truth},
      {10, "Tail index", 0.0, tail_index},
      {11, "End-to-end determinism", 0.0, [&] { return cli_determinism(cli); }},
  };

  int failed = 0;
  for (const Criterion& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.budget_seconds > 0.0 && seconds >= c.budget_seconds) {
      o.pass = false;
      o.detail += fmt("; runtime over the %.0f s budget", c.budget_seconds);
    }
    failed += o.pass ? 0 : 1;
    std::printf("%s %2d %s: %s [%.2f s]\n", o.pass ? "PASS" : "FAIL", c.id, c.name.c_str(), o.detail.c_str(), seconds);
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
