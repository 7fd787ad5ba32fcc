// finnet: price panels in, filtered networks, matrices and plot data out.
//
// Every subcommand writes its artifacts into --out plus manifest.json, which
// lists the inputs and outputs with FNV-1a hashes and the full option set.

#include "finnet/correlation.hpp"
#include "finnet/econnet.hpp"
#include "finnet/error.hpp"
#include "finnet/filtergraph.hpp"
#include "finnet/io.hpp"
#include "finnet/panel.hpp"
#include "finnet/parallel.hpp"
#include "finnet/spectrum.hpp"
#include "finnet/spillover.hpp"
#include "finnet/synth.hpp"
#include "finnet/volatility.hpp"

#include <CLI11.hpp>
#include <Eigen/Core>
#include <boost/version.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <optional>
#include <string>
#include <vector>

#ifndef FINNET_VERSION
#define FINNET_VERSION "0.0.0"
#endif

namespace {

using namespace finnet;
using io::Json;
namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitNumerical = 2;

std::uint64_t fnv1a(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read " + path.string());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::istreambuf_iterator<char> it(in), end; it != end; ++it) {
    h ^= static_cast<unsigned char>(*it);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

struct Common {
  std::string out;
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
  std::string prices;
  std::string labels;
  bool fill = false;
};

/// Output bookkeeping for one run.
class Run {
 public:
  Run(std::string command, const Common& common) : command_(std::move(command)), common_(common) {}

  fs::path file(const std::string& name) {
    outputs_.push_back(name);
    return fs::path(common_.out) / name;
  }
  void input(const std::string& path) { inputs_.push_back(path); }
  void flag(const std::string& message) {
    flags_.push_back(message);
    std::cerr << "warning: " << message << "\n";
  }
  [[nodiscard]] bool flagged() const { return !flags_.empty(); }

  std::uint64_t require_seed() const {
    if (!common_.seed) throw ValidationError(command_ + ": --seed is required for this run");
    return *common_.seed;
  }

  ReturnsPanel load() {
    if (common_.prices.empty()) throw ValidationError(command_ + ": --prices is required");
    input(common_.prices);
    if (!common_.labels.empty()) input(common_.labels);
    const auto policy = common_.fill ? io::GapPolicy::forward_fill : io::GapPolicy::reject;
    prices_ = io::read_price_csv(common_.prices, policy).panel;
    return io::load_returns(common_.prices, common_.labels, policy);
  }

  /// Prices behind the last `load`.
  [[nodiscard]] const PricePanel& prices() const { return prices_; }

  void write_graph(const std::string& stem, const FilteredGraph& g) {
    io::write_graph_csv(file(stem + ".csv"), g);
    io::write_json(file(stem + ".json"), io::to_json(g));
    io::write_text(file(stem + ".dot"), io::to_dot(g));
  }

  void write_manifest(const Json& options, const std::string& status) {
    Json j;
    j["command"] = command_;
    j["status"] = status;
    j["flags"] = flags_;
    Json versions;
    versions["finnet"] = FINNET_VERSION;
    versions["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION);
    versions["boost"] = std::to_string(BOOST_VERSION / 100000) + "." + std::to_string(BOOST_VERSION / 100 % 1000) + "." +
                        std::to_string(BOOST_VERSION % 100);
    j["versions"] = std::move(versions);
    j["seed"] = common_.seed ? Json(*common_.seed) : Json(nullptr);
    j["threads"] = common_.threads;
    j["options"] = options;
    j["config_hash"] = hex(fnv1a(options.dump()));
    Json ins = Json::array();
    for (const auto& p : inputs_) {
      Json e;
      e["path"] = p;
      e["fnv1a"] = hex(fnv1a(fs::path(p)));
      ins.push_back(std::move(e));
    }
    j["inputs"] = std::move(ins);
    Json outs = Json::array();
    for (const auto& name : outputs_) {
      const fs::path p = fs::path(common_.out) / name;
      if (!fs::exists(p)) continue;
      Json e;
      e["file"] = name;
      e["fnv1a"] = hex(fnv1a(p));
      outs.push_back(std::move(e));
    }
    j["outputs"] = std::move(outs);
    io::write_json(fs::path(common_.out) / "manifest.json", j);
  }

 private:
  std::string command_;
  const Common& common_;
  std::vector<std::string> inputs_;
  std::vector<std::string> outputs_;
  std::vector<std::string> flags_;
  PricePanel prices_;
};

// Density histogram over [lo, hi] with `bins` equal bins.
void write_histogram(const fs::path& path, const std::vector<double>& values, int bins, double lo, double hi) {
  require(bins >= 1, "--bins must be positive");
  if (!(hi > lo)) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double width = (hi - lo) / bins;
  std::vector<double> centers(static_cast<std::size_t>(bins));
  std::vector<double> density(static_cast<std::size_t>(bins), 0.0);
  for (int b = 0; b < bins; ++b) centers[static_cast<std::size_t>(b)] = lo + (b + 0.5) * width;
  for (double v : values) {
    if (v < lo || v > hi) continue;
    const int b = std::min(bins - 1, static_cast<int>((v - lo) / width));
    density[static_cast<std::size_t>(b)] += 1.0;
  }
  const double scale = values.empty() ? 0.0 : 1.0 / (static_cast<double>(values.size()) * width);
  for (auto& d : density) d *= scale;
  io::write_columns_csv(path, {"center", "density"}, {centers, density});
}

std::vector<double> off_diagonal(const Eigen::MatrixXd& m) {
  std::vector<double> v;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < m.cols(); ++j) v.push_back(m(i, j));
  }
  return v;
}

double mean_off_diagonal(const Eigen::MatrixXd& m) {
  const auto v = off_diagonal(m);
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

std::vector<double> row_vector(const ReturnsPanel& p, Eigen::Index i) {
  const Eigen::RowVectorXd r = p.returns.row(i);
  return {r.data(), r.data() + r.size()};
}

LabelMap panel_labels(const ReturnsPanel& panel) {
  if (panel.labels.empty()) throw ValidationError("--labels is required for aggregation and composition output");
  return panel.labels;
}

// ---------------------------------------------------------------- commands

struct ReturnsOptions {
  std::size_t max_lag = 20;
};

int cmd_returns(Run& run, const ReturnsOptions& o) {
  const ReturnsPanel r = run.load();
  io::write_returns_csv(run.file("returns.csv"), r);

  std::vector<double> pooled;
  std::vector<double> acf_r(o.max_lag + 1, 0.0);
  std::vector<double> acf_abs(o.max_lag + 1, 0.0);
  for (Eigen::Index i = 0; i < r.n_assets(); ++i) {
    const auto row = row_vector(r, i);
    const auto z = standardize(row);
    pooled.insert(pooled.end(), z.begin(), z.end());
    std::vector<double> absolute(row.size());
    std::transform(row.begin(), row.end(), absolute.begin(), [](double x) { return std::abs(x); });
    const auto a = acf(row, o.max_lag);
    const auto b = acf(absolute, o.max_lag);
    for (std::size_t k = 0; k <= o.max_lag; ++k) {
      acf_r[k] += a[k] / static_cast<double>(r.n_assets());
      acf_abs[k] += b[k] / static_cast<double>(r.n_assets());
    }
  }
  std::vector<double> lags(o.max_lag + 1);
  for (std::size_t k = 0; k <= o.max_lag; ++k) lags[k] = static_cast<double>(k);
  io::write_columns_csv(run.file("acf.csv"), {"lag", "returns", "abs_returns"}, {lags, acf_r, acf_abs});

  std::vector<double> magnitude(pooled.size());
  std::transform(pooled.begin(), pooled.end(), magnitude.begin(), [](double x) { return std::abs(x); });
  const auto points = ccdf(magnitude);
  std::vector<double> xs;
  std::vector<double> ss;
  for (const auto& p : points) {
    xs.push_back(p.x);
    ss.push_back(p.survival);
  }
  io::write_columns_csv(run.file("ccdf.csv"), {"abs_standardized_return", "survival"}, {xs, ss});

  Json tail;
  try {
    const TailFit fit = tail_exponent(pooled);
    tail["exponent"] = fit.exponent;
    tail["tail_fraction"] = fit.tail_fraction;
    tail["n_tail"] = fit.n_tail;
  } catch (const ValidationError& e) {
    run.flag(std::string("tail exponent not estimated: ") + e.what());
    tail["exponent"] = nullptr;
  }
  io::write_json(run.file("tail.json"), tail);

  PricePanel normalized = run.prices();
  normalized.prices = normalized_prices(run.prices());
  io::write_price_csv(run.file("normalized_prices.csv"), normalized);
  return kExitOk;
}

struct CorrOptions {
  std::string method = "pearson";
  Eigen::Index window = 0;
  std::optional<double> theta;
  Eigen::Index step = 0;
  std::string band = "none";
  double alpha = 0.05;
  std::size_t draws = 100000;
  int bins = 50;
  std::optional<double> threshold_quantile;
};

int cmd_corr(Run& run, const CorrOptions& o, const Common& common) {
  const ReturnsPanel r = run.load();
  const Eigen::Index window = o.window > 0 ? o.window : r.n_obs();
  DependencyMatrix m;
  if (o.method == "pearson") {
    m = o.theta || o.window > 0 ? weighted_corr(r, WeightScheme{window, o.theta}) : pearson(r);
  } else if (o.method == "spearman") {
    m = spearman(o.window > 0 ? r.window(r.n_obs() - window, window) : r);
  } else if (o.method == "covariance") {
    m = covariance(o.window > 0 ? r.window(r.n_obs() - window, window) : r);
  } else {
    throw ValidationError("unknown --method " + o.method);
  }
  io::write_matrix_csv(run.file("corr.csv"), m);
  io::write_json(run.file("corr.json"), io::to_json(m));
  if (m.kind == MatrixKind::correlation) {
    io::write_matrix_csv(run.file("distance.csv"), to_distance(m));
    write_histogram(run.file("histogram.csv"), off_diagonal(m.values), o.bins, -1.0, 1.0);
    if (o.threshold_quantile) run.write_graph("threshold", threshold_graph(m, QuantileThreshold{*o.threshold_quantile}));
  }

  if (o.step > 0) {
    require(o.method == "pearson", "rolling windows are available for the pearson method");
    const auto windows = o.theta ? rolling_weighted_corr(r, WeightScheme{window, o.theta}, o.step)
                                 : rolling_corr(r, window, o.step);
    std::string csv = "date,mean_correlation\n";
    Json all = Json::array();
    for (const auto& w : windows) {
      csv += (w.window ? w.window->end : std::string()) + "," + io::format_double(mean_off_diagonal(w.values)) + "\n";
      all.push_back(io::to_json(w));
    }
    io::write_text(run.file("rolling_mean.csv"), csv);
    io::write_json(run.file("rolling.json"), all);
  }

  if (o.band != "none") {
    BandMethod method = BandMethod::parametric_t;
    PermutationOptions perm;
    if (o.band == "permutation") {
      method = BandMethod::permutation;
      perm.seed = run.require_seed();
      perm.n_draws = o.draws;
      perm.threads = common.threads;
    } else if (o.band != "parametric") {
      throw ValidationError("unknown --band " + o.band);
    }
    const SignificanceBand band = significance_band(window, o.alpha, method, &r, perm);
    Json j;
    j["method"] = o.band;
    j["alpha"] = band.alpha;
    j["delta_t"] = band.delta_t;
    j["lower"] = band.lower;
    j["upper"] = band.upper;
    io::write_json(run.file("band.json"), j);
    if (method == BandMethod::permutation) {
      write_histogram(run.file("permutation_histogram.csv"), permutation_draws(window, r, perm), o.bins, -1.0, 1.0);
    }
  }
  return kExitOk;
}

struct SpectrumOptions {
  int bins = 50;
  double sigma_r = 1.0;
  int grid = 200;
};

int cmd_spectrum(Run& run, const SpectrumOptions& o) {
  const ReturnsPanel r = run.load();
  const DependencyMatrix c = pearson(r);
  const EigenSystem e = eigensystem(c);
  const MpSpectrum mp = mp_bounds(r.n_assets(), r.n_obs(), o.sigma_r);
  const SpectrumPartition part = outside_mp(e, mp);
  io::write_eigen_csv(run.file("eigen.csv"), e, r.assets);
  io::write_json(run.file("eigen.json"), io::to_json(e, r.assets));
  Json j = io::to_json(mp);
  j["n_above"] = part.above.size();
  j["n_bulk"] = part.bulk.size();
  j["n_below"] = part.below.size();
  j["ks_distance"] = mp_ks_distance(e.values, mp);
  io::write_json(run.file("mp.json"), j);
  std::vector<double> values(e.values.data(), e.values.data() + e.values.size());
  write_histogram(run.file("eigen_histogram.csv"), values, o.bins, 0.0, e.values.maxCoeff());
  std::vector<double> lambda(static_cast<std::size_t>(o.grid));
  std::vector<double> density(static_cast<std::size_t>(o.grid));
  for (int k = 0; k < o.grid; ++k) {
    const double x = mp.lambda_minus + (mp.lambda_plus - mp.lambda_minus) * k / (o.grid - 1.0);
    lambda[static_cast<std::size_t>(k)] = x;
    density[static_cast<std::size_t>(k)] = mp_density(x, mp);
  }
  io::write_columns_csv(run.file("mp_density.csv"), {"lambda", "density"}, {lambda, density});
  return kExitOk;
}

int cmd_tree(Run& run, bool planar) {
  const ReturnsPanel r = run.load();
  const DependencyMatrix d = to_distance(pearson(r));
  run.write_graph(planar ? "pmfg" : "mst", planar ? pmfg(d) : mst(d));
  return kExitOk;
}

int cmd_dbht(Run& run) {
  const ReturnsPanel r = run.load();
  const DbhtResult res = dbht_detailed(to_distance(pearson(r)));
  io::write_clustering_csv(run.file("clusters.csv"), res.clustering);
  run.write_graph("pmfg", res.pmfg);
  Json tree;
  Json bubbles = Json::array();
  for (const auto& b : res.tree.bubbles) {
    Json names = Json::array();
    for (int v : b) names.push_back(r.assets[static_cast<std::size_t>(v)]);
    bubbles.push_back(std::move(names));
  }
  tree["bubbles"] = std::move(bubbles);
  Json links = Json::array();
  for (std::size_t k = 0; k < res.tree.links.size(); ++k) {
    const auto& l = res.tree.links[k];
    const bool to_b = res.tree.points_to_b[k];
    Json jl;
    jl["from"] = to_b ? l.a : l.b;
    jl["to"] = to_b ? l.b : l.a;
    Json sep = Json::array();
    for (int v : l.separator) sep.push_back(r.assets[static_cast<std::size_t>(v)]);
    jl["separator"] = std::move(sep);
    links.push_back(std::move(jl));
  }
  tree["links"] = std::move(links);
  tree["converging"] = res.tree.converging;
  io::write_json(run.file("bubble_tree.json"), tree);
  if (!r.labels.empty()) io::write_composition_csv(run.file("composition.csv"), cluster_composition(res.clustering, r.labels));
  return kExitOk;
}

struct ClusterOptions {
  std::string linkage = "average";
  std::optional<double> cut;
};

int cmd_cluster(Run& run, const ClusterOptions& o) {
  const ReturnsPanel r = run.load();
  Linkage linkage = Linkage::average;
  if (o.linkage == "single") {
    linkage = Linkage::single;
  } else if (o.linkage != "average") {
    throw ValidationError("unknown --linkage " + o.linkage);
  }
  const Dendrogram d = hierarchical(to_distance(pearson(r)), linkage);
  io::write_dendrogram_csv(run.file("dendrogram.csv"), d);
  if (o.cut) {
    const Clustering c = cut_dendrogram(d, *o.cut);
    io::write_clustering_csv(run.file("clusters.csv"), c);
    if (!r.labels.empty()) io::write_composition_csv(run.file("composition.csv"), cluster_composition(c, r.labels));
  }
  return kExitOk;
}

struct GarchOptions {
  int p = 1;
  int q = 1;
  std::size_t max_lag = 20;
};

int cmd_garch(Run& run, const GarchOptions& o, const Common& common) {
  const ReturnsPanel r = run.load();
  const GarchSpec spec{o.p, o.q};
  spec.validate();
  const auto n = static_cast<std::size_t>(r.n_assets());
  std::vector<GarchFit> fits(n);
  parallel_for(n, common.threads, [&](std::size_t i) {
    const auto row = row_vector(r, static_cast<Eigen::Index>(i));
    fits[i] = garch_fit(row, spec);
  });
  Json all = Json::object();
  ReturnsPanel filtered = r;
  std::vector<double> acf_sq(o.max_lag + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    all[r.assets[i]] = io::to_json(fits[i]);
    if (!fits[i].converged) run.flag("GARCH fit for " + r.assets[i] + " did not converge");
    io::write_variance_csv(run.file("h/" + r.assets[i] + ".csv"), r.timestamps, fits[i].h);
    const auto z = degarch(row_vector(r, static_cast<Eigen::Index>(i)), fits[i]);
    std::vector<double> z2(z.size());
    for (std::size_t t = 0; t < z.size(); ++t) {
      filtered.returns(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t)) = z[t];
      z2[t] = z[t] * z[t];
    }
    const auto a = acf(z2, o.max_lag);
    for (std::size_t k = 0; k <= o.max_lag; ++k) acf_sq[k] += a[k] / static_cast<double>(n);
  }
  io::write_json(run.file("garch.json"), all);
  io::write_returns_csv(run.file("degarched.csv"), filtered);
  std::vector<double> lags(o.max_lag + 1);
  std::vector<double> band(o.max_lag + 1, 2.0 / std::sqrt(static_cast<double>(r.n_obs())));
  for (std::size_t k = 0; k <= o.max_lag; ++k) lags[k] = static_cast<double>(k);
  io::write_columns_csv(run.file("acf_squared_degarched.csv"), {"lag", "acf", "band"}, {lags, acf_sq, band});
  return run.flagged() ? kExitNumerical : kExitOk;
}

struct DccOptions {
  std::size_t average = 10;
};

int cmd_dcc(Run& run, const DccOptions& o, const Common& common) {
  const ReturnsPanel r = run.load();
  const DccFit fit = dcc_fit(r, common.threads);
  if (!fit.converged) run.flag("DCC estimate did not converge (a + b at the stationarity boundary or optimizer stalled)");
  for (std::size_t i = 0; i < fit.univariate.size(); ++i) {
    if (!fit.univariate[i].converged) run.flag("GARCH fit for " + r.assets[i] + " did not converge");
  }
  io::write_json(run.file("dcc.json"), io::to_json(fit, r.assets));
  const auto averaged = trailing_average(fit.r_path, o.average);
  const Eigen::Index n = r.n_assets();
  std::string csv = "date,mean_correlation,mean_correlation_avg";
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) csv += "," + r.assets[static_cast<std::size_t>(i)] + ":" + r.assets[static_cast<std::size_t>(j)];
  }
  csv += "\n";
  for (std::size_t t = 0; t < averaged.size(); ++t) {
    csv += r.timestamps[t] + "," + io::format_double(mean_off_diagonal(fit.r_path[t])) + "," +
           io::format_double(mean_off_diagonal(averaged[t]));
    for (double v : off_diagonal(averaged[t])) csv += "," + io::format_double(v);
    csv += "\n";
  }
  io::write_text(run.file("dcc_correlation.csv"), csv);
  if (!averaged.empty()) {
    DependencyMatrix last;
    last.assets = r.assets;
    last.values = averaged.back();
    io::write_matrix_csv(run.file("dcc_last.csv"), last);
  }
  return run.flagged() ? kExitNumerical : kExitOk;
}

struct NetOptions {
  double level = 0.05;
  bool prefiltered = false;
  std::string rule = "either";
  double nu = kDefaultStudentNu;
  bool aggregate = false;
};

FilteredReturns filter(const ReturnsPanel& r, const NetOptions& o, const Common& common) {
  return o.prefiltered ? FilteredReturns::assume_filtered(r) : degarch_panel(r, common.threads);
}

int cmd_granger(Run& run, const NetOptions& o, const Common& common) {
  const ReturnsPanel r = run.load();
  const FilteredGraph g = granger_network(filter(r, o, common), o.level, common.threads);
  run.write_graph("granger", g);
  if (o.aggregate) run.write_graph("granger_aggregated", aggregate_network(g, panel_labels(r)));
  return kExitOk;
}

int cmd_pair(Run& run, const NetOptions& o, const Common& common) {
  const ReturnsPanel r = run.load();
  PairNetworkOptions po;
  po.nu = o.nu;
  po.threads = common.threads;
  if (o.rule == "both") {
    po.rule = EdgeRule::both;
  } else if (o.rule != "either") {
    throw ValidationError("unknown --rule " + o.rule);
  }
  const PValueNetwork net = robust_pair_network(filter(r, o, common), o.level, po);
  run.write_graph("pair", net.graph);
  io::write_matrix_csv(run.file("p_values.csv"), net.p_values);
  if (o.aggregate) run.write_graph("pair_aggregated", aggregate_network(net.graph, panel_labels(r)));
  return kExitOk;
}

struct SpilloverOptions {
  int lags = 1;
  int horizon = kDefaultHorizon;
  Eigen::Index window = 0;
  Eigen::Index step = 1;
  std::string diagonal = "own-share";
  std::string series = "returns";
};

int cmd_spillover(Run& run, const SpilloverOptions& o, const Common& common) {
  ReturnsPanel r = run.load();
  if (o.series == "volatility") {
    const auto n = static_cast<std::size_t>(r.n_assets());
    std::vector<GarchFit> fits(n);
    parallel_for(n, common.threads, [&](std::size_t i) { fits[i] = garch_fit(row_vector(r, static_cast<Eigen::Index>(i))); });
    for (std::size_t i = 0; i < n; ++i) {
      if (!fits[i].converged) run.flag("GARCH fit for " + r.assets[i] + " did not converge");
      for (std::size_t t = 0; t < fits[i].h.size(); ++t) {
        r.returns(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t)) = 0.5 * std::log(fits[i].h[t]);
      }
    }
  } else if (o.series != "returns") {
    throw ValidationError("unknown --series " + o.series);
  }
  DiagonalMode mode = DiagonalMode::own_share;
  if (o.diagonal == "from-sum") {
    mode = DiagonalMode::from_sum;
  } else if (o.diagonal != "own-share") {
    throw ValidationError("unknown --diagonal " + o.diagonal);
  }
  const VarFit fit = var_fit(r, o.lags);
  Json var;
  var["p"] = fit.p;
  var["spectral_radius"] = fit.spectral_radius;
  var["stable"] = fit.stable;
  io::write_json(run.file("var.json"), var);
  if (fit.stable) {
    const FevdMatrix fevd = gfevd(fit, o.horizon);
    io::write_fevd_csv(run.file("fevd.csv"), fevd);
    io::write_json(run.file("fevd.json"), io::to_json(fevd));
    io::write_json(run.file("connectedness.json"), io::to_json(connectedness(fevd), fevd.assets));
    run.write_graph("spillover", spillover_network(fevd, mode));
  } else {
    run.flag("full-sample VAR is not stable (spectral radius " + io::format_double(fit.spectral_radius) + ")");
  }
  if (o.window > 0) {
    const auto series = rolling_spillover(r, o.lags, o.horizon, o.window, o.step, common.threads);
    std::size_t missing = 0;
    for (const auto& p : series) missing += p.missing ? 1 : 0;
    if (missing > 0) run.flag(std::to_string(missing) + " rolling windows had an unstable VAR");
    io::write_spillover_csv(run.file("spillover_series.csv"), series);
  }
  return run.flagged() ? kExitNumerical : kExitOk;
}

struct GenerateOptions {
  std::string model = "two-block";
  Eigen::Index n = 10;
  Eigen::Index t = 500;
  double within = 0.7;
  double between = 0.1;
  double rho = 0.3;
  double student_df = 0.0;
};

int cmd_generate(Run& run, const GenerateOptions& o) {
  const std::uint64_t seed = run.require_seed();
  require(o.n >= 1 && o.t >= 2, "--n must be >= 1 and --t >= 2");
  ReturnsPanel r;
  LabelMap labels;
  const auto name = [](Eigen::Index i) { return "A" + std::to_string(i); };
  if (o.model == "two-block") {
    const int first = static_cast<int>(o.n / 2);
    const std::vector<int> sizes{first, static_cast<int>(o.n) - first};
    r = gaussian_panel(block_correlation(sizes, o.within, o.between), o.t, seed, 0.01, o.student_df);
    const auto block = block_labels(sizes);
    for (Eigen::Index i = 0; i < o.n; ++i) {
      labels[name(i)] = {"S" + std::to_string(block[static_cast<std::size_t>(i)]), i % 2 == 0 ? "US" : "UK"};
    }
  } else if (o.model == "equicorrelation") {
    r = gaussian_panel(equicorrelation(o.n, o.rho), o.t, seed, 0.01, o.student_df);
  } else if (o.model == "single-index") {
    Eigen::VectorXd betas(o.n);
    for (Eigen::Index i = 0; i < o.n; ++i) betas(i) = o.n == 1 ? 1.0 : 0.5 + static_cast<double>(i) / static_cast<double>(o.n - 1);
    r = single_index_panel(betas, o.t, seed);
  } else if (o.model == "garch") {
    r = garch_panel(o.n, GarchParams{2e-6, {0.10}, {0.85}}, o.t, seed);
  } else if (o.model == "dcc") {
    r = dcc_panel(equicorrelation(o.n, o.rho), 0.05, 0.90, GarchParams{2e-6, {0.10}, {0.85}}, o.t, seed);
  } else if (o.model == "var") {
    Eigen::MatrixXd a = 0.3 * Eigen::MatrixXd::Identity(o.n, o.n);
    for (Eigen::Index i = 1; i < o.n; ++i) a(i, 0) = 0.2;
    r = var_panel({a}, Eigen::VectorXd::Zero(o.n), 1e-4 * Eigen::MatrixXd::Identity(o.n, o.n), o.t, seed);
  } else {
    throw ValidationError("unknown --model " + o.model);
  }
  io::write_price_csv(run.file("prices.csv"), prices_from_returns(r));
  if (!labels.empty()) io::write_labels_csv(run.file("labels.csv"), labels);
  return kExitOk;
}

// Option values as recorded in the manifest, excluding the output directory.
Json collect_options(const CLI::App& app, const CLI::App& sub) {
  Json j = Json::object();
  const auto add = [&](const CLI::App& a, const std::string& prefix) {
    for (const CLI::Option* opt : a.get_options()) {
      const std::string name = opt->get_name(false, true);
      if (name.empty() || name.find("--help") != std::string::npos || name == "--version" || name == "--out" ||
          name == "--config") {
        continue;
      }
      std::string value;
      if (opt->count() > 0) {
        for (const auto& v : opt->results()) value += (value.empty() ? "" : " ") + v;
      } else {
        value = opt->get_default_str();
      }
      j[prefix + name] = value;
    }
  };
  add(app, "");
  add(sub, sub.get_name() + " ");
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Filtered dependency networks from asset price panels"};
  app.set_version_flag("--version", FINNET_VERSION);
  app.set_config("--config", "", "Key-value configuration file (TOML subset; [subcommand] sections)");
  app.require_subcommand(1);
  app.fallthrough();

  Common common;
  app.add_option("--out", common.out, "Output directory")->required();
  app.add_option("--seed", common.seed, "Seed for stochastic stages");
  app.add_option("--threads", common.threads, "Worker threads")->capture_default_str()->check(CLI::Range(1u, 1024u));

  const auto add_input = [&](CLI::App* sub) {
    sub->add_option("--prices", common.prices, "Price CSV (date column, one column per asset)")->check(CLI::ExistingFile);
    sub->add_option("--labels", common.labels, "Sidecar CSV asset,sector,country")->check(CLI::ExistingFile);
    sub->add_flag("--fill", common.fill, "Forward-fill missing prices and flag the affected returns");
  };

  std::function<int(Run&)> action;

  ReturnsOptions ro;
  auto* returns = app.add_subcommand("returns", "Log returns, autocorrelations, CCDF and tail exponent");
  add_input(returns);
  returns->add_option("--max-lag", ro.max_lag)->capture_default_str();
  returns->callback([&] { action = [&](Run& run) { return cmd_returns(run, ro); }; });

  CorrOptions co;
  auto* corr = app.add_subcommand("corr", "Dependency matrix, distance, histogram and significance band");
  add_input(corr);
  corr->add_option("--method", co.method, "pearson | spearman | covariance")->capture_default_str();
  corr->add_option("--window", co.window, "Window length (default: whole sample)");
  corr->add_option("--theta", co.theta, "Exponential weighting time scale");
  corr->add_option("--step", co.step, "Rolling window step (0: no rolling output)")->capture_default_str();
  corr->add_option("--band", co.band, "none | parametric | permutation")->capture_default_str();
  corr->add_option("--alpha", co.alpha)->capture_default_str();
  corr->add_option("--draws", co.draws, "Permutation draws")->capture_default_str();
  corr->add_option("--bins", co.bins)->capture_default_str();
  corr->add_option("--threshold-quantile", co.threshold_quantile, "Also write the threshold graph at this quantile");
  corr->callback([&] { action = [&](Run& run) { return cmd_corr(run, co, common); }; });

  SpectrumOptions so;
  auto* spectrum = app.add_subcommand("spectrum", "Eigenvalues against the Marchenko-Pastur law");
  add_input(spectrum);
  spectrum->add_option("--bins", so.bins)->capture_default_str();
  spectrum->add_option("--sigma-r", so.sigma_r)->capture_default_str();
  spectrum->add_option("--grid", so.grid, "Density grid points")->capture_default_str()->check(CLI::Range(2, 100000));
  spectrum->callback([&] { action = [&](Run& run) { return cmd_spectrum(run, so); }; });

  auto* mst_cmd = app.add_subcommand("mst", "Minimum spanning tree of the correlation distance");
  add_input(mst_cmd);
  mst_cmd->callback([&] { action = [&](Run& run) { return cmd_tree(run, false); }; });

  auto* pmfg_cmd = app.add_subcommand("pmfg", "Planar maximally filtered graph");
  add_input(pmfg_cmd);
  pmfg_cmd->callback([&] { action = [&](Run& run) { return cmd_tree(run, true); }; });

  auto* dbht_cmd = app.add_subcommand("dbht", "DBHT clustering of the PMFG");
  add_input(dbht_cmd);
  dbht_cmd->callback([&] { action = [&](Run& run) { return cmd_dbht(run); }; });

  ClusterOptions clo;
  auto* cluster = app.add_subcommand("cluster", "Agglomerative dendrogram and optional cut");
  add_input(cluster);
  cluster->add_option("--linkage", clo.linkage, "single | average")->capture_default_str();
  cluster->add_option("--cut", clo.cut, "Cut height for the cluster assignment");
  cluster->callback([&] { action = [&](Run& run) { return cmd_cluster(run, clo); }; });

  GarchOptions go;
  auto* garch = app.add_subcommand("garch", "GARCH(p, q) per asset and de-garched returns");
  add_input(garch);
  garch->add_option("--p", go.p)->capture_default_str();
  garch->add_option("--q", go.q)->capture_default_str();
  garch->add_option("--max-lag", go.max_lag)->capture_default_str();
  garch->callback([&] { action = [&](Run& run) { return cmd_garch(run, go, common); }; });

  DccOptions dco;
  auto* dcc = app.add_subcommand("dcc", "Scalar DCC conditional correlations");
  add_input(dcc);
  dcc->add_option("--average", dco.average, "Trailing average length for plotting")->capture_default_str()->check(CLI::PositiveNumber);
  dcc->callback([&] { action = [&](Run& run) { return cmd_dcc(run, dco, common); }; });

  NetOptions gno;
  auto* granger = app.add_subcommand("granger-net", "Granger causality network on de-garched returns");
  add_input(granger);
  granger->add_option("--alpha", gno.level, "Significance level")->capture_default_str();
  granger->add_flag("--prefiltered", gno.prefiltered, "Input returns are already de-garched");
  granger->add_flag("--aggregate", gno.aggregate, "Also write the (country, sector) aggregate");
  granger->callback([&] { action = [&](Run& run) { return cmd_granger(run, gno, common); }; });

  NetOptions pno;
  auto* pair = app.add_subcommand("pair-net", "Robust pairwise regression network");
  add_input(pair);
  pair->add_option("--gamma", pno.level, "Significance level")->capture_default_str();
  pair->add_option("--rule", pno.rule, "either | both")->capture_default_str();
  pair->add_option("--nu", pno.nu, "Student-t degrees of freedom of the M-estimator")->capture_default_str();
  pair->add_flag("--prefiltered", pno.prefiltered, "Input returns are already de-garched");
  pair->add_flag("--aggregate", pno.aggregate, "Also write the (country, sector) aggregate");
  pair->callback([&] { action = [&](Run& run) { return cmd_pair(run, pno, common); }; });

  SpilloverOptions spo;
  auto* spill = app.add_subcommand("spillover", "VAR generalized FEVD spillover network and connectedness");
  add_input(spill);
  spill->add_option("--lags", spo.lags)->capture_default_str();
  spill->add_option("--horizon", spo.horizon)->capture_default_str();
  spill->add_option("--window", spo.window, "Rolling window (0: full sample only)")->capture_default_str();
  spill->add_option("--step", spo.step)->capture_default_str();
  spill->add_option("--diagonal", spo.diagonal, "own-share | from-sum")->capture_default_str();
  spill->add_option("--series", spo.series, "returns | volatility (log GARCH volatility)")->capture_default_str();
  spill->callback([&] { action = [&](Run& run) { return cmd_spillover(run, spo, common); }; });

  GenerateOptions geo;
  auto* generate = app.add_subcommand("generate", "Synthetic price panel with known structure");
  generate->add_option("--model", geo.model, "two-block | equicorrelation | single-index | garch | dcc | var")->capture_default_str();
  generate->add_option("--n", geo.n)->capture_default_str();
  generate->add_option("--t", geo.t, "Number of returns")->capture_default_str();
  generate->add_option("--within", geo.within)->capture_default_str();
  generate->add_option("--between", geo.between)->capture_default_str();
  generate->add_option("--rho", geo.rho)->capture_default_str();
  generate->add_option("--student-df", geo.student_df, "Student-t shocks (0: Gaussian)")->capture_default_str();
  generate->callback([&] { action = [&](Run& run) { return cmd_generate(run, geo); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  const CLI::App* sub = app.get_subcommands().front();
  Run run(sub->get_name(), common);
  const Json options = collect_options(app, *sub);
  try {
    fs::create_directories(common.out);
    const int code = action(run);
    run.write_manifest(options, code == kExitOk ? "ok" : "flagged");
    return code;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    try {
      run.write_manifest(options, std::string("numerical error: ") + e.what());
    } catch (const std::exception&) {
    }
    return kExitNumerical;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
}
