#include "finnet/filtergraph.hpp"

#include "finnet/error.hpp"
#include "finnet/planarity.hpp"
#include "finnet/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <set>

namespace finnet {

namespace {

struct Pair {
  double d;
  int i;
  int j;
};

// All pairs i < j ordered by (distance, i, j).
std::vector<Pair> sorted_pairs(const DependencyMatrix& dist) {
  const auto n = static_cast<int>(dist.size());
  std::vector<Pair> pairs;
  pairs.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(std::max(n - 1, 0)) / 2);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double d = dist.values(i, j);
      if (std::isnan(d)) throw ValidationError("distance matrix contains NaN");
      pairs.push_back({d, i, j});
    }
  }
  std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
    if (a.d != b.d) return a.d < b.d;
    if (a.i != b.i) return a.i < b.i;
    return a.j < b.j;
  });
  return pairs;
}

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  int find(int x) {
    while (parent_[idx(x)] != x) {
      parent_[idx(x)] = parent_[idx(parent_[idx(x)])];
      x = parent_[idx(x)];
    }
    return x;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (b < a) std::swap(a, b);
    parent_[idx(b)] = a;
    return true;
  }

 private:
  static std::size_t idx(int i) { return static_cast<std::size_t>(i); }
  std::vector<int> parent_;
};

void require_distance(const DependencyMatrix& dist) {
  require(dist.kind == MatrixKind::distance, "expected a distance matrix");
  require(dist.values.rows() == dist.values.cols(), "distance matrix must be square");
}

}  // namespace

FilteredGraph threshold_graph(const DependencyMatrix& corr, const Threshold& threshold) {
  require(corr.kind == MatrixKind::correlation, "threshold_graph expects a correlation matrix");
  const auto n = static_cast<int>(corr.size());
  double cut = 0.0;
  if (const auto* abs = std::get_if<AbsoluteThreshold>(&threshold)) {
    cut = abs->value;
  } else {
    const double q = std::get<QuantileThreshold>(threshold).q;
    require(q > 0.0 && q < 1.0, "threshold quantile must lie in (0, 1)");
    require(n >= 2, "threshold quantile needs at least two assets");
    std::vector<double> off;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) off.push_back(corr.values(i, j));
    }
    cut = quantile(std::move(off), q);
  }
  FilteredGraph g;
  g.nodes = corr.assets;
  g.provenance = Provenance::threshold;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double c = corr.values(i, j);
      if (c > cut) g.edges.push_back({i, j, std::abs(c), std::nullopt});
    }
  }
  return g;
}

FilteredGraph mst(const DependencyMatrix& dist) {
  require_distance(dist);
  const auto n = static_cast<int>(dist.size());
  FilteredGraph g;
  g.nodes = dist.assets;
  g.provenance = Provenance::mst;
  DisjointSets sets(static_cast<std::size_t>(n));
  for (const auto& p : sorted_pairs(dist)) {
    if (sets.unite(p.i, p.j)) {
      g.edges.push_back({p.i, p.j, p.d, std::nullopt});
      if (static_cast<int>(g.edges.size()) == n - 1) break;
    }
  }
  return g;
}

FilteredGraph pmfg(const DependencyMatrix& dist) {
  require_distance(dist);
  const auto n = static_cast<int>(dist.size());
  require(n >= 3, "pmfg needs at least three assets");
  const std::size_t target = 3 * static_cast<std::size_t>(n - 2);
  FilteredGraph g;
  g.nodes = dist.assets;
  g.provenance = Provenance::pmfg;
  g.genus = 0;
  PlanarGraphBuilder builder(n);
  DisjointSets sets(static_cast<std::size_t>(n));
  for (const auto& p : sorted_pairs(dist)) {
    // Joining two components keeps a planar graph planar.
    bool added = false;
    if (sets.find(p.i) != sets.find(p.j)) {
      sets.unite(p.i, p.j);
      added = true;
      builder.try_add(p.i, p.j);
    } else {
      added = builder.try_add(p.i, p.j);
    }
    if (added) {
      g.edges.push_back({p.i, p.j, p.d, std::nullopt});
      if (g.edges.size() == target) break;
    }
  }
  return g;
}

Dendrogram hierarchical(const DependencyMatrix& dist, Linkage linkage) {
  require_distance(dist);
  const auto n = static_cast<int>(dist.size());
  require(n >= 1, "hierarchical clustering needs at least one asset");
  Dendrogram out;
  out.leaves = dist.assets;
  out.linkage = linkage;

  // Slot s holds the cluster whose smallest leaf is s.
  Eigen::MatrixXd d = dist.values;
  std::vector<bool> active(static_cast<std::size_t>(n), true);
  std::vector<int> cluster_id(static_cast<std::size_t>(n));
  std::vector<int> size(static_cast<std::size_t>(n), 1);
  std::iota(cluster_id.begin(), cluster_id.end(), 0);

  for (int step = 0; step < n - 1; ++step) {
    int best_a = -1;
    int best_b = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int a = 0; a < n; ++a) {
      if (!active[static_cast<std::size_t>(a)]) continue;
      for (int b = a + 1; b < n; ++b) {
        if (!active[static_cast<std::size_t>(b)]) continue;
        if (best_a < 0 || d(a, b) < best) {
          best = d(a, b);
          best_a = a;
          best_b = b;
        }
      }
    }
    const auto sa = static_cast<std::size_t>(best_a);
    const auto sb = static_cast<std::size_t>(best_b);
    Merge m;
    m.a = std::min(cluster_id[sa], cluster_id[sb]);
    m.b = std::max(cluster_id[sa], cluster_id[sb]);
    m.height = best;
    m.id = n + step;
    m.size = size[sa] + size[sb];
    out.merges.push_back(m);

    for (int k = 0; k < n; ++k) {
      if (!active[static_cast<std::size_t>(k)] || k == best_a || k == best_b) continue;
      double merged = 0.0;
      if (linkage == Linkage::single) {
        merged = std::min(d(best_a, k), d(best_b, k));
      } else {
        merged = (size[sa] * d(best_a, k) + size[sb] * d(best_b, k)) / static_cast<double>(size[sa] + size[sb]);
      }
      d(best_a, k) = merged;
      d(k, best_a) = merged;
    }
    active[sb] = false;
    cluster_id[sa] = m.id;
    size[sa] = m.size;
  }
  return out;
}

Clustering cut_dendrogram(const Dendrogram& d, double height) {
  require(height >= 0.0, "cut height must be non-negative");
  const auto n = static_cast<int>(d.leaves.size());
  require(static_cast<int>(d.merges.size()) == std::max(n - 1, 0), "malformed dendrogram");
  DisjointSets sets(static_cast<std::size_t>(n));
  // Any leaf of each cluster id serves as its representative.
  std::vector<int> rep(static_cast<std::size_t>(2 * n), -1);
  for (int i = 0; i < n; ++i) rep[static_cast<std::size_t>(i)] = i;
  for (const auto& m : d.merges) {
    rep[static_cast<std::size_t>(m.id)] = rep[static_cast<std::size_t>(m.a)];
    if (m.height < height) sets.unite(rep[static_cast<std::size_t>(m.a)], rep[static_cast<std::size_t>(m.b)]);
  }
  Clustering c;
  c.assets = d.leaves;
  c.method = ClusterMethod::dendrogram_cut;
  c.assignment.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) c.assignment[static_cast<std::size_t>(i)] = sets.find(i);
  c.n_clusters = canonicalize_labels(c.assignment);
  return c;
}

Composition cluster_composition(const Clustering& c, const LabelMap& labels) {
  std::set<std::string> sector_set;
  std::vector<std::string> sector_of(c.assets.size());
  for (std::size_t i = 0; i < c.assets.size(); ++i) {
    const auto it = labels.find(c.assets[i]);
    if (it == labels.end()) throw ValidationError("missing sector label for asset " + c.assets[i]);
    sector_of[i] = it->second.sector;
    sector_set.insert(it->second.sector);
  }
  Composition out;
  out.sectors.assign(sector_set.begin(), sector_set.end());
  out.fractions.assign(static_cast<std::size_t>(c.n_clusters), std::vector<double>(out.sectors.size(), 0.0));
  std::vector<double> counts(static_cast<std::size_t>(c.n_clusters), 0.0);
  for (std::size_t i = 0; i < c.assets.size(); ++i) {
    const auto k = static_cast<std::size_t>(c.assignment[i]);
    const auto s = static_cast<std::size_t>(
        std::lower_bound(out.sectors.begin(), out.sectors.end(), sector_of[i]) - out.sectors.begin());
    out.fractions[k][s] += 1.0;
    counts[k] += 1.0;
  }
  for (std::size_t k = 0; k < out.fractions.size(); ++k) {
    for (double& f : out.fractions[k]) f /= counts[k];
  }
  return out;
}

}  // namespace finnet
