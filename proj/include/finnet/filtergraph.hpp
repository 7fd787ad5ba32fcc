#pragma once

// Topological filtering of dependency matrices: threshold graphs, the
// minimum spanning tree, the planar maximally filtered graph, agglomerative
// dendrograms and the DBHT clustering of the PMFG.

#include "finnet/correlation.hpp"
#include "finnet/graph.hpp"
#include "finnet/panel.hpp"

#include <array>
#include <map>
#include <string>
#include <variant>
#include <vector>

namespace finnet {

struct AbsoluteThreshold {
  double value = 0.0;
};

/// Threshold at the given quantile of the off-diagonal correlations.
struct QuantileThreshold {
  double q = 0.5;
};

using Threshold = std::variant<AbsoluteThreshold, QuantileThreshold>;

/// Edge (i, j) iff C_ij > threshold, weighted by |C_ij|.
FilteredGraph threshold_graph(const DependencyMatrix& corr, const Threshold& threshold);

/// Kruskal over all pairs sorted by (distance, min id, max id).
FilteredGraph mst(const DependencyMatrix& dist);

/// Pairs are visited in the same order as `mst` and kept when the graph
/// stays planar, until 3(N-2) edges are reached.
FilteredGraph pmfg(const DependencyMatrix& dist);

Dendrogram hierarchical(const DependencyMatrix& dist, Linkage linkage = Linkage::average);

/// Clusters are the components joined by merges with height < `height`.
Clustering cut_dendrogram(const Dendrogram& d, double height);

/// Intermediate structures of a DBHT run, exposed for inspection and tests.
struct BubbleTree {
  /// Vertex sets of the bubbles (sorted).
  std::vector<std::vector<int>> bubbles;
  /// Tree edges between bubbles; `separator` is the shared 3-clique.
  struct Link {
    int a = 0;
    int b = 0;
    std::array<int, 3> separator{};
  };
  std::vector<Link> links;
  /// Direction of each link: true when it points a -> b.
  std::vector<bool> points_to_b;
  /// Bubbles with no outgoing link.
  std::vector<int> converging;
};

struct DbhtResult {
  FilteredGraph pmfg;
  BubbleTree tree;
  Clustering clustering;
};

/// Directed bubble hierarchical tree clustering of the PMFG of `dist`.
DbhtResult dbht_detailed(const DependencyMatrix& dist);
Clustering dbht(const DependencyMatrix& dist);

/// Bubble decomposition of a maximal planar graph along its separating
/// triangles (undirected; no converging bubbles filled in).
BubbleTree bubble_tree(int n, const std::vector<std::vector<int>>& neighbours);

/// Per-cluster share of each sector label; each row sums to one.
struct Composition {
  std::vector<std::string> sectors;            // sorted
  std::vector<std::vector<double>> fractions;  // [cluster][sector]
};

Composition cluster_composition(const Clustering& c, const LabelMap& labels);

}  // namespace finnet
