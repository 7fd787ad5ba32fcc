#pragma once

#include <Eigen/Dense>

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace finnet {

enum class Provenance { threshold, mst, pmfg, fevd, regression, aggregate };

const char* to_string(Provenance p);

struct Edge {
  int source = 0;
  int target = 0;
  double weight = 0.0;
  /// Regression-based edges carry their p-value.
  std::optional<double> p_value;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Node/edge set produced by one of the filters. Nodes are indices into
/// `nodes`; undirected edges are stored with source < target.
struct FilteredGraph {
  std::vector<std::string> nodes;
  std::vector<Edge> edges;
  bool directed = false;
  Provenance provenance = Provenance::threshold;
  int genus = 0;
  /// Optional per-node weight (e.g. the FEVD diagonal); never a self-loop.
  std::vector<double> node_weights;

  [[nodiscard]] std::size_t n_nodes() const { return nodes.size(); }
  [[nodiscard]] std::size_t n_edges() const { return edges.size(); }
  [[nodiscard]] bool has_edge(int a, int b) const;
  /// Dense adjacency with edge weights (symmetric for undirected graphs).
  [[nodiscard]] Eigen::MatrixXd adjacency() const;
  /// Neighbour lists, ignoring direction.
  [[nodiscard]] std::vector<std::vector<int>> neighbours() const;
  /// Sizes of connected components (direction ignored), descending.
  [[nodiscard]] std::vector<std::size_t> component_sizes() const;
  /// Throws ValidationError when self-loops, duplicate or out-of-range edges exist.
  void validate() const;
};

enum class Linkage { single, average };

const char* to_string(Linkage l);

/// One agglomeration step. Leaves are 0..N-1; step k creates cluster N+k.
struct Merge {
  int a = 0;
  int b = 0;
  double height = 0.0;
  int id = 0;
  int size = 0;
};

struct Dendrogram {
  std::vector<std::string> leaves;
  std::vector<Merge> merges;
  Linkage linkage = Linkage::average;
};

enum class ClusterMethod { dendrogram_cut, dbht };

/// Total partition of the assets; ids are 0..n_clusters-1, numbered in
/// order of each cluster's first asset.
struct Clustering {
  std::vector<std::string> assets;
  std::vector<int> assignment;
  int n_clusters = 0;
  ClusterMethod method = ClusterMethod::dendrogram_cut;

  [[nodiscard]] std::vector<std::vector<int>> members() const;
};

/// Relabels cluster ids by first appearance; returns the cluster count.
int canonicalize_labels(std::vector<int>& assignment);

}  // namespace finnet
