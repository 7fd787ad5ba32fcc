#pragma once

#include <utility>
#include <vector>

namespace finnet {

/// Planarity test for simple undirected graphs on vertices 0..n-1 using
/// the left-right criterion (de Fraysseix-Rosenstiehl, in the linear-time
/// formulation of Brandes). Runs in O(n + m).
bool is_planar(int n, const std::vector<std::pair<int, int>>& edges);

/// Graph under incremental construction: edges are only kept when the
/// graph stays planar.
class PlanarGraphBuilder {
 public:
  explicit PlanarGraphBuilder(int n) : n_(n) {}

  /// Adds {a, b} if the result is planar; returns whether it was added.
  bool try_add(int a, int b);

  [[nodiscard]] const std::vector<std::pair<int, int>>& edges() const { return edges_; }
  [[nodiscard]] int n_vertices() const { return n_; }

 private:
  int n_;
  std::vector<std::pair<int, int>> edges_;
};

}  // namespace finnet
