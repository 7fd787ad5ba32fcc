#include "finnet/graph.hpp"

#include "finnet/error.hpp"

#include <algorithm>
#include <functional>
#include <set>

namespace finnet {

const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::threshold: return "threshold";
    case Provenance::mst: return "mst";
    case Provenance::pmfg: return "pmfg";
    case Provenance::fevd: return "fevd";
    case Provenance::regression: return "regression";
    case Provenance::aggregate: return "aggregate";
  }
  return "unknown";
}

const char* to_string(Linkage l) { return l == Linkage::single ? "single" : "average"; }

bool FilteredGraph::has_edge(int a, int b) const {
  return std::any_of(edges.begin(), edges.end(), [&](const Edge& e) {
    return (e.source == a && e.target == b) || (!directed && e.source == b && e.target == a);
  });
}

Eigen::MatrixXd FilteredGraph::adjacency() const {
  const auto n = static_cast<Eigen::Index>(nodes.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (const auto& e : edges) {
    a(e.source, e.target) = e.weight;
    if (!directed) a(e.target, e.source) = e.weight;
  }
  return a;
}

std::vector<std::vector<int>> FilteredGraph::neighbours() const {
  std::vector<std::vector<int>> adj(nodes.size());
  for (const auto& e : edges) {
    adj[static_cast<std::size_t>(e.source)].push_back(e.target);
    adj[static_cast<std::size_t>(e.target)].push_back(e.source);
  }
  for (auto& list : adj) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
  return adj;
}

std::vector<std::size_t> FilteredGraph::component_sizes() const {
  const auto adj = neighbours();
  std::vector<bool> seen(nodes.size(), false);
  std::vector<std::size_t> sizes;
  for (std::size_t s = 0; s < nodes.size(); ++s) {
    if (seen[s]) continue;
    std::size_t count = 0;
    std::vector<int> stack{static_cast<int>(s)};
    seen[s] = true;
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      ++count;
      for (int w : adj[static_cast<std::size_t>(v)]) {
        if (!seen[static_cast<std::size_t>(w)]) {
          seen[static_cast<std::size_t>(w)] = true;
          stack.push_back(w);
        }
      }
    }
    sizes.push_back(count);
  }
  std::sort(sizes.begin(), sizes.end(), std::greater<>());
  return sizes;
}

void FilteredGraph::validate() const {
  const auto n = static_cast<int>(nodes.size());
  std::set<std::pair<int, int>> seen;
  for (const auto& e : edges) {
    require(e.source >= 0 && e.source < n && e.target >= 0 && e.target < n, "graph edge index out of range");
    require(e.source != e.target, "graph contains a self-loop at " + nodes[static_cast<std::size_t>(e.source)]);
    const std::pair<int, int> key = directed ? std::pair{e.source, e.target} : std::pair{std::min(e.source, e.target), std::max(e.source, e.target)};
    require(seen.insert(key).second, "graph contains a duplicate edge");
  }
  require(node_weights.empty() || node_weights.size() == nodes.size(), "node weight count mismatch");
}

std::vector<std::vector<int>> Clustering::members() const {
  std::vector<std::vector<int>> out(static_cast<std::size_t>(n_clusters));
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    out[static_cast<std::size_t>(assignment[i])].push_back(static_cast<int>(i));
  }
  return out;
}

int canonicalize_labels(std::vector<int>& assignment) {
  std::vector<std::pair<int, int>> remap;
  int next = 0;
  for (int& label : assignment) {
    auto it = std::find_if(remap.begin(), remap.end(), [&](const auto& p) { return p.first == label; });
    if (it == remap.end()) {
      remap.emplace_back(label, next);
      label = next++;
    } else {
      label = it->second;
    }
  }
  return next;
}

}  // namespace finnet
