// Directed bubble hierarchical tree (DBHT) clustering on the PMFG.
//
// Design notes for the sub-steps:
//
//  * Weights. The correlation is recovered as C_ij = 1 - d_ij^2 / 2. PMFG
//    edges carry the similarity s_ij = 1 + C_ij, which is non-negative.
//  * Bubble tree. The PMFG is split recursively along separating
//    triangles (3-cliques whose removal disconnects the graph). Triangles
//    are visited in lexicographic order and the first separating one is
//    used; each side plus the triangle is decomposed further. A piece with
//    no separating triangle is a bubble. The two bubbles that contain the
//    triangle on either side are joined by a tree link.
//  * Direction. Removing a link splits the tree, and so the vertices
//    outside the separator, into two sides. The link points towards the
//    side holding the larger total correlation with the separator,
//    sum over u in separator, v in side of C_uv. Ties point to `a`.
//    Summing only over PMFG edges follows the graph more closely but splits
//    homogeneous blocks into several converging bubbles far more often; a
//    side with few members wins only if its internal correlation mass
//    outweighs the pull of the rest.
//  * Clusters. Bubbles without outgoing links are converging bubbles;
//    each one seeds a cluster.
//  * Assignment, stage one. A vertex lying in at least one converging
//    bubble joins the converging bubble it is most attached to, measured
//    as the sum of its edge similarities inside the bubble divided by the
//    bubble's edge count. Ties go to the lower bubble index.
//  * Assignment, stage two. Every other vertex considers the converging
//    bubbles reachable along directed links from any bubble containing it
//    and joins the one whose stage-one members are closest on average in
//    d_ij. Path lengths along the PMFG were not used: they count hops more
//    than distances and pull separator vertices across block borders.

#include "finnet/filtergraph.hpp"

#include "finnet/error.hpp"

#include <algorithm>
#include <limits>

namespace finnet {

namespace {

using Adjacency = std::vector<std::vector<char>>;

class BubbleSplitter {
 public:
  BubbleSplitter(int n, const std::vector<std::vector<int>>& neighbours)
      : n_(n), neighbours_(neighbours), adjacent_(static_cast<std::size_t>(n), std::vector<char>(static_cast<std::size_t>(n), 0)) {
    for (int v = 0; v < n; ++v) {
      for (int w : neighbours[at(v)]) adjacent_[at(v)][at(w)] = 1;
    }
  }

  BubbleTree run() {
    std::vector<int> all(static_cast<std::size_t>(n_));
    for (int v = 0; v < n_; ++v) all[at(v)] = v;
    split(all);
    return std::move(tree_);
  }

 private:
  static std::size_t at(int i) { return static_cast<std::size_t>(i); }

  // Decomposes the induced subgraph on `vs` (sorted); returns the indices
  // of the bubbles it produced.
  std::vector<int> split(const std::vector<int>& vs) {
    std::vector<char> inside(at(n_), 0);
    for (int v : vs) inside[at(v)] = 1;

    for (int u : vs) {
      for (int v : neighbours_[at(u)]) {
        if (v <= u || !inside[at(v)]) continue;
        for (int w : neighbours_[at(u)]) {
          if (w <= v || !inside[at(w)] || !adjacent_[at(v)][at(w)]) continue;
          auto parts = components_without(vs, inside, {u, v, w});
          if (parts.size() < 2) continue;
          return split_along({u, v, w}, parts);
        }
      }
    }
    tree_.bubbles.push_back(vs);
    return {static_cast<int>(tree_.bubbles.size()) - 1};
  }

  std::vector<int> split_along(const std::array<int, 3>& t, const std::vector<std::vector<int>>& parts) {
    std::vector<int> produced;
    int first_holder = -1;
    for (std::size_t k = 0; k < parts.size(); ++k) {
      std::vector<int> piece = parts[k];
      piece.insert(piece.end(), t.begin(), t.end());
      std::sort(piece.begin(), piece.end());
      const auto made = split(piece);
      const int holder = bubble_with(made, t);
      if (k == 0) {
        first_holder = holder;
      } else {
        tree_.links.push_back({first_holder, holder, t});
      }
      produced.insert(produced.end(), made.begin(), made.end());
    }
    return produced;
  }

  int bubble_with(const std::vector<int>& candidates, const std::array<int, 3>& t) const {
    for (int b : candidates) {
      const auto& vs = tree_.bubbles[at(b)];
      if (std::all_of(t.begin(), t.end(), [&](int v) { return std::binary_search(vs.begin(), vs.end(), v); })) {
        return b;
      }
    }
    throw NumericalError("bubble tree: separator not found in any bubble");
  }

  // Connected components of vs \ t, each sorted, ordered by first vertex.
  std::vector<std::vector<int>> components_without(const std::vector<int>& vs, const std::vector<char>& inside,
                                                   const std::array<int, 3>& t) const {
    std::vector<char> seen(at(n_), 0);
    for (int v : t) seen[at(v)] = 1;
    std::vector<std::vector<int>> parts;
    std::vector<int> stack;
    for (int s : vs) {
      if (seen[at(s)]) continue;
      std::vector<int> part;
      seen[at(s)] = 1;
      stack.push_back(s);
      while (!stack.empty()) {
        const int v = stack.back();
        stack.pop_back();
        part.push_back(v);
        for (int w : neighbours_[at(v)]) {
          if (inside[at(w)] && !seen[at(w)]) {
            seen[at(w)] = 1;
            stack.push_back(w);
          }
        }
      }
      std::sort(part.begin(), part.end());
      parts.push_back(std::move(part));
    }
    return parts;
  }

  int n_;
  const std::vector<std::vector<int>>& neighbours_;
  Adjacency adjacent_;
  BubbleTree tree_;
};

// Bubbles on each side of link `k`: side[b] is 0 for a's side, 1 for b's.
std::vector<int> sides_of_link(const BubbleTree& tree, std::size_t k) {
  const std::size_t nb = tree.bubbles.size();
  std::vector<std::vector<int>> adj(nb);
  for (std::size_t l = 0; l < tree.links.size(); ++l) {
    if (l == k) continue;
    adj[static_cast<std::size_t>(tree.links[l].a)].push_back(tree.links[l].b);
    adj[static_cast<std::size_t>(tree.links[l].b)].push_back(tree.links[l].a);
  }
  std::vector<int> side(nb, 0);
  std::vector<int> stack{tree.links[k].b};
  side[static_cast<std::size_t>(tree.links[k].b)] = 1;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (int w : adj[static_cast<std::size_t>(v)]) {
      if (side[static_cast<std::size_t>(w)] == 0) {
        side[static_cast<std::size_t>(w)] = 1;
        stack.push_back(w);
      }
    }
  }
  return side;
}

}  // namespace

BubbleTree bubble_tree(int n, const std::vector<std::vector<int>>& neighbours) {
  require(n >= 3, "bubble tree needs at least three vertices");
  require(static_cast<int>(neighbours.size()) == n, "neighbour list size mismatch");
  BubbleSplitter splitter(n, neighbours);
  return splitter.run();
}

DbhtResult dbht_detailed(const DependencyMatrix& dist) {
  DbhtResult out;
  out.pmfg = pmfg(dist);
  const auto n = static_cast<int>(dist.size());
  const auto nn = static_cast<std::size_t>(n);
  const auto neighbours = out.pmfg.neighbours();
  out.tree = bubble_tree(n, neighbours);
  BubbleTree& tree = out.tree;

  // Correlation implied by the distance, and its PMFG-filtered similarity.
  const Eigen::MatrixXd corr = 1.0 - dist.values.array().square() / 2.0;
  Eigen::MatrixXd sim = Eigen::MatrixXd::Zero(n, n);
  for (const auto& e : out.pmfg.edges) {
    sim(e.source, e.target) = 1.0 + corr(e.source, e.target);
    sim(e.target, e.source) = sim(e.source, e.target);
  }

  // Link directions.
  const std::size_t nb = tree.bubbles.size();
  tree.points_to_b.assign(tree.links.size(), false);
  for (std::size_t k = 0; k < tree.links.size(); ++k) {
    const auto& link = tree.links[k];
    const auto side = sides_of_link(tree, k);
    std::vector<int> vertex_side(nn, -1);
    for (std::size_t b = 0; b < nb; ++b) {
      for (int v : tree.bubbles[b]) vertex_side[static_cast<std::size_t>(v)] = side[b];
    }
    for (int v : link.separator) vertex_side[static_cast<std::size_t>(v)] = -1;
    double strength[2] = {0.0, 0.0};
    for (int v = 0; v < n; ++v) {
      const int s = vertex_side[static_cast<std::size_t>(v)];
      if (s < 0) continue;
      for (int u : link.separator) strength[s] += corr(u, v);
    }
    tree.points_to_b[k] = strength[1] > strength[0];
  }

  // Converging bubbles and the bubbles that drain into each of them.
  std::vector<std::vector<int>> out_links(nb);
  std::vector<std::vector<int>> in_links(nb);
  for (std::size_t k = 0; k < tree.links.size(); ++k) {
    int from = tree.links[k].a;
    int to = tree.links[k].b;
    if (!tree.points_to_b[k]) std::swap(from, to);
    out_links[static_cast<std::size_t>(from)].push_back(to);
    in_links[static_cast<std::size_t>(to)].push_back(from);
  }
  tree.converging.clear();
  for (std::size_t b = 0; b < nb; ++b) {
    if (out_links[b].empty()) tree.converging.push_back(static_cast<int>(b));
  }
  const std::size_t nc = tree.converging.size();
  // reaches[b][c]: converging bubble c is reachable from bubble b.
  std::vector<std::vector<char>> reaches(nb, std::vector<char>(nc, 0));
  for (std::size_t c = 0; c < nc; ++c) {
    std::vector<int> stack{tree.converging[c]};
    reaches[static_cast<std::size_t>(tree.converging[c])][c] = 1;
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      for (int w : in_links[static_cast<std::size_t>(v)]) {
        if (!reaches[static_cast<std::size_t>(w)][c]) {
          reaches[static_cast<std::size_t>(w)][c] = 1;
          stack.push_back(w);
        }
      }
    }
  }

  // Stage one: vertices of converging bubbles.
  std::vector<int> cluster(nn, -1);
  for (int v = 0; v < n; ++v) {
    double best = -1.0;
    for (std::size_t c = 0; c < nc; ++c) {
      const auto& vs = tree.bubbles[static_cast<std::size_t>(tree.converging[c])];
      if (!std::binary_search(vs.begin(), vs.end(), v)) continue;
      const double edges = 3.0 * (static_cast<double>(vs.size()) - 2.0);
      double total = 0.0;
      for (int u : vs) total += sim(v, u);
      const double attachment = total / edges;
      if (attachment > best) {
        best = attachment;
        cluster[static_cast<std::size_t>(v)] = static_cast<int>(c);
      }
    }
  }

  // Stage two: remaining vertices by mean distance to the stage-one members.
  std::vector<std::vector<int>> seeds(nc);
  for (int v = 0; v < n; ++v) {
    const int c = cluster[static_cast<std::size_t>(v)];
    if (c >= 0) seeds[static_cast<std::size_t>(c)].push_back(v);
  }
  std::vector<int> final_cluster = cluster;
  for (int v = 0; v < n; ++v) {
    if (cluster[static_cast<std::size_t>(v)] >= 0) continue;
    std::vector<char> candidate(nc, 0);
    for (std::size_t b = 0; b < nb; ++b) {
      const auto& vs = tree.bubbles[b];
      if (!std::binary_search(vs.begin(), vs.end(), v)) continue;
      for (std::size_t c = 0; c < nc; ++c) {
        if (reaches[b][c] && !seeds[c].empty()) candidate[c] = 1;
      }
    }
    if (std::none_of(candidate.begin(), candidate.end(), [](char x) { return x != 0; })) {
      for (std::size_t c = 0; c < nc; ++c) candidate[c] = static_cast<char>(!seeds[c].empty());
    }
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < nc; ++c) {
      if (!candidate[c]) continue;
      double total = 0.0;
      for (int u : seeds[c]) total += dist.values(v, u);
      const double mean = total / static_cast<double>(seeds[c].size());
      if (mean < best) {
        best = mean;
        final_cluster[static_cast<std::size_t>(v)] = static_cast<int>(c);
      }
    }
  }

  Clustering& result = out.clustering;
  result.assets = dist.assets;
  result.method = ClusterMethod::dbht;
  result.assignment = std::move(final_cluster);
  result.n_clusters = canonicalize_labels(result.assignment);
  return out;
}

Clustering dbht(const DependencyMatrix& dist) { return dbht_detailed(dist).clustering; }

}  // namespace finnet
