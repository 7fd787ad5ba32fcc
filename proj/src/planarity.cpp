#include "finnet/planarity.hpp"

#include "finnet/error.hpp"

#include <algorithm>
#include <numeric>

namespace finnet {

namespace {

constexpr int kNone = -1;

struct Interval {
  int low = kNone;
  int high = kNone;
  [[nodiscard]] bool empty() const { return low == kNone && high == kNone; }
};

struct ConflictPair {
  Interval left;
  Interval right;
  void swap_sides() { std::swap(left, right); }
};

// State of one left-right planarity run. Every undirected edge is oriented
// exactly once by the first DFS, so oriented edges share the undirected
// edge index.
class LeftRightTest {
 public:
  LeftRightTest(int n, const std::vector<std::pair<int, int>>& edges)
      : n_(n),
        adj_(static_cast<std::size_t>(n)),
        src_(edges.size(), kNone),
        dst_(edges.size(), kNone),
        oriented_(edges.size(), false),
        height_(static_cast<std::size_t>(n), kNone),
        parent_edge_(static_cast<std::size_t>(n), kNone),
        lowpt_(edges.size(), 0),
        lowpt2_(edges.size(), 0),
        nesting_(edges.size(), 0),
        out_(static_cast<std::size_t>(n)),
        ref_(edges.size(), kNone),
        lowpt_edge_(edges.size(), kNone),
        stack_bottom_(edges.size(), 0) {
    for (std::size_t k = 0; k < edges.size(); ++k) {
      const auto [a, b] = edges[k];
      require(a >= 0 && a < n && b >= 0 && b < n && a != b, "planarity: invalid edge");
      adj_[static_cast<std::size_t>(a)].push_back({b, static_cast<int>(k)});
      adj_[static_cast<std::size_t>(b)].push_back({a, static_cast<int>(k)});
    }
  }

  bool run() {
    std::vector<int> roots;
    for (int v = 0; v < n_; ++v) {
      if (height_[idx(v)] == kNone) {
        height_[idx(v)] = 0;
        roots.push_back(v);
        orient(v);
      }
    }
    for (auto& list : out_) {
      std::stable_sort(list.begin(), list.end(), [&](int a, int b) { return nesting_[idx(a)] < nesting_[idx(b)]; });
    }
    for (int r : roots) {
      if (!test(r)) return false;
    }
    return true;
  }

 private:
  static std::size_t idx(int i) { return static_cast<std::size_t>(i); }

  void orient(int v) {
    const int e = parent_edge_[idx(v)];
    for (const auto& [w, id] : adj_[idx(v)]) {
      if (oriented_[idx(id)]) continue;
      oriented_[idx(id)] = true;
      src_[idx(id)] = v;
      dst_[idx(id)] = w;
      out_[idx(v)].push_back(id);
      lowpt_[idx(id)] = height_[idx(v)];
      lowpt2_[idx(id)] = height_[idx(v)];
      if (height_[idx(w)] == kNone) {  // tree edge
        parent_edge_[idx(w)] = id;
        height_[idx(w)] = height_[idx(v)] + 1;
        orient(w);
      } else {  // back edge
        lowpt_[idx(id)] = height_[idx(w)];
      }
      nesting_[idx(id)] = 2 * lowpt_[idx(id)];
      if (lowpt2_[idx(id)] < height_[idx(v)]) nesting_[idx(id)] += 1;  // chordal
      if (e != kNone) {
        const std::size_t pe = idx(e);
        const std::size_t ce = idx(id);
        if (lowpt_[ce] < lowpt_[pe]) {
          lowpt2_[pe] = std::min(lowpt_[pe], lowpt2_[ce]);
          lowpt_[pe] = lowpt_[ce];
        } else if (lowpt_[ce] > lowpt_[pe]) {
          lowpt2_[pe] = std::min(lowpt2_[pe], lowpt_[ce]);
        } else {
          lowpt2_[pe] = std::min(lowpt2_[pe], lowpt2_[ce]);
        }
      }
    }
  }

  [[nodiscard]] bool conflicting(const Interval& i, int b) const {
    return !i.empty() && i.high != kNone && lowpt_[idx(i.high)] > lowpt_[idx(b)];
  }

  [[nodiscard]] int lowest(const ConflictPair& p) const {
    if (p.left.empty()) return lowpt_[idx(p.right.low)];
    if (p.right.empty()) return lowpt_[idx(p.left.low)];
    return std::min(lowpt_[idx(p.left.low)], lowpt_[idx(p.right.low)]);
  }

  bool test(int v) {
    const int e = parent_edge_[idx(v)];
    const auto& outs = out_[idx(v)];
    for (std::size_t k = 0; k < outs.size(); ++k) {
      const int ei = outs[k];
      const int w = dst_[idx(ei)];
      stack_bottom_[idx(ei)] = stack_.size();
      if (ei == parent_edge_[idx(w)]) {
        if (!test(w)) return false;
      } else {
        lowpt_edge_[idx(ei)] = ei;
        stack_.push_back(ConflictPair{Interval{}, Interval{ei, ei}});
      }
      if (lowpt_[idx(ei)] < height_[idx(v)]) {  // ei has return edges
        if (k == 0) {
          lowpt_edge_[idx(e)] = lowpt_edge_[idx(ei)];
        } else if (!add_constraints(ei, e)) {
          return false;
        }
      }
    }
    if (e != kNone) remove_back_edges(e);
    return true;
  }

  bool add_constraints(int ei, int e) {
    ConflictPair p;
    // Merge return edges of ei into p.right.
    do {
      ConflictPair q = stack_.back();
      stack_.pop_back();
      if (!q.left.empty()) q.swap_sides();
      if (!q.left.empty()) return false;
      if (lowpt_[idx(q.right.low)] > lowpt_[idx(e)]) {
        if (p.right.empty()) {
          p.right = q.right;
        } else {
          ref_[idx(p.right.low)] = q.right.high;
        }
        p.right.low = q.right.low;
      } else {
        ref_[idx(q.right.low)] = lowpt_edge_[idx(e)];
      }
    } while (stack_.size() > stack_bottom_[idx(ei)]);

    // Merge conflicting return edges of earlier siblings into p.left.
    while (!stack_.empty() && (conflicting(stack_.back().left, ei) || conflicting(stack_.back().right, ei))) {
      ConflictPair q = stack_.back();
      stack_.pop_back();
      if (conflicting(q.right, ei)) q.swap_sides();
      if (conflicting(q.right, ei)) return false;
      if (p.right.low != kNone) ref_[idx(p.right.low)] = q.right.high;
      if (q.right.low != kNone) p.right.low = q.right.low;
      if (p.left.empty()) {
        p.left = q.left;
      } else {
        ref_[idx(p.left.low)] = q.left.high;
      }
      p.left.low = q.left.low;
    }
    if (!(p.left.empty() && p.right.empty())) stack_.push_back(p);
    return true;
  }

  void remove_back_edges(int e) {
    const int u = src_[idx(e)];
    while (!stack_.empty() && lowest(stack_.back()) == height_[idx(u)]) stack_.pop_back();
    if (!stack_.empty()) {
      ConflictPair p = stack_.back();
      stack_.pop_back();
      while (p.left.high != kNone && dst_[idx(p.left.high)] == u) p.left.high = ref_[idx(p.left.high)];
      if (p.left.high == kNone && p.left.low != kNone) {
        ref_[idx(p.left.low)] = p.right.low;
        p.left.low = kNone;
      }
      while (p.right.high != kNone && dst_[idx(p.right.high)] == u) p.right.high = ref_[idx(p.right.high)];
      if (p.right.high == kNone && p.right.low != kNone) {
        ref_[idx(p.right.low)] = p.left.low;
        p.right.low = kNone;
      }
      stack_.push_back(p);
    }
    if (lowpt_[idx(e)] < height_[idx(u)] && !stack_.empty()) {
      const int hl = stack_.back().left.high;
      const int hr = stack_.back().right.high;
      ref_[idx(e)] = (hl != kNone && (hr == kNone || lowpt_[idx(hl)] > lowpt_[idx(hr)])) ? hl : hr;
    }
  }

  int n_;
  std::vector<std::vector<std::pair<int, int>>> adj_;
  std::vector<int> src_, dst_;
  std::vector<bool> oriented_;
  std::vector<int> height_, parent_edge_;
  std::vector<int> lowpt_, lowpt2_, nesting_;
  std::vector<std::vector<int>> out_;
  std::vector<int> ref_, lowpt_edge_;
  std::vector<std::size_t> stack_bottom_;
  std::vector<ConflictPair> stack_;
};

}  // namespace

bool is_planar(int n, const std::vector<std::pair<int, int>>& edges) {
  require(n >= 0, "planarity: negative vertex count");
  if (n >= 3 && static_cast<long long>(edges.size()) > 3LL * n - 6) return false;
  if (n < 5) return true;
  LeftRightTest lr(n, edges);
  return lr.run();
}

bool PlanarGraphBuilder::try_add(int a, int b) {
  require(a != b && a >= 0 && b >= 0 && a < n_ && b < n_, "planar builder: invalid edge");
  edges_.emplace_back(a, b);
  if (!is_planar(n_, edges_)) {
    edges_.pop_back();
    return false;
  }
  return true;
}

}  // namespace finnet
