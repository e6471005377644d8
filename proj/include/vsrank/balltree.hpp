#pragma once

// Ball tree over augmented rule vectors and best-first branch-and-bound
// search for the rule pair whose indifference hyperplane passes closest to a
// center w_c.
//
// For balls B(c1, r1), B(c2, r2) every difference f2 - f1 lies in B(d, rho)
// with d = c2 - c1 and rho = r1 + r2. Two bound families are offered:
//   paper: the closed-form bounds built from the extremal points d -/+ rho w/|w|;
//   exact: the angular extremes of the cone spanned by B(d, rho), which are
//          conservative for every configuration.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <queue>
#include <random>
#include <set>
#include <utility>
#include <vector>

#include "vsrank/core.hpp"

namespace vsrank {

enum class BoundMode { paper, exact };

inline std::string_view to_string(BoundMode m) { return m == BoundMode::paper ? "paper" : "exact"; }

struct Ball {
  Vec center;
  double radius = 0.0;
};

struct BallNode {
  Vec center;
  double radius = 0.0;
  int left = -1;
  int right = -1;
  std::vector<std::size_t> items;  // leaves only

  bool leaf() const { return left < 0; }
  Ball ball() const { return {center, radius}; }
};

/// |<w, q>| / |q| with q = psi_i - psi_j.
inline double pair_distance(std::span<const double> w, std::span<const double> psi_i,
                            std::span<const double> psi_j) {
  if (psi_i.size() != psi_j.size() || w.size() != psi_i.size())
    throw Error("pair_distance: dimension mismatch");
  double num = 0.0, qq = 0.0;
  for (std::size_t a = 0; a < w.size(); ++a) {
    const double q = psi_i[a] - psi_j[a];
    num += w[a] * q;
    qq += q * q;
  }
  if (qq == 0.0) throw Error("pair_distance: identical vectors define no hyperplane");
  return std::abs(num) / std::sqrt(qq);
}

struct DistanceBounds {
  double lower = 0.0;
  double upper = 0.0;
};

/// Bounds on pair_distance(w, f1, f2) over f1 in ball1, f2 in ball2.
inline DistanceBounds bounds(const Ball& b1, const Ball& b2, std::span<const double> w, BoundMode mode) {
  const std::size_t D = w.size();
  if (b1.center.size() != D || b2.center.size() != D) throw Error("bounds: dimension mismatch");
  const double gamma = norm2(w);
  if (!(gamma > 0.0)) throw Error("bounds: center direction must be nonzero");
  const double rho = b1.radius + b2.radius;
  const Vec disp = subtract(b2.center, b1.center);
  const double delta = dot(disp, w);

  DistanceBounds out;
  if (mode == BoundMode::paper) {
    auto ratio = [&](double sign) {
      // gamma |delta + sign rho gamma| / |d gamma + sign rho w|
      double den = 0.0;
      for (std::size_t a = 0; a < D; ++a) {
        const double v = disp[a] * gamma + sign * rho * w[a];
        den += v * v;
      }
      den = std::sqrt(den);
      return std::pair{gamma * std::abs(delta + sign * rho * gamma), den};
    };
    if (std::abs(delta) <= rho * gamma) {
      out.lower = 0.0;
    } else {
      auto [num, den] = ratio(-1.0);
      out.lower = den == 0.0 ? 0.0 : num / den;
    }
    auto [num, den] = ratio(delta <= 0.0 ? -1.0 : 1.0);
    out.upper = den == 0.0 ? gamma : num / den;
    return out;
  }

  const double L2 = dot(disp, disp);
  const double L = std::sqrt(L2);
  if (L <= rho) return {0.0, gamma};  // the difference ball reaches every direction
  const double ad = std::abs(delta);
  const double along = std::sqrt(std::max(0.0, L2 - rho * rho));
  const double across = std::sqrt(std::max(0.0, gamma * gamma * L2 - delta * delta));
  out.lower = ad <= rho * gamma ? 0.0 : std::max(0.0, (ad * along - rho * across) / L2);
  out.upper = gamma * gamma * L2 - delta * delta <= rho * rho * gamma * gamma
                  ? gamma
                  : std::min(gamma, (ad * along + rho * across) / L2);
  return out;
}

class BallTree {
 public:
  BallTree(std::vector<Vec> points, std::size_t leaf_capacity = 8, std::uint64_t seed = 0)
      : points_(std::move(points)), leaf_capacity_(leaf_capacity) {
    if (points_.empty()) throw Error("BallTree: no points");
    if (leaf_capacity_ < 1) throw Error("BallTree: leaf_capacity must be >= 1");
    dim_ = points_.front().size();
    for (const auto& p : points_)
      if (p.size() != dim_) throw Error("BallTree: points have mixed dimensions");
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> all(points_.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    build(std::move(all), rng);
  }

  std::size_t size() const { return points_.size(); }
  std::size_t dim() const { return dim_; }
  std::size_t leaf_capacity() const { return leaf_capacity_; }
  const Vec& point(std::size_t i) const { return points_.at(i); }
  const std::vector<Vec>& points() const { return points_; }
  const BallNode& node(int id) const { return nodes_.at(static_cast<std::size_t>(id)); }
  const std::vector<BallNode>& nodes() const { return nodes_; }
  static constexpr int root = 0;

 private:
  int build(std::vector<std::size_t> idx, std::mt19937_64& rng) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    BallNode node;
    node.center.assign(dim_, 0.0);
    for (std::size_t i : idx)
      for (std::size_t a = 0; a < dim_; ++a) node.center[a] += points_[i][a];
    for (double& c : node.center) c /= static_cast<double>(idx.size());
    for (std::size_t i : idx) node.radius = std::max(node.radius, distance(points_[i], node.center));

    if (idx.size() <= leaf_capacity_) {
      node.items = std::move(idx);
      nodes_[static_cast<std::size_t>(id)] = std::move(node);
      return id;
    }

    // Two-pass farthest-point pivots.
    auto farthest_from = [&](std::size_t from) {
      std::size_t best = idx.front();
      double best_d = -1.0;
      for (std::size_t i : idx) {
        const double d = distance(points_[i], points_[from]);
        if (d > best_d) {
          best_d = d;
          best = i;
        }
      }
      return best;
    };
    const std::size_t start = idx[std::uniform_int_distribution<std::size_t>(0, idx.size() - 1)(rng)];
    const std::size_t a = farthest_from(start);
    const std::size_t b = farthest_from(a);

    std::vector<std::size_t> near_a, near_b;
    for (std::size_t i : idx)
      (distance(points_[i], points_[a]) <= distance(points_[i], points_[b]) ? near_a : near_b).push_back(i);
    if (near_a.empty() || near_b.empty()) {
      // all points coincide: split the index list in half
      near_a.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(idx.size() / 2));
      near_b.assign(idx.begin() + static_cast<std::ptrdiff_t>(idx.size() / 2), idx.end());
    }
    // left child holds the smallest point index
    if (near_b.front() < near_a.front()) std::swap(near_a, near_b);

    const int l = build(std::move(near_a), rng);
    const int r = build(std::move(near_b), rng);
    node.left = l;
    node.right = r;
    nodes_[static_cast<std::size_t>(id)] = std::move(node);
    return id;
  }

  std::vector<Vec> points_;
  std::size_t leaf_capacity_;
  std::size_t dim_ = 0;
  std::vector<BallNode> nodes_;
};

struct PairResult {
  std::size_t i = 0;  // i < j
  std::size_t j = 0;
  double distance = 0.0;
};

using PairSet = std::set<std::pair<std::size_t, std::size_t>>;

inline std::pair<std::size_t, std::size_t> ordered(std::size_t a, std::size_t b) {
  return a < b ? std::pair{a, b} : std::pair{b, a};
}

struct HeapEntry {
  double key = 0.0;
  double lb = 0.0;
  int a = -1;
  int b = -1;
  double ub = 0.0;
  std::uint64_t seq = 0;

  bool self() const { return a == b; }
};

/// Min-heap of node pairs ordered by (key, lb, seq).
class PairHeap {
 public:
  PairHeap(const BallTree& tree, std::span<const double> w, BoundMode mode) : tree_(tree), w_(w), mode_(mode) {}

  /// Prunes when LB > tau, inserts with key 0 when UB <= tau, else keys on the
  /// distance of the node centers to the hyperplane.
  void push(int a, int b, double tau) {
    const BallNode& na = tree_.node(a);
    const BallNode& nb = tree_.node(b);
    const DistanceBounds bd = bounds(na.ball(), nb.ball(), w_, mode_);
    if (bd.lower > tau) return;
    double key = 0.0;
    if (!(bd.upper <= tau)) key = na.center == nb.center ? 0.0 : pair_distance(w_, na.center, nb.center);
    heap_.push({key, bd.lower, a, b, bd.upper, seq_++});
  }

  /// Intra-leaf entry, always expanded by exhaustive scan.
  void push_self(int leaf) {
    heap_.push({0.0, 0.0, leaf, leaf, norm2(w_), seq_++});
  }

  bool empty() const { return heap_.empty(); }
  std::size_t size() const { return heap_.size(); }
  const HeapEntry& top() const { return heap_.top(); }
  HeapEntry pop() {
    HeapEntry e = heap_.top();
    heap_.pop();
    return e;
  }

 private:
  struct Greater {
    bool operator()(const HeapEntry& x, const HeapEntry& y) const {
      if (x.key != y.key) return x.key > y.key;
      if (x.lb != y.lb) return x.lb > y.lb;
      return x.seq > y.seq;
    }
  };
  const BallTree& tree_;
  std::span<const double> w_;
  BoundMode mode_;
  std::priority_queue<HeapEntry, std::vector<HeapEntry>, Greater> heap_;
  std::uint64_t seq_ = 0;
};

struct SearchStats {
  std::size_t pops = 0;
  std::size_t pairs_evaluated = 0;
};

/// Best-first search for the pair closest to the hyperplane through w_c.
///
/// Stops as soon as a pair within `tau` is known; tau = +inf asks for the
/// global minimum. Pairs in `mask` and pairs of identical vectors are skipped.
/// Ties are broken toward the lexicographically smaller index pair.
inline std::optional<PairResult> search_pair(const BallTree& tree, std::span<const double> w, double tau,
                                             BoundMode mode, const PairSet* mask = nullptr,
                                             SearchStats* stats = nullptr) {
  if (w.size() != tree.dim()) throw Error("search_pair: dimension mismatch");
  const bool has_target = std::isfinite(tau);
  auto good_enough = [&](double d) { return has_target && d <= tau; };

  std::optional<PairResult> best;
  auto best_d = [&] { return best ? best->distance : std::numeric_limits<double>::infinity(); };
  auto masked = [&](std::size_t i, std::size_t j) { return mask && mask->count(ordered(i, j)) > 0; };

  auto consider = [&](std::size_t i, std::size_t j) {
    if (i == j || masked(i, j)) return;
    const Vec& pi = tree.point(i);
    const Vec& pj = tree.point(j);
    if (pi == pj) return;
    if (stats) ++stats->pairs_evaluated;
    const double d = pair_distance(w, pi, pj);
    const auto key = ordered(i, j);
    if (!best || d < best->distance || (d == best->distance && key < std::pair{best->i, best->j}))
      best = PairResult{key.first, key.second, d};
  };

  auto leftmost_leaf = [&](int id) {
    while (!tree.node(id).leaf()) id = tree.node(id).left;
    return id;
  };
  // Any valid pair of the entry, taken from the leftmost leaves.
  auto any_pair = [&](const HeapEntry& e) -> std::optional<PairResult> {
    const auto& la = tree.node(leftmost_leaf(e.a)).items;
    const auto& lb = tree.node(e.self() ? leftmost_leaf(e.a) : leftmost_leaf(e.b)).items;
    for (std::size_t x = 0; x < la.size(); ++x)
      for (std::size_t y = e.self() ? x + 1 : 0; y < lb.size(); ++y) {
        const std::size_t i = la[x], j = lb[y];
        if (i == j || masked(i, j) || tree.point(i) == tree.point(j)) continue;
        const auto key = ordered(i, j);
        return PairResult{key.first, key.second, pair_distance(w, tree.point(i), tree.point(j))};
      }
    return std::nullopt;
  };

  PairHeap heap(tree, w, mode);
  // Every cross pair lives under exactly one sibling pair (its lowest common
  // ancestor), and every intra-leaf pair under one self entry.
  for (std::size_t id = 0; id < tree.nodes().size(); ++id) {
    const BallNode& n = tree.node(static_cast<int>(id));
    if (n.leaf()) {
      if (n.items.size() >= 2) heap.push_self(static_cast<int>(id));
    } else {
      heap.push(n.left, n.right, tau);
    }
  }

  auto children = [&](int id) {
    const BallNode& n = tree.node(id);
    return n.leaf() ? std::vector<int>{id} : std::vector<int>{n.left, n.right};
  };

  while (!heap.empty()) {
    const HeapEntry e = heap.pop();
    if (stats) ++stats->pops;
    if (good_enough(best_d())) return best;
    const double threshold = std::min(tau, best_d());
    if (e.lb > threshold) continue;
    if (good_enough(e.ub)) {
      if (auto p = any_pair(e)) return p;
    }
    const BallNode& A = tree.node(e.a);
    const BallNode& B = tree.node(e.b);
    if (e.self()) {
      for (std::size_t x = 0; x < A.items.size(); ++x)
        for (std::size_t y = x + 1; y < A.items.size(); ++y) consider(A.items[x], A.items[y]);
    } else if (A.leaf() && B.leaf()) {
      for (std::size_t i : A.items)
        for (std::size_t j : B.items) consider(i, j);
    } else {
      for (int a : children(e.a))
        for (int b : children(e.b)) heap.push(a, b, std::min(tau, best_d()));
    }
  }
  return best;
}

}  // namespace vsrank
