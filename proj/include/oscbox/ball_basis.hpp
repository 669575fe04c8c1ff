#pragma once

// Ball-basis structure of a filtration tree: hull balls, the two balls
// relation, doubling and regularity constants, exhausting sequences and the
// greedy Vitali selector.

#include <algorithm>
#include <limits>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "oscbox/measure_tree.hpp"

namespace oscbox {

/// Highest ancestor A of b (b itself allowed) with mu(A) <= 2 mu(b).
inline Ball hull(const MeasureTree& tree, Ball b) {
  const double cap = 2.0 * tree.measure(b.node);
  NodeId h = b.node;
  for (NodeId p = tree.parent(h); p != kNoNode; p = tree.parent(p)) {
    if (tree.measure(p) > cap) break;
    h = p;
  }
  return ball(tree, h);
}

inline Ball hull(const MeasureTree& tree, NodeId id) {
  return hull(tree, ball(tree, id));
}

/// hull(node) for every node, indexed by id.
inline std::vector<NodeId> hull_table(const MeasureTree& tree) {
  std::vector<NodeId> out(tree.size());
  for (const Node& n : tree.nodes()) out[static_cast<std::size_t>(n.id)] = hull(tree, n.id).node;
  return out;
}

struct BallPair {
  NodeId a = kNoNode;
  NodeId b = kNoNode;
  friend bool operator==(const BallPair&, const BallPair&) = default;
};

/// Every ordered pair (A, B) with A meeting B, mu(A) <= 2 mu(B) and A not
/// inside hull(B). An empty result certifies the two balls relation.
inline std::vector<BallPair> two_balls_check(const MeasureTree& tree) {
  const auto hulls = hull_table(tree);
  std::vector<BallPair> bad;
  for (const Node& a : tree.nodes()) {
    for (const Node& b : tree.nodes()) {
      if (!tree.intersects(a.id, b.id)) continue;
      if (a.measure > 2.0 * b.measure) continue;
      if (!tree.contains(hulls[static_cast<std::size_t>(b.id)], a.id))
        bad.push_back({a.id, b.id});
    }
  }
  return bad;
}

struct AxiomFailure {
  std::string axiom;
  std::vector<NodeId> witness;
};

struct BasisReport {
  double k_constant = 1.0;
  double doubling_constant = 1.0;  // +inf never occurs on finite trees
  double regularity_theta = 1.0;
  std::vector<AxiomFailure> axiom_failures;

  bool passed() const { return axiom_failures.empty(); }
};

namespace detail {
inline double overlap_measure(const MeasureTree& t, NodeId a, NodeId b) {
  if (t.contains(a, b)) return t.measure(b);
  if (t.contains(b, a)) return t.measure(a);
  return t.intersects(a, b) ? std::numeric_limits<double>::quiet_NaN() : 0.0;
}
}  // namespace detail

/// Exhaustive scan of the basis constants and axioms. O(N^2) in the node
/// count because regularity and the two balls relation visit every pair.
inline BasisReport basis_report(const MeasureTree& tree) {
  BasisReport rep;
  const auto hulls = hull_table(tree);

  for (const Node& n : tree.nodes()) {
    if (!(n.measure > 0.0))
      rep.axiom_failures.push_back({"positive-measure", {n.id}});
    const NodeId h = hulls[static_cast<std::size_t>(n.id)];
    const double ratio = tree.measure(h) / n.measure;
    rep.k_constant = std::max(rep.k_constant, ratio);
    if (ratio > 2.0 || !tree.contains(h, n.id))
      rep.axiom_failures.push_back({"hull-doubling", {n.id, h}});
    if (n.parent != kNoNode)
      rep.doubling_constant =
          std::max(rep.doubling_constant, tree.measure(n.parent) / n.measure);
  }

  // Root covers every leaf, so any two points share a ball and X itself is a ball.
  const Node& root = tree.node(tree.root());
  if (root.first != 0 || root.last != tree.leaf_count())
    rep.axiom_failures.push_back({"root-covers-space", {tree.root()}});

  for (const Node& b : tree.nodes()) {
    const NodeId hb = hulls[static_cast<std::size_t>(b.id)];
    const double hm = tree.measure(hb);
    for (const Node& a : tree.nodes()) {
      if (b.measure > a.measure || !tree.intersects(a.id, b.id)) continue;
      const double ov = detail::overlap_measure(tree, hb, a.id);
      rep.regularity_theta = std::min(rep.regularity_theta, ov / hm);
    }
  }
  if (!(rep.regularity_theta > 0.0))
    rep.axiom_failures.push_back({"regularity", {}});

  for (const BallPair& p : two_balls_check(tree))
    rep.axiom_failures.push_back({"two-balls", {p.a, p.b}});
  return rep;
}

/// Increasing balls G_1 = g, G_2, ... ending at the root, each containing the
/// hull of its predecessor. The next term is hull(G_k) when that at least
/// doubles G_k, otherwise the parent of hull(G_k); so consecutive measures grow
/// by a factor in [2, 2c] with c the doubling constant, except possibly for the
/// final step onto the root.
inline std::vector<Ball> exhausting_sequence(const MeasureTree& tree, Ball g) {
  std::vector<Ball> seq{ball(tree, g.node)};
  NodeId cur = g.node;
  while (cur != tree.root()) {
    const NodeId h = hull(tree, cur).node;
    NodeId next = h;
    if (tree.measure(h) < 2.0 * tree.measure(cur) || h == cur) {
      next = h == tree.root() ? h : tree.parent(h);
    }
    seq.push_back(ball(tree, next));
    cur = next;
  }
  return seq;
}

/// Greedy Vitali selection: among family members that meet E and are disjoint
/// from everything chosen so far, repeatedly take one of largest measure
/// (smallest id on ties). The hulls of the selected balls cover E.
inline std::vector<Ball> vitali_select(const MeasureTree& tree,
                                       const std::set<NodeId>& e_leaves,
                                       std::span<const Ball> family) {
  if (e_leaves.empty()) return {};
  std::vector<NodeId> cand;
  for (const Ball& b : family) {
    if (!tree.valid(b.node))
      throw std::out_of_range("family ball is not a node of the tree");
    cand.push_back(b.node);
  }
  std::sort(cand.begin(), cand.end());
  cand.erase(std::unique(cand.begin(), cand.end()), cand.end());

  for (NodeId leaf : e_leaves) {
    if (!tree.valid(leaf) || !tree.node(leaf).is_leaf())
      throw std::invalid_argument("E contains a non-leaf id " +
                                  std::to_string(leaf));
    const bool covered = std::any_of(cand.begin(), cand.end(), [&](NodeId c) {
      return tree.contains(c, leaf);
    });
    if (!covered)
      throw std::invalid_argument("family does not cover leaf " +
                                  std::to_string(leaf));
  }

  std::erase_if(cand, [&](NodeId c) {
    return std::none_of(e_leaves.begin(), e_leaves.end(),
                        [&](NodeId l) { return tree.contains(c, l); });
  });

  std::vector<Ball> chosen;
  for (;;) {
    NodeId best = kNoNode;
    for (NodeId c : cand) {
      const bool free = std::none_of(chosen.begin(), chosen.end(), [&](const Ball& s) {
        return tree.intersects(s.node, c);
      });
      if (!free) continue;
      if (best == kNoNode || tree.measure(c) > tree.measure(best)) best = c;
    }
    if (best == kNoNode) break;
    chosen.push_back(ball(tree, best));
  }
  return chosen;
}

}  // namespace oscbox
