#pragma once

// Finite filtration trees: the martingale ball-basis on a finite measure space.
//
// Every node of the tree is a ball. Children of a node partition it, so two
// balls either are nested or disjoint. Leaves are stored left to right and
// every node covers a contiguous range of that leaf order, which turns all
// set relations between balls into interval relations on leaf indices.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace oscbox {

using NodeId = std::int32_t;
inline constexpr NodeId kNoNode = -1;

/// Largest number of leaves a builder will allocate.
inline constexpr std::size_t kDefaultLeafCap = std::size_t{1} << 22;

/// Relative tolerance for the partition-sum invariant of non-dyadic trees.
inline constexpr double kPartitionRelTol = 1e-12;

struct Node {
  NodeId id = kNoNode;
  NodeId parent = kNoNode;
  std::vector<NodeId> children;
  double measure = 0.0;
  int level = 0;            // distance from the root
  std::size_t first = 0;    // leaf-order range [first, last)
  std::size_t last = 0;
  NodeId leaf_index = kNoNode;  // position in leaf order, leaves only

  bool is_leaf() const { return children.empty(); }
};

class MeasureTree {
 public:
  MeasureTree() = default;

  /// Builds a tree from parent links and leaf measures. Internal measures are
  /// the sums of their children. Nodes must be given so that every child id
  /// appears in its parent's children list, in left-to-right order.
  static MeasureTree from_nodes(std::vector<Node> nodes, NodeId root);

  std::size_t size() const { return nodes_.size(); }
  std::size_t leaf_count() const { return leaves_.size(); }
  NodeId root() const { return root_; }
  const Node& node(NodeId id) const {
    check(id);
    return nodes_[static_cast<std::size_t>(id)];
  }
  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<NodeId>& leaves() const { return leaves_; }
  /// Leaf measures in leaf order.
  const std::vector<double>& leaf_measures() const { return leaf_measure_; }
  /// Node ids ordered deepest level first; children precede parents.
  const std::vector<NodeId>& bottom_up() const { return bottom_up_; }
  /// Height: the largest leaf level.
  int height() const { return height_; }
  double total_measure() const { return node(root_).measure; }

  double measure(NodeId id) const { return node(id).measure; }
  NodeId parent(NodeId id) const { return node(id).parent; }
  bool contains(NodeId outer, NodeId inner) const {
    const Node& a = node(outer);
    const Node& b = node(inner);
    return a.first <= b.first && b.last <= a.last;
  }
  bool intersects(NodeId a, NodeId b) const {
    const Node& x = node(a);
    const Node& y = node(b);
    return x.first < y.last && y.first < x.last;
  }
  /// Ancestor chain from `id` up to the root, `id` included.
  std::vector<NodeId> ancestors(NodeId id) const {
    std::vector<NodeId> out;
    for (NodeId a = id; a != kNoNode; a = node(a).parent) out.push_back(a);
    return out;
  }
  /// Leaf that occupies position `i` of the leaf order.
  NodeId leaf_at(std::size_t i) const { return leaves_.at(i); }
  /// Ids of the nodes at `level`, left to right.
  std::vector<NodeId> level_nodes(int level) const {
    std::vector<NodeId> out;
    for (const Node& n : nodes_)
      if (n.level == level) out.push_back(n.id);
    return out;
  }

  bool valid(NodeId id) const {
    return id >= 0 && static_cast<std::size_t>(id) < nodes_.size();
  }

 private:
  void check(NodeId id) const {
    if (!valid(id))
      throw std::out_of_range("node id " + std::to_string(id) +
                              " is not in the tree");
  }

  std::vector<Node> nodes_;
  std::vector<NodeId> leaves_;
  std::vector<double> leaf_measure_;
  std::vector<NodeId> bottom_up_;
  NodeId root_ = kNoNode;
  int height_ = 0;
};

/// A ball of a tree: a node id with its measure cached.
struct Ball {
  NodeId node = kNoNode;
  double measure = 0.0;

  friend bool operator==(const Ball&, const Ball&) = default;
};

inline Ball ball(const MeasureTree& tree, NodeId id) {
  return Ball{id, tree.measure(id)};
}

inline MeasureTree MeasureTree::from_nodes(std::vector<Node> nodes,
                                           NodeId root) {
  MeasureTree t;
  const auto n = nodes.size();
  if (n == 0) throw std::invalid_argument("tree has no nodes");
  if (root < 0 || static_cast<std::size_t>(root) >= n)
    throw std::invalid_argument("root id out of range");
  for (std::size_t i = 0; i < n; ++i) {
    if (nodes[i].id != static_cast<NodeId>(i))
      throw std::invalid_argument("node ids must be 0..N-1 in order");
  }
  if (nodes[static_cast<std::size_t>(root)].parent != kNoNode)
    throw std::invalid_argument("root has a parent");
  for (const Node& nd : nodes) {
    for (NodeId c : nd.children) {
      if (c < 0 || static_cast<std::size_t>(c) >= n)
        throw std::invalid_argument("child id out of range");
      if (nodes[static_cast<std::size_t>(c)].parent != nd.id)
        throw std::invalid_argument("child/parent links disagree at node " +
                                    std::to_string(c));
    }
  }

  // Depth-first walk assigns levels, leaf order and leaf ranges.
  std::vector<char> seen(n, 0);
  struct Frame {
    NodeId id;
    std::size_t next_child;
  };
  std::vector<Frame> stack{{root, 0}};
  nodes[static_cast<std::size_t>(root)].level = 0;
  seen[static_cast<std::size_t>(root)] = 1;
  nodes[static_cast<std::size_t>(root)].first = 0;
  while (!stack.empty()) {
    Frame& fr = stack.back();
    Node& cur = nodes[static_cast<std::size_t>(fr.id)];
    if (cur.children.empty()) {
      cur.first = t.leaves_.size();
      cur.leaf_index = static_cast<NodeId>(t.leaves_.size());
      t.leaves_.push_back(cur.id);
      cur.last = t.leaves_.size();
      t.height_ = std::max(t.height_, cur.level);
      stack.pop_back();
      continue;
    }
    if (fr.next_child == 0) cur.first = t.leaves_.size();
    if (fr.next_child == cur.children.size()) {
      cur.last = t.leaves_.size();
      stack.pop_back();
      continue;
    }
    const NodeId c = cur.children[fr.next_child++];
    auto& child = nodes[static_cast<std::size_t>(c)];
    if (seen[static_cast<std::size_t>(c)])
      throw std::invalid_argument("node " + std::to_string(c) +
                                  " reached twice");
    seen[static_cast<std::size_t>(c)] = 1;
    child.level = cur.level + 1;
    stack.push_back({c, 0});
  }
  for (std::size_t i = 0; i < n; ++i)
    if (!seen[i])
      throw std::invalid_argument("node " + std::to_string(i) +
                                  " is not reachable from the root");

  // Leaves keep their own measure; internal nodes sum their children,
  // deepest level first.
  std::vector<NodeId> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = static_cast<NodeId>(i);
  std::stable_sort(order.begin(), order.end(), [&](NodeId a, NodeId b) {
    return nodes[static_cast<std::size_t>(a)].level >
           nodes[static_cast<std::size_t>(b)].level;
  });
  for (NodeId id : order) {
    Node& nd = nodes[static_cast<std::size_t>(id)];
    if (nd.children.empty()) {
      if (!(nd.measure > 0.0) || !std::isfinite(nd.measure))
        throw std::invalid_argument("leaf " + std::to_string(id) +
                                    " has non-positive measure");
      continue;
    }
    double sum = 0.0;
    for (NodeId c : nd.children)
      sum += nodes[static_cast<std::size_t>(c)].measure;
    nd.measure = sum;
  }

  t.nodes_ = std::move(nodes);
  t.bottom_up_ = std::move(order);
  t.root_ = root;
  t.leaf_measure_.reserve(t.leaves_.size());
  for (NodeId l : t.leaves_)
    t.leaf_measure_.push_back(t.nodes_[static_cast<std::size_t>(l)].measure);
  return t;
}

/// Full 2^dim-ary tree of the given depth over the unit cube; level-l nodes
/// have measure 2^(-dim*l). Node ids are assigned level by level.
inline MeasureTree build_dyadic_tree(int depth, int dim,
                                     std::size_t leaf_cap = kDefaultLeafCap) {
  if (depth < 1) throw std::invalid_argument("depth must be >= 1");
  if (dim < 1) throw std::invalid_argument("dim must be >= 1");
  const long double leaves = std::ldexp(1.0L, dim * depth);
  if (dim * depth >= 63 || leaves > static_cast<long double>(leaf_cap))
    throw std::length_error("dyadic tree with 2^" +
                            std::to_string(dim * depth) +
                            " leaves exceeds the leaf cap");
  const std::size_t fan = std::size_t{1} << dim;
  std::vector<Node> nodes;
  std::size_t level_begin = 0;
  nodes.push_back(Node{0, kNoNode, {}, 1.0});
  for (int l = 1; l <= depth; ++l) {
    const std::size_t level_end = nodes.size();
    const double m = std::ldexp(1.0, -dim * l);
    for (std::size_t p = level_begin; p < level_end; ++p) {
      for (std::size_t c = 0; c < fan; ++c) {
        const auto id = static_cast<NodeId>(nodes.size());
        nodes[p].children.push_back(id);
        nodes.push_back(Node{id, static_cast<NodeId>(p), {}, m});
      }
    }
    level_begin = level_end;
  }
  return MeasureTree::from_nodes(std::move(nodes), 0);
}

/// Uniform-branching tree: level l nodes each have branching[l] children;
/// leaf weights are given left to right.
inline MeasureTree build_weighted_tree(std::span<const int> branching,
                                       std::span<const double> leaf_weights) {
  std::size_t expected = 1;
  for (int b : branching) {
    if (b < 1) throw std::invalid_argument("branching factors must be >= 1");
    expected *= static_cast<std::size_t>(b);
    if (expected > kDefaultLeafCap)
      throw std::length_error("weighted tree exceeds the leaf cap");
  }
  if (expected != leaf_weights.size())
    throw std::invalid_argument(
        "branching implies " + std::to_string(expected) + " leaves but " +
        std::to_string(leaf_weights.size()) + " weights were given");
  for (double w : leaf_weights)
    if (!(w > 0.0) || !std::isfinite(w))
      throw std::invalid_argument("leaf weights must be positive and finite");

  std::vector<Node> nodes;
  nodes.push_back(Node{0, kNoNode, {}, 0.0});
  std::size_t level_begin = 0;
  for (int b : branching) {
    const std::size_t level_end = nodes.size();
    for (std::size_t p = level_begin; p < level_end; ++p) {
      for (int c = 0; c < b; ++c) {
        const auto id = static_cast<NodeId>(nodes.size());
        nodes[p].children.push_back(id);
        nodes.push_back(Node{id, static_cast<NodeId>(p), {}, 0.0});
      }
    }
    level_begin = level_end;
  }
  for (std::size_t i = level_begin; i < nodes.size(); ++i)
    nodes[i].measure = leaf_weights[i - level_begin];
  return MeasureTree::from_nodes(std::move(nodes), 0);
}

inline MeasureTree build_weighted_tree(std::initializer_list<int> branching,
                                       std::initializer_list<double> weights) {
  return build_weighted_tree(std::span<const int>(branching.begin(), branching.size()),
                             std::span<const double>(weights.begin(), weights.size()));
}

// ---------------------------------------------------------------------------
// JSON: {nodes:[{id,parent,children,measure}], root, leaves}

inline nlohmann::json to_json(const MeasureTree& t) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const Node& n : t.nodes()) {
    nlohmann::json j;
    j["id"] = n.id;
    j["parent"] = n.parent == kNoNode ? nlohmann::json(nullptr)
                                      : nlohmann::json(n.parent);
    j["children"] = n.children;
    j["measure"] = n.measure;
    nodes.push_back(std::move(j));
  }
  return {{"nodes", std::move(nodes)}, {"root", t.root()}, {"leaves", t.leaves()}};
}

/// Parses and validates a serialized tree. Leaf measures are taken as given;
/// stored internal measures must match the sum of their children.
inline MeasureTree tree_from_json(const nlohmann::json& j) {
  std::vector<Node> nodes;
  for (const auto& jn : j.at("nodes")) {
    Node n;
    n.id = jn.at("id").get<NodeId>();
    n.parent = jn.at("parent").is_null() ? kNoNode : jn.at("parent").get<NodeId>();
    n.children = jn.at("children").get<std::vector<NodeId>>();
    n.measure = jn.at("measure").get<double>();
    nodes.push_back(std::move(n));
  }
  std::vector<double> stored;
  for (const Node& n : nodes) stored.push_back(n.measure);
  MeasureTree t = MeasureTree::from_nodes(std::move(nodes), j.at("root").get<NodeId>());
  for (const Node& n : t.nodes()) {
    const double s = stored[static_cast<std::size_t>(n.id)];
    if (std::abs(s - n.measure) > kPartitionRelTol * n.measure)
      throw std::invalid_argument("stored measure of node " +
                                  std::to_string(n.id) +
                                  " differs from the sum of its children");
  }
  if (j.contains("leaves") &&
      j.at("leaves").get<std::vector<NodeId>>() != t.leaves())
    throw std::invalid_argument("leaf list does not match the tree's leaf order");
  return t;
}

}  // namespace oscbox
