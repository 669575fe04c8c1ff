#pragma once

// Martingale differences over a filtration tree and the operators built from
// them: Burkholder transforms (full, truncated, maximal), the square function
// and the maximal function of the ball-basis.

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "oscbox/ball_basis.hpp"
#include "oscbox/functionals.hpp"
#include "oscbox/random.hpp"

namespace oscbox {

/// Multipliers eps_A in [-1, 1] indexed by node; absent nodes are 0.
class TransformSpec {
 public:
  TransformSpec() = default;
  explicit TransformSpec(std::map<NodeId, double> eps) : eps_(std::move(eps)) {
    for (const auto& [id, e] : eps_)
      if (!(std::abs(e) <= 1.0))
        throw std::invalid_argument("|eps| must be <= 1 (node " + std::to_string(id) + ")");
  }

  /// eps_A = c on every internal node.
  static TransformSpec constant(const MeasureTree& t, double c) {
    std::map<NodeId, double> m;
    for (const Node& n : t.nodes())
      if (!n.is_leaf()) m[n.id] = c;
    return TransformSpec(std::move(m));
  }
  /// Independent random signs on every internal node.
  static TransformSpec random_signs(const MeasureTree& t, Rng& rng) {
    std::map<NodeId, double> m;
    for (const Node& n : t.nodes())
      if (!n.is_leaf()) m[n.id] = rng.sign();
    return TransformSpec(std::move(m));
  }

  double operator()(NodeId id) const {
    auto it = eps_.find(id);
    return it == eps_.end() ? 0.0 : it->second;
  }
  const std::map<NodeId, double>& values() const { return eps_; }

  /// Dense table indexed by node id, for the inner loops.
  std::vector<double> dense(const MeasureTree& t) const {
    std::vector<double> d(t.size(), 0.0);
    for (const auto& [id, e] : eps_)
      if (t.valid(id)) d[static_cast<std::size_t>(id)] = e;
    return d;
  }

 private:
  std::map<NodeId, double> eps_;
};

inline nlohmann::json to_json(const TransformSpec& s) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [id, e] : s.values()) j[std::to_string(id)] = e;
  return j;
}

inline TransformSpec transform_spec_from_json(const nlohmann::json& j) {
  std::map<NodeId, double> m;
  for (auto it = j.begin(); it != j.end(); ++it) m[static_cast<NodeId>(std::stoi(it.key()))] = it.value().get<double>();
  return TransformSpec(std::move(m));
}

/// Node means of f computed bottom-up from child integrals.
inline std::vector<double> node_means(const GridFunction& f) {
  const MeasureTree& t = f.tree();
  std::vector<double> integral(t.size(), 0.0);
  const auto& mu = t.leaf_measures();
  for (NodeId id : t.bottom_up()) {
    const Node& n = t.node(id);
    double& s = integral[static_cast<std::size_t>(id)];
    if (n.is_leaf()) {
      const auto li = static_cast<std::size_t>(n.leaf_index);
      s = f[li] * mu[li];
    } else {
      for (NodeId c : n.children) s += integral[static_cast<std::size_t>(c)];
    }
  }
  std::vector<double> means(t.size());
  for (const Node& n : t.nodes()) means[static_cast<std::size_t>(n.id)] = integral[static_cast<std::size_t>(n.id)] / n.measure;
  return means;
}

namespace detail {
/// For every leaf x, fills diff[l] = Delta_A f(x) and node[l] = A for the
/// ancestor A of x at level l (levels below the leaf's own stay 0 / kNoNode),
/// then calls visit(leaf_index, diff, node).
template <class Visit>
void for_each_leaf_differences(const GridFunction& f, Visit visit) {
  const MeasureTree& t = f.tree();
  const auto means = node_means(f);
  const auto h = static_cast<std::size_t>(t.height());
  std::vector<double> diff(h);
  std::vector<NodeId> node(h);
  for (std::size_t i = 0; i < t.leaf_count(); ++i) {
    std::fill(diff.begin(), diff.end(), 0.0);
    std::fill(node.begin(), node.end(), kNoNode);
    NodeId child = t.leaf_at(i);
    for (NodeId a = t.parent(child); a != kNoNode; child = a, a = t.parent(a)) {
      const auto l = static_cast<std::size_t>(t.node(a).level);
      diff[l] = means[static_cast<std::size_t>(child)] - means[static_cast<std::size_t>(a)];
      node[l] = a;
    }
    visit(i, diff, node);
  }
}
}  // namespace detail

/// Delta_A f: child mean minus mean over A on each child of A, zero off A.
inline GridFunction martingale_difference(const GridFunction& f, NodeId a) {
  const MeasureTree& t = f.tree();
  const Node& na = t.node(a);
  if (na.is_leaf()) throw std::invalid_argument("martingale difference at a leaf");
  const auto means = node_means(f);
  std::vector<double> v(f.size(), 0.0);
  const double ma = means[static_cast<std::size_t>(a)];
  for (NodeId c : na.children) {
    const Node& nc = t.node(c);
    for (std::size_t i = nc.first; i < nc.last; ++i) v[i] = means[static_cast<std::size_t>(c)] - ma;
  }
  return f.with_values(std::move(v));
}

/// Sum of eps_A Delta_A f over internal nodes A with level(A) <= max_level.
inline GridFunction transform_upto(const GridFunction& f, const TransformSpec& eps, int max_level) {
  const auto e = eps.dense(f.tree());
  std::vector<double> out(f.size(), 0.0);
  detail::for_each_leaf_differences(f, [&](std::size_t i, const auto& diff, const auto& node) {
    double acc = 0.0;
    for (std::size_t l = 0; l < diff.size() && static_cast<int>(l) <= max_level; ++l)
      if (node[l] != kNoNode) acc += e[static_cast<std::size_t>(node[l])] * diff[l];
    out[i] = acc;
  });
  return f.with_values(std::move(out));
}

/// Full transform M_eps f.
inline GridFunction transform(const GridFunction& f, const TransformSpec& eps) {
  return transform_upto(f, eps, f.tree().height());
}

/// Truncation M_{eps,n} f over levels 0..n; n must lie in [0, height-1].
inline GridFunction transform_truncated(const GridFunction& f, const TransformSpec& eps, int n) {
  if (n < 0 || n > f.tree().height() - 1)
    throw std::out_of_range("truncation level " + std::to_string(n) + " outside [0, " +
                            std::to_string(f.tree().height() - 1) + "]");
  return transform_upto(f, eps, n);
}

enum class MaximalMode { star, plus, minus };

/// sup_n |M_{eps,n} f|, sup_n M_{eps,n} f or inf_n M_{eps,n} f over n in [0, height-1].
inline GridFunction transform_maximal(const GridFunction& f, const TransformSpec& eps, MaximalMode mode) {
  const auto e = eps.dense(f.tree());
  std::vector<double> out(f.size(), 0.0);
  detail::for_each_leaf_differences(f, [&](std::size_t i, const auto& diff, const auto& node) {
    double acc = 0.0;
    double v = 0.0;
    for (std::size_t l = 0; l < diff.size(); ++l) {
      if (node[l] != kNoNode) acc += e[static_cast<std::size_t>(node[l])] * diff[l];
      const double p = mode == MaximalMode::star ? std::abs(acc) : acc;
      if (l == 0) v = p;
      else if (mode == MaximalMode::minus) v = std::min(v, p);
      else v = std::max(v, p);
    }
    out[i] = v;
  });
  return f.with_values(std::move(out));
}

/// Sf = (sum_A |Delta_A f|^2)^(1/2).
inline GridFunction square_function(const GridFunction& f) {
  std::vector<double> out(f.size(), 0.0);
  detail::for_each_leaf_differences(f, [&](std::size_t i, const auto& diff, const auto&) {
    double acc = 0.0;
    for (double d : diff) acc += d * d;
    out[i] = std::sqrt(acc);
  });
  return f.with_values(std::move(out));
}

/// Mf(x) = max over balls containing x of the r-average of |f|.
inline GridFunction maximal_function(const GridFunction& f, double r = 1.0) {
  detail::require_r(r);
  const MeasureTree& t = f.tree();
  std::vector<double> powered(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) powered[i] = detail::pow_r(std::abs(f[i]), r);
  const auto means = node_means(f.with_values(std::move(powered)));
  std::vector<double> out(f.size(), 0.0);
  for (std::size_t i = 0; i < f.size(); ++i) {
    double best = 0.0;
    for (NodeId a = t.leaf_at(i); a != kNoNode; a = t.parent(a)) best = std::max(best, means[static_cast<std::size_t>(a)]);
    out[i] = detail::root_r(best, r);
  }
  return f.with_values(std::move(out));
}

/// The six martingale-family operators.
enum class MartingaleOp { transform, truncated, maximal_star, maximal_plus, maximal_minus, square };

inline constexpr MartingaleOp kAllMartingaleOps[] = {MartingaleOp::transform,    MartingaleOp::truncated,
                                                     MartingaleOp::maximal_star, MartingaleOp::maximal_plus,
                                                     MartingaleOp::maximal_minus, MartingaleOp::square};

inline std::string to_string(MartingaleOp op) {
  switch (op) {
    case MartingaleOp::transform: return "transform";
    case MartingaleOp::truncated: return "truncated";
    case MartingaleOp::maximal_star: return "maximal-star";
    case MartingaleOp::maximal_plus: return "maximal-plus";
    case MartingaleOp::maximal_minus: return "maximal-minus";
    case MartingaleOp::square: return "square";
  }
  return "?";
}

/// A martingale operator bound to its multipliers (and truncation level).
struct MartingaleOperator {
  MartingaleOp kind = MartingaleOp::transform;
  TransformSpec eps;
  int level = 0;

  GridFunction operator()(const GridFunction& f) const {
    switch (kind) {
      case MartingaleOp::transform: return transform(f, eps);
      case MartingaleOp::truncated: return transform_truncated(f, eps, level);
      case MartingaleOp::maximal_star: return transform_maximal(f, eps, MaximalMode::star);
      case MartingaleOp::maximal_plus: return transform_maximal(f, eps, MaximalMode::plus);
      case MartingaleOp::maximal_minus: return transform_maximal(f, eps, MaximalMode::minus);
      case MartingaleOp::square: return square_function(f);
    }
    throw std::logic_error("unreachable");
  }
};

/// f with the leaves of `region` set to zero.
inline GridFunction zero_on(const GridFunction& f, NodeId region) {
  const Node& h = f.tree().node(region);
  std::vector<double> v(f.values().begin(), f.values().end());
  std::fill(v.begin() + static_cast<std::ptrdiff_t>(h.first), v.begin() + static_cast<std::ptrdiff_t>(h.last), 0.0);
  return f.with_values(std::move(v));
}

/// OSC_B(T(f 1_{X \ B*})): zero for every operator of the martingale family.
template <class Op>
double localization_defect(const Op& op, const GridFunction& f, NodeId b) {
  const NodeId h = hull(f.tree(), b).node;
  const GridFunction out = op(zero_on(f, h));
  return osc_ball(out, b);
}

/// OSC_B(T(1_{B''})) for a ball B'' containing B.
template <class Op>
double vanishing_defect(const Op& op, const std::shared_ptr<const MeasureTree>& tree, NodeId b, NodeId bpp) {
  if (!tree->contains(bpp, b)) throw std::invalid_argument("vanishing_defect needs B'' to contain B");
  const GridFunction out = op(GridFunction::indicator(tree, bpp));
  return osc_ball(out, b);
}

/// sup over lambda of lambda * mu{|g| > lambda}. The sup is approached as
/// lambda rises to each attained value v, where it equals v * mu{|g| >= v}.
inline double weak_l1_quantity(const GridFunction& g) {
  const auto& mu = g.tree().leaf_measures();
  std::vector<std::pair<double, double>> vm;
  for (std::size_t i = 0; i < g.size(); ++i) vm.emplace_back(std::abs(g[i]), mu[i]);
  std::sort(vm.begin(), vm.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  double best = 0.0, mass = 0.0;
  for (std::size_t k = 0; k < vm.size();) {
    const double v = vm[k].first;
    while (k < vm.size() && vm[k].first == v) mass += vm[k++].second;
    best = std::max(best, v * mass);
  }
  return best;
}

}  // namespace oscbox
