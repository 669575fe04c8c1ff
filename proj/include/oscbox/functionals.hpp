#pragma once

// Averages, oscillations and BMO-type norms of piecewise-constant functions on
// the leaves of a filtration tree.

#include <algorithm>
#include <cmath>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "oscbox/ball_basis.hpp"
#include "oscbox/measure_tree.hpp"

namespace oscbox {

/// A function that is constant on every leaf of a tree. Values follow the
/// tree's leaf order.
class GridFunction {
 public:
  GridFunction() = default;
  GridFunction(std::shared_ptr<const MeasureTree> tree, std::vector<double> values)
      : tree_(std::move(tree)), values_(std::move(values)) {
    if (!tree_) throw std::invalid_argument("grid function needs a tree");
    if (values_.size() != tree_->leaf_count())
      throw std::invalid_argument("expected " + std::to_string(tree_->leaf_count()) +
                                  " leaf values, got " + std::to_string(values_.size()));
    for (double v : values_)
      if (!std::isfinite(v)) throw std::invalid_argument("grid function values must be finite");
  }

  static GridFunction constant(std::shared_ptr<const MeasureTree> tree, double c) {
    const auto n = tree->leaf_count();
    return GridFunction(std::move(tree), std::vector<double>(n, c));
  }

  /// Indicator of a node (1 on its leaves, 0 elsewhere).
  static GridFunction indicator(std::shared_ptr<const MeasureTree> tree, NodeId id) {
    std::vector<double> v(tree->leaf_count(), 0.0);
    const Node& n = tree->node(id);
    std::fill(v.begin() + static_cast<std::ptrdiff_t>(n.first),
              v.begin() + static_cast<std::ptrdiff_t>(n.last), 1.0);
    return GridFunction(std::move(tree), std::move(v));
  }

  const MeasureTree& tree() const { return *tree_; }
  const std::shared_ptr<const MeasureTree>& tree_ptr() const { return tree_; }
  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }

  /// Same tree, new values.
  GridFunction with_values(std::vector<double> v) const { return GridFunction(tree_, std::move(v)); }

  double sup_norm() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
  }
  double l1_norm() const {
    const auto& mu = tree_->leaf_measures();
    double s = 0.0;
    for (std::size_t i = 0; i < values_.size(); ++i) s += std::abs(values_[i]) * mu[i];
    return s;
  }
  double l2_norm_sq() const {
    const auto& mu = tree_->leaf_measures();
    double s = 0.0;
    for (std::size_t i = 0; i < values_.size(); ++i) s += values_[i] * values_[i] * mu[i];
    return s;
  }

 private:
  std::shared_ptr<const MeasureTree> tree_;
  std::vector<double> values_;
};

struct OscParams {
  double r = 1.0;
  double alpha = 0.5;
  double beta = 0.5;

  void validate() const {
    if (!(r >= 1.0) || !std::isfinite(r)) throw std::invalid_argument("r must be >= 1");
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0,1)");
    if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("beta must lie in (0,1)");
  }
};

namespace detail {
inline void require_r(double r) {
  if (!(r >= 1.0) || !std::isfinite(r)) throw std::invalid_argument("r must be >= 1");
}
inline double pow_r(double x, double r) {
  if (r == 1.0) return x;
  if (r == 2.0) return x * x;
  return std::pow(x, r);
}
inline double root_r(double x, double r) {
  if (r == 1.0) return x;
  if (r == 2.0) return std::sqrt(x);
  return std::pow(x, 1.0 / r);
}
}  // namespace detail

/// Measure-weighted average of f over b.
inline double mean(const GridFunction& f, NodeId b) {
  const MeasureTree& t = f.tree();
  const Node& n = t.node(b);
  const auto& mu = t.leaf_measures();
  double s = 0.0;
  for (std::size_t i = n.first; i < n.last; ++i) s += f[i] * mu[i];
  return s / n.measure;
}
inline double mean(const GridFunction& f, Ball b) { return mean(f, b.node); }

/// r-average of |f| over b.
inline double lr_average(const GridFunction& f, NodeId b, double r) {
  detail::require_r(r);
  const MeasureTree& t = f.tree();
  const Node& n = t.node(b);
  const auto& mu = t.leaf_measures();
  double s = 0.0;
  for (std::size_t i = n.first; i < n.last; ++i) s += detail::pow_r(std::abs(f[i]), r) * mu[i];
  return detail::root_r(s / n.measure, r);
}
inline double lr_average(const GridFunction& f, Ball b, double r) { return lr_average(f, b.node, r); }

/// Largest r-average of |f| over the balls containing b.
inline double starred_average(const GridFunction& f, NodeId b, double r) {
  double best = 0.0;
  for (NodeId a : f.tree().ancestors(b)) best = std::max(best, lr_average(f, a, r));
  return best;
}
inline double starred_average(const GridFunction& f, Ball b, double r) { return starred_average(f, b.node, r); }

/// r-average of |f - f_b| over b.
inline double sharp_average(const GridFunction& f, NodeId b, double r) {
  detail::require_r(r);
  const MeasureTree& t = f.tree();
  const Node& n = t.node(b);
  const auto& mu = t.leaf_measures();
  const double m = mean(f, b);
  double s = 0.0;
  for (std::size_t i = n.first; i < n.last; ++i) s += detail::pow_r(std::abs(f[i] - m), r) * mu[i];
  return detail::root_r(s / n.measure, r);
}
inline double sharp_average(const GridFunction& f, Ball b, double r) { return sharp_average(f, b.node, r); }

inline double starred_sharp_average(const GridFunction& f, NodeId b, double r) {
  double best = 0.0;
  for (NodeId a : f.tree().ancestors(b)) best = std::max(best, sharp_average(f, a, r));
  return best;
}
inline double starred_sharp_average(const GridFunction& f, Ball b, double r) {
  return starred_sharp_average(f, b.node, r);
}

/// Oscillation sup - inf of f over a nonempty set of leaves (given by id).
inline double osc_set(const GridFunction& f, std::span<const NodeId> leaf_set) {
  if (leaf_set.empty()) throw std::invalid_argument("oscillation over an empty set is undefined");
  const MeasureTree& t = f.tree();
  double lo = 0.0, hi = 0.0;
  bool first = true;
  for (NodeId id : leaf_set) {
    const Node& n = t.node(id);
    if (!n.is_leaf()) throw std::invalid_argument("osc_set expects leaf ids");
    const double v = f[static_cast<std::size_t>(n.leaf_index)];
    if (first) {
      lo = hi = v;
      first = false;
    } else {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  return hi - lo;
}

/// Oscillation over the leaves of a ball.
inline double osc_ball(std::span<const double> values, const Node& b) {
  auto [lo, hi] = std::minmax_element(values.begin() + static_cast<std::ptrdiff_t>(b.first),
                                      values.begin() + static_cast<std::ptrdiff_t>(b.last));
  return *hi - *lo;
}
inline double osc_ball(const GridFunction& f, NodeId b) { return osc_ball(f.values(), f.tree().node(b)); }

namespace detail {
struct Weighted {
  double value;
  double measure;
};

/// Shortest value range [a, b] whose captured measure strictly exceeds
/// `target`, over (value, measure) pairs sorted by value.
inline double min_window(std::span<const Weighted> sorted, double target) {
  const std::size_t m = sorted.size();
  std::vector<double> prefix(m + 1, 0.0);
  for (std::size_t i = 0; i < m; ++i) prefix[i + 1] = prefix[i] + sorted[i].measure;
  double best = std::numeric_limits<double>::infinity();
  std::size_t j = 0;
  for (std::size_t i = 0; i < m; ++i) {
    if (j < i) j = i;
    while (j < m && !(prefix[j + 1] - prefix[i] > target)) ++j;
    if (j == m) break;
    best = std::min(best, sorted[j].value - sorted[i].value);
  }
  return best;
}

inline void require_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0,1)");
}
}  // namespace detail

/// Smallest oscillation of f over subsets of b with measure > alpha * mu(b).
inline double alpha_osc(const GridFunction& f, NodeId b, double alpha) {
  detail::require_alpha(alpha);
  const MeasureTree& t = f.tree();
  const Node& n = t.node(b);
  const auto& mu = t.leaf_measures();
  std::vector<detail::Weighted> w;
  w.reserve(n.last - n.first);
  for (std::size_t i = n.first; i < n.last; ++i) w.push_back({f[i], mu[i]});
  std::stable_sort(w.begin(), w.end(), [](const auto& a, const auto& c) { return a.value < c.value; });
  return detail::min_window(w, alpha * n.measure);
}
inline double alpha_osc(const GridFunction& f, Ball b, double alpha) { return alpha_osc(f, b.node, alpha); }

/// alpha_osc for every node at once; sorted leaf lists are merged bottom-up.
inline std::vector<double> alpha_osc_all(const GridFunction& f, double alpha) {
  detail::require_alpha(alpha);
  const MeasureTree& t = f.tree();
  const auto& mu = t.leaf_measures();
  std::vector<std::vector<detail::Weighted>> sorted(t.size());
  std::vector<double> out(t.size(), 0.0);
  for (NodeId id : t.bottom_up()) {
    const Node& n = t.node(id);
    auto& mine = sorted[static_cast<std::size_t>(id)];
    if (n.is_leaf()) {
      const auto li = static_cast<std::size_t>(n.leaf_index);
      mine.push_back({f[li], mu[li]});
    } else {
      for (NodeId c : n.children) {
        auto& theirs = sorted[static_cast<std::size_t>(c)];
        const auto mid = static_cast<std::ptrdiff_t>(mine.size());
        mine.insert(mine.end(), theirs.begin(), theirs.end());
        std::inplace_merge(mine.begin(), mine.begin() + mid, mine.end(),
                           [](const auto& a, const auto& b) { return a.value < b.value; });
        std::vector<detail::Weighted>().swap(theirs);
      }
    }
    out[static_cast<std::size_t>(id)] = detail::min_window(mine, alpha * n.measure);
  }
  return out;
}

/// sup over balls of the mean oscillation (a seminorm; constants have norm 0).
inline double bmo_norm(const GridFunction& f, double r) {
  double best = 0.0;
  for (const Node& n : f.tree().nodes()) best = std::max(best, sharp_average(f, n.id, r));
  return best;
}

/// sup over balls of the alpha-oscillation.
inline double bmo_alpha_norm(const GridFunction& f, double alpha) {
  const auto all = alpha_osc_all(f, alpha);
  return *std::max_element(all.begin(), all.end());
}

/// Fractions mu{x in b : |f - f_b| > lambda} / mu(b) for each lambda.
inline std::vector<double> jn_profile(const GridFunction& f, NodeId b, std::span<const double> lambdas) {
  for (std::size_t k = 0; k < lambdas.size(); ++k) {
    if (!(lambdas[k] >= 0.0)) throw std::invalid_argument("lambdas must be nonnegative");
    if (k > 0 && !(lambdas[k] > lambdas[k - 1])) throw std::invalid_argument("lambdas must be increasing");
  }
  const MeasureTree& t = f.tree();
  const Node& n = t.node(b);
  const auto& mu = t.leaf_measures();
  const double m = mean(f, b);
  std::vector<detail::Weighted> dev;
  for (std::size_t i = n.first; i < n.last; ++i) dev.push_back({std::abs(f[i] - m), mu[i]});
  std::sort(dev.begin(), dev.end(), [](const auto& a, const auto& c) { return a.value > c.value; });
  // Largest lambda first, so the level set only grows.
  std::vector<double> out(lambdas.size());
  std::size_t k = 0;
  double above = 0.0;
  for (std::size_t i = lambdas.size(); i-- > 0;) {
    while (k < dev.size() && dev[k].value > lambdas[i]) above += dev[k++].measure;
    out[i] = std::min(1.0, above / n.measure);
  }
  return out;
}
inline std::vector<double> jn_profile(const GridFunction& f, Ball b, std::span<const double> lambdas) {
  return jn_profile(f, b.node, lambdas);
}

/// Both sides of an inequality lhs <= C * rhs with the constant C left out.
struct DriftCheck {
  double lhs = 0.0;
  double rhs = 0.0;

  /// lhs / rhs, with 0/0 reported as 0 (the inequality is vacuous there).
  double ratio() const {
    if (rhs == 0.0) return lhs == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return lhs / rhs;
  }
  bool holds(double constant) const { return ratio() <= constant; }
};

namespace detail {
inline void require_ordered_pair(const MeasureTree& t, NodeId a, NodeId b) {
  if (!t.intersects(a, b)) throw std::invalid_argument("balls must intersect");
  if (t.measure(a) > t.measure(b)) throw std::invalid_argument("need mu(a) <= mu(b)");
}
}  // namespace detail

/// |f_a - f_b| against (mu(b)/mu(a))^(1/r) * <f>*_{#,a}.
inline DriftCheck check_mean_drift(const GridFunction& f, NodeId a, NodeId b, double r) {
  detail::require_r(r);
  const MeasureTree& t = f.tree();
  detail::require_ordered_pair(t, a, b);
  const double lhs = std::abs(mean(f, a) - mean(f, b));
  const double rhs = std::pow(t.measure(b) / t.measure(a), 1.0 / r) * starred_sharp_average(f, a, r);
  return {lhs, rhs};
}

/// <f - f_a>_b against (1 + log2(mu(b)/mu(a))) * <f>*_{#,a}.
inline DriftCheck check_log_drift(const GridFunction& f, NodeId a, NodeId b, double r) {
  detail::require_r(r);
  const MeasureTree& t = f.tree();
  detail::require_ordered_pair(t, a, b);
  const double fa = mean(f, a);
  const Node& nb = t.node(b);
  const auto& mu = t.leaf_measures();
  double s = 0.0;
  for (std::size_t i = nb.first; i < nb.last; ++i) s += detail::pow_r(std::abs(f[i] - fa), r) * mu[i];
  const double lhs = detail::root_r(s / nb.measure, r);
  const double rhs = (1.0 + std::log2(t.measure(b) / t.measure(a))) * starred_sharp_average(f, a, r);
  return {lhs, rhs};
}

/// {"tree_ref": ..., "values": [...]}; the tree is serialized on its own.
inline nlohmann::json to_json(const GridFunction& f, const std::string& tree_ref) {
  return {{"tree_ref", tree_ref}, {"values", std::vector<double>(f.values().begin(), f.values().end())}};
}

inline GridFunction grid_function_from_json(const nlohmann::json& j, std::shared_ptr<const MeasureTree> tree) {
  return GridFunction(std::move(tree), j.at("values").get<std::vector<double>>());
}

}  // namespace oscbox
