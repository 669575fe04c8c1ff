#pragma once

// Brute-force reference computations. These follow the definitions literally
// and share no code with the fast paths they are used to check.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "oscbox/functionals.hpp"

namespace oscbox::oracle {

/// min over leaf subsets E of b with mu(E) > alpha mu(b) of max_E f - min_E f.
/// Exponential in the leaf count of b; refuses more than 20 leaves.
inline double alpha_osc_subsets(const GridFunction& f, NodeId b, double alpha) {
  const MeasureTree& t = f.tree();
  const Node& n = t.node(b);
  const std::size_t m = n.last - n.first;
  if (m > 20) throw std::length_error("subset oracle limited to 20 leaves");
  const auto& mu = t.leaf_measures();
  const double target = alpha * n.measure;
  double best = std::numeric_limits<double>::infinity();
  for (std::uint32_t mask = 1; mask < (std::uint32_t{1} << m); ++mask) {
    double mass = 0.0;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < m; ++k) {
      if (!(mask >> k & 1U)) continue;
      mass += mu[n.first + k];
      lo = std::min(lo, f[n.first + k]);
      hi = std::max(hi, f[n.first + k]);
    }
    if (mass > target) best = std::min(best, hi - lo);
  }
  return best;
}

/// The largest ball containing b with measure at most 2 mu(b), found by
/// scanning every node.
inline NodeId hull_by_scan(const MeasureTree& t, NodeId b) {
  NodeId best = b;
  for (const Node& a : t.nodes()) {
    if (!t.contains(a.id, b) || a.measure > 2.0 * t.measure(b)) continue;
    if (a.measure > t.measure(best)) best = a.id;
  }
  return best;
}

/// Mean oscillation sup by evaluating every ball from its leaves.
inline double bmo_norm_direct(const GridFunction& f) {
  const MeasureTree& t = f.tree();
  const auto& mu = t.leaf_measures();
  double best = 0.0;
  for (const Node& n : t.nodes()) {
    double s = 0.0;
    for (std::size_t i = n.first; i < n.last; ++i) s += f[i] * mu[i];
    const double m = s / n.measure;
    double dev = 0.0;
    for (std::size_t i = n.first; i < n.last; ++i) dev += std::abs(f[i] - m) * mu[i];
    best = std::max(best, dev / n.measure);
  }
  return best;
}

}  // namespace oscbox::oracle
