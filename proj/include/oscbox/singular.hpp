#pragma once

// Singular integral operators on the uniform circle grid t_j = j/n, whose
// dyadic arcs form the ball-basis: the discrete periodic Hilbert transform,
// convolution with a sampled kernel, polynomially modulated maximal operators
// of Carleson type, and the empirical BO_omega constant.

#include <cmath>
#include <complex>
#include <functional>
#include <memory>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "oscbox/ball_basis.hpp"
#include "oscbox/functionals.hpp"
#include "oscbox/random.hpp"

namespace oscbox {

inline bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

/// n equally spaced points on the circle R/Z with mass 1/n each, together
/// with their dyadic arc tree.
struct CircleGrid {
  std::size_t n = 0;
  int log2n = 0;
  std::shared_ptr<const MeasureTree> arcs;

  double point(std::size_t j) const { return static_cast<double>(j) / static_cast<double>(n); }
};

inline CircleGrid make_circle_grid(std::size_t n) {
  if (n < 8 || !is_power_of_two(n))
    throw std::invalid_argument("grid size must be a power of two >= 8, got " + std::to_string(n));
  CircleGrid g;
  g.n = n;
  while ((std::size_t{1} << g.log2n) < n) ++g.log2n;
  g.arcs = std::make_shared<const MeasureTree>(build_dyadic_tree(g.log2n, 1));
  return g;
}

/// Convolution kernel K(j) sampled at the grid offsets x - y = j/n, j = 1..n-1.
/// values[0] is the excluded diagonal and stays 0. The operator applies the
/// quadrature weight 1/n, so weighted(j) = K(j)/n is the matrix entry.
struct Kernel {
  std::size_t n = 0;
  std::vector<double> values;
  /// max_j |K(j)| * dist(j), dist(j) = min(j, n-j)/n: the size constant C.
  double size_bound = 0.0;
  /// (delta, omega(delta)) for delta = 2^-1 .. 2^-log2(n): the empirical
  /// modulus sup |K(j) - K(j')| dist(j) over |j - j'| <= delta dist(j) and
  /// dist(j) > 2 |j - j'|.
  std::vector<std::pair<double, double>> modulus;
  bool antisymmetric = false;

  double operator()(std::size_t j) const { return values.at(j % n); }
  double weighted(std::size_t j) const { return (*this)(j) / static_cast<double>(n); }
};

namespace detail {
inline double circle_dist(std::size_t j, std::size_t n) {
  const std::size_t d = std::min(j % n, n - j % n);
  return static_cast<double>(d) / static_cast<double>(n);
}

inline void fill_kernel_metadata(Kernel& k) {
  const std::size_t n = k.n;
  k.size_bound = 0.0;
  k.antisymmetric = true;
  for (std::size_t j = 1; j < n; ++j) {
    k.size_bound = std::max(k.size_bound, std::abs(k.values[j]) * circle_dist(j, n));
    if (k.values[j] != -k.values[n - j]) k.antisymmetric = false;
  }
  // modulus: bucket each (j, h) pair by t = h / dist(j) into the first dyadic
  // delta >= t, then take running maxima so omega is nondecreasing.
  int levels = 0;
  while ((std::size_t{1} << levels) < n) ++levels;
  std::vector<double> bucket(static_cast<std::size_t>(levels) + 1, 0.0);
  for (std::size_t j = 1; j <= n / 2; ++j) {
    const double dj = circle_dist(j, n);
    for (std::size_t h = 1; 2 * h < j; ++h) {
      const double t = static_cast<double>(h) / static_cast<double>(j);
      const double v = std::max(std::abs(k.values[j] - k.values[j + h]), std::abs(k.values[j] - k.values[j - h])) * dj;
      int b = 1;
      while (b < levels && std::ldexp(1.0, -(b + 1)) >= t) ++b;
      bucket[static_cast<std::size_t>(b)] = std::max(bucket[static_cast<std::size_t>(b)], v);
    }
  }
  k.modulus.clear();
  double run = 0.0;
  for (int b = levels; b >= 1; --b) {
    run = std::max(run, bucket[static_cast<std::size_t>(b)]);
    k.modulus.emplace_back(std::ldexp(1.0, -b), run);
  }
}
}  // namespace detail

/// Kernel from explicit samples K(1..n-1); values[0] is ignored.
inline Kernel make_kernel(std::vector<double> values) {
  Kernel k;
  k.n = values.size();
  if (!is_power_of_two(k.n) || k.n < 8) throw std::invalid_argument("kernel length must be a power of two >= 8");
  values[0] = 0.0;
  k.values = std::move(values);
  detail::fill_kernel_metadata(k);
  return k;
}

/// Periodic Hilbert kernel K(j) = cot(pi j / n), principal value (no diagonal).
inline Kernel hilbert_kernel(const CircleGrid& grid) {
  std::vector<double> v(grid.n, 0.0);
  const double n = static_cast<double>(grid.n);
  for (std::size_t j = 1; j < grid.n; ++j) v[j] = 1.0 / std::tan(std::numbers::pi * static_cast<double>(j) / n);
  // cot is antisymmetric about n/2; force exact antisymmetry of the samples.
  v[grid.n / 2] = 0.0;
  for (std::size_t j = grid.n / 2 + 1; j < grid.n; ++j) v[j] = -v[grid.n - j];
  return make_kernel(std::move(v));
}

/// Smallest C with |K(j) - K(j')| <= C (|j-j'|/j)(n/j) whenever j > 2|j-j'|,
/// over 1 <= j <= n/2.
inline double kernel_smoothness_constant(const Kernel& k) {
  const std::size_t n = k.n;
  double c = 0.0;
  for (std::size_t j = 1; j <= n / 2; ++j) {
    for (std::size_t h = 1; 2 * h < j; ++h) {
      const double bound_unit = (static_cast<double>(h) / static_cast<double>(j)) *
                                (static_cast<double>(n) / static_cast<double>(j));
      c = std::max(c, std::abs(k.values[j] - k.values[j + h]) / bound_unit);
      c = std::max(c, std::abs(k.values[j] - k.values[j - h]) / bound_unit);
    }
  }
  return c;
}

namespace detail {
/// Reversed, doubled kernel row so that for a fixed target i the weights of
/// sources j = 0..n-1 are contiguous: row[j - i + n] = K((i - j) mod n) / n.
inline std::vector<double> kernel_row(const Kernel& k) {
  const std::size_t n = k.n;
  std::vector<double> row(2 * n);
  const double w = 1.0 / static_cast<double>(n);
  for (std::size_t t = 0; t < 2 * n; ++t) row[t] = k.values[(2 * n - t) % n] * w;
  return row;
}

/// out[i - dst_first] = sum_{j in [src_first, src_last)} K(i - j) f(j) / n for
/// i in [dst_first, dst_last).
inline void convolve_window(std::span<const double> row, std::span<const double> f, std::size_t src_first,
                            std::size_t src_last, std::size_t dst_first, std::size_t dst_last, double* out) {
  const std::size_t n = f.size();
  for (std::size_t i = dst_first; i < dst_last; ++i) {
    const double* w = row.data() + n - i;
    // Four independent partial sums; the summation order is fixed, so results
    // do not depend on compiler vectorization.
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    std::size_t j = src_first;
    for (; j + 4 <= src_last; j += 4) {
      s0 += w[j] * f[j];
      s1 += w[j + 1] * f[j + 1];
      s2 += w[j + 2] * f[j + 2];
      s3 += w[j + 3] * f[j + 3];
    }
    for (; j < src_last; ++j) s0 += w[j] * f[j];
    out[i - dst_first] = (s0 + s1) + (s2 + s3);
  }
}
}  // namespace detail

/// (Tf)(i) = sum_{j != i} K(i - j mod n) f(j) / n by direct summation.
inline std::vector<double> cz_apply(const Kernel& kernel, std::span<const double> f) {
  if (f.size() != kernel.n)
    throw std::invalid_argument("function has " + std::to_string(f.size()) + " samples, kernel expects " +
                                std::to_string(kernel.n));
  const auto row = detail::kernel_row(kernel);
  std::vector<double> out(kernel.n);
  detail::convolve_window(row, f, 0, kernel.n, 0, kernel.n, out.data());
  return out;
}

/// Real polynomials Q(t) = sum_k c_k t^k used as modulations e^{2 pi i Q(t)}.
struct ModulationSet {
  std::vector<std::vector<double>> polynomials;  // coefficients, constant term first
  int max_degree = 2;

  void validate() const {
    if (polynomials.empty()) throw std::invalid_argument("modulation set is empty");
    for (const auto& p : polynomials)
      if (static_cast<int>(p.size()) - 1 > max_degree) throw std::invalid_argument("modulation degree too high");
  }

  static double eval(const std::vector<double>& p, double t) {
    double v = 0.0;
    for (auto it = p.rbegin(); it != p.rend(); ++it) v = v * t + *it;
    return v;
  }
};

/// The eight quadratics Q(t) = a t^2 + b t with a in {-2,-1,0,1}, b in {0,1}.
inline ModulationSet default_modulations() {
  ModulationSet m;
  for (double a : {-2.0, -1.0, 0.0, 1.0})
    for (double b : {0.0, 1.0}) m.polynomials.push_back({0.0, b, a});
  return m;
}

inline ModulationSet trivial_modulation() { return ModulationSet{{{0.0}}, 0}; }

namespace detail {
struct Modulated {
  std::vector<double> re, im;  // f cos(2 pi Q), f sin(2 pi Q)
};

inline std::vector<Modulated> modulate(const CircleGrid& grid, const ModulationSet& mods, std::span<const double> f) {
  std::vector<Modulated> out;
  for (const auto& p : mods.polynomials) {
    Modulated m{std::vector<double>(grid.n), std::vector<double>(grid.n)};
    for (std::size_t j = 0; j < grid.n; ++j) {
      // Reduce the phase mod 1 before scaling to keep cos/sin arguments small.
      double q = ModulationSet::eval(p, grid.point(j));
      q -= std::floor(q);
      const double ph = 2.0 * std::numbers::pi * q;
      m.re[j] = f[j] * std::cos(ph);
      m.im[j] = f[j] * std::sin(ph);
    }
    out.push_back(std::move(m));
  }
  return out;
}
}  // namespace detail

/// max over Q in mods of |sum_j K(i - j) e^{2 pi i Q(t_j)} f(j) / n|.
inline std::vector<double> carleson_maximal(const CircleGrid& grid, const Kernel& kernel, const ModulationSet& mods,
                                            std::span<const double> f) {
  mods.validate();
  if (f.size() != grid.n || kernel.n != grid.n) throw std::invalid_argument("grid, kernel and function sizes differ");
  std::vector<double> out(grid.n, 0.0);
  for (const auto& m : detail::modulate(grid, mods, f)) {
    const auto re = cz_apply(kernel, m.re);
    const auto im = cz_apply(kernel, m.im);
    for (std::size_t i = 0; i < grid.n; ++i) out[i] = std::max(out[i], std::hypot(re[i], im[i]));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Empirical BO_omega constant

enum class Omega { one, log };

inline Omega parse_omega(std::string_view s) {
  if (s == "one") return Omega::one;
  if (s == "log") return Omega::log;
  throw std::invalid_argument("unknown omega '" + std::string(s) + "' (expected one or log)");
}
inline std::string to_string(Omega w) { return w == Omega::one ? "one" : "log"; }

/// omega(t) for t = mu(A)/mu(B) >= 1: 1, or 1/log2(1 + t).
inline double omega_value(Omega w, double t) { return w == Omega::one ? 1.0 : 1.0 / std::log2(1.0 + t); }

/// Values of T(f 1_{X \ H}) on the leaves of ball B, where H = hull(B).
using OffHullFn = std::function<std::vector<double>(const Node& hull, const Node& ball)>;
/// Prepares an OffHullFn for one input function.
using OffHullFactory = std::function<OffHullFn(const GridFunction& f)>;

/// Wraps any operator on grid functions by direct evaluation of T(f 1_{X\H}).
inline OffHullFactory off_hull_direct(std::function<GridFunction(const GridFunction&)> op) {
  return [op = std::move(op)](const GridFunction& f) -> OffHullFn {
    return [op, f](const Node& h, const Node& b) {
      std::vector<double> g(f.values().begin(), f.values().end());
      std::fill(g.begin() + static_cast<std::ptrdiff_t>(h.first), g.begin() + static_cast<std::ptrdiff_t>(h.last), 0.0);
      const GridFunction out = op(f.with_values(std::move(g)));
      return std::vector<double>(out.values().begin() + static_cast<std::ptrdiff_t>(b.first),
                                 out.values().begin() + static_cast<std::ptrdiff_t>(b.last));
    };
  };
}

/// Convolution operator, using T(f 1_{X\H}) = Tf - T(f 1_H) so each ball costs
/// |B| |H| operations.
inline OffHullFactory off_hull_convolution(const Kernel& kernel) {
  auto row = std::make_shared<const std::vector<double>>(detail::kernel_row(kernel));
  return [row, n = kernel.n](const GridFunction& f) -> OffHullFn {
    if (f.size() != n) throw std::invalid_argument("function size does not match the kernel");
    auto vals = std::make_shared<const std::vector<double>>(f.values().begin(), f.values().end());
    auto full = std::make_shared<std::vector<double>>(n);
    detail::convolve_window(*row, *vals, 0, n, 0, n, full->data());
    return [row, vals, full](const Node& h, const Node& b) {
      std::vector<double> local(b.last - b.first);
      detail::convolve_window(*row, *vals, h.first, h.last, b.first, b.last, local.data());
      for (std::size_t i = b.first; i < b.last; ++i) local[i - b.first] = (*full)[i] - local[i - b.first];
      return local;
    };
  };
}

/// Carleson maximal operator, one linear split per modulation.
inline OffHullFactory off_hull_carleson(const CircleGrid& grid, const Kernel& kernel, const ModulationSet& mods) {
  mods.validate();
  auto row = std::make_shared<const std::vector<double>>(detail::kernel_row(kernel));
  return [row, grid, mods](const GridFunction& f) -> OffHullFn {
    struct Part {
      std::vector<double> re, im, full_re, full_im;
    };
    auto parts = std::make_shared<std::vector<Part>>();
    const std::size_t n = grid.n;
    for (auto& m : detail::modulate(grid, mods, f.values())) {
      Part p{std::move(m.re), std::move(m.im), std::vector<double>(n), std::vector<double>(n)};
      detail::convolve_window(*row, p.re, 0, n, 0, n, p.full_re.data());
      detail::convolve_window(*row, p.im, 0, n, 0, n, p.full_im.data());
      parts->push_back(std::move(p));
    }
    return [row, parts](const Node& h, const Node& b) {
      const std::size_t len = b.last - b.first;
      std::vector<double> out(len, 0.0), lr(len), li(len);
      for (const Part& p : *parts) {
        detail::convolve_window(*row, p.re, h.first, h.last, b.first, b.last, lr.data());
        detail::convolve_window(*row, p.im, h.first, h.last, b.first, b.last, li.data());
        for (std::size_t k = 0; k < len; ++k)
          out[k] = std::max(out[k], std::hypot(p.full_re[b.first + k] - lr[k], p.full_im[b.first + k] - li[k]));
      }
      return out;
    };
  };
}

struct BoConstantResult {
  double constant = 0.0;  // max ratio observed
  std::size_t ratios = 0;  // ratios evaluated
  std::size_t skipped = 0;  // 0/0 cases
  std::size_t argmax_trial = 0;
  NodeId argmax_ball = kNoNode;
};

/// Max over `trials` random f and all balls B of
///   OSC_B(T(f 1_{X\B*})) / sup_{A >= B} omega(mu(A)/mu(B)) <f>_A.
/// 0/0 is skipped; a positive numerator over a zero denominator is an error.
inline BoConstantResult bo_omega_constant(const OffHullFactory& op, std::shared_ptr<const MeasureTree> tree,
                                          Omega omega, std::size_t trials, std::uint64_t seed,
                                          FunctionFamily family = FunctionFamily::random_signs, double r = 1.0,
                                          std::uint64_t stream = 0) {
  detail::require_r(r);
  const auto hulls = hull_table(*tree);
  BoConstantResult res;
  for (std::size_t trial = 0; trial < trials; ++trial) {
    Rng rng = trial_rng(seed, stream, trial);
    const GridFunction f = sample_function(family, tree, rng);
    const OffHullFn eval = op(f);
    std::vector<double> avg(tree->size());
    for (const Node& a : tree->nodes()) avg[static_cast<std::size_t>(a.id)] = lr_average(f, a.id, r);
    for (const Node& b : tree->nodes()) {
      const Node& h = tree->node(hulls[static_cast<std::size_t>(b.id)]);
      const auto vals = eval(h, b);
      const auto [lo, hi] = std::minmax_element(vals.begin(), vals.end());
      const double num = *hi - *lo;
      double den = 0.0;
      for (NodeId a = b.id; a != kNoNode; a = tree->parent(a))
        den = std::max(den, omega_value(omega, tree->measure(a) / b.measure) * avg[static_cast<std::size_t>(a)]);
      if (den == 0.0) {
        if (num == 0.0) {
          ++res.skipped;
          continue;
        }
        throw std::domain_error("positive oscillation with zero denominator at ball " + std::to_string(b.id));
      }
      ++res.ratios;
      const double ratio = num / den;
      if (ratio > res.constant) {
        res.constant = ratio;
        res.argmax_trial = trial;
        res.argmax_ball = b.id;
      }
    }
  }
  return res;
}

inline nlohmann::json to_json(const Kernel& k) {
  return {{"n", k.n},
          {"values", k.values},
          {"size_bound", k.size_bound},
          {"antisymmetric", k.antisymmetric}};
}

}  // namespace oscbox
