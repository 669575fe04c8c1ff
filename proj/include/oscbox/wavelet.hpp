#pragma once

// Haar instantiation of a wavelet-type system on [0,1], sampled on the grid
// t_i = i/n, with coefficient multipliers T_Lambda and the finite-rank kernel
// K_Lambda(x, t) = sum_k lambda_k phi_k(x) phi_k(t).

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "oscbox/singular.hpp"

namespace oscbox {

/// One generator. Index k = 2^m + j (level m >= 0, 1 <= j <= 2^m) for the Haar
/// function on [(j-1)/2^m, j/2^m); k = 0 is the constant. Index 1 is unused by
/// the Haar instantiation.
struct HaarGenerator {
  std::size_t k = 0;
  int level = -1;  // -1 for the constant
  std::size_t j = 0;
  double center = 0.5;
  std::size_t first = 0;  // support [first, last) in grid indices
  std::size_t last = 0;
  double height = 1.0;  // 2^(m/2)

  /// Value at grid point i.
  double operator()(std::size_t i) const {
    if (i < first || i >= last) return 0.0;
    if (level < 0) return 1.0;
    return i < (first + last) / 2 ? height : -height;
  }
};

struct WaveletSystem {
  std::size_t n = 0;
  std::vector<HaarGenerator> generators;  // generators[0] is the constant
  double delta = 0.5;  // decay exponent of xi(x) = (1 + |x|)^-(1 + delta)
  double alpha = 1.0;  // Hoelder exponent in the smoothness bound
};

/// The n Haar functions resolved by an n-point grid, ordered by index k.
inline WaveletSystem haar_system(const CircleGrid& grid, double delta = 0.5, double alpha = 1.0) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0,1)");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in (0,1]");
  WaveletSystem s;
  s.n = grid.n;
  s.delta = delta;
  s.alpha = alpha;
  s.generators.push_back(HaarGenerator{0, -1, 0, 0.5, 0, grid.n, 1.0});
  for (int m = 0; m < grid.log2n; ++m) {
    const std::size_t count = std::size_t{1} << m;
    const std::size_t width = grid.n >> m;
    for (std::size_t j = 1; j <= count; ++j) {
      HaarGenerator g;
      g.k = count + j;
      g.level = m;
      g.j = j;
      g.center = static_cast<double>(2 * j - 1) / static_cast<double>(std::size_t{1} << (m + 1));
      g.first = (j - 1) * width;
      g.last = j * width;
      g.height = std::sqrt(static_cast<double>(count));
      s.generators.push_back(g);
    }
  }
  return s;
}

namespace detail {
inline void require_lambdas(const WaveletSystem& s, std::span<const double> lambdas) {
  if (lambdas.size() != s.generators.size())
    throw std::invalid_argument("need one lambda per generator (" + std::to_string(s.generators.size()) + ")");
  for (double l : lambdas)
    if (!(std::abs(l) <= 1.0)) throw std::invalid_argument("||Lambda|| must be <= 1");
}
}  // namespace detail

/// Coefficients <f, phi_k> = sum_i f(i) phi_k(i) / n.
inline std::vector<double> haar_analysis(const WaveletSystem& s, std::span<const double> f) {
  if (f.size() != s.n) throw std::invalid_argument("function size does not match the system");
  std::vector<double> c(s.generators.size(), 0.0);
  const double w = 1.0 / static_cast<double>(s.n);
  for (std::size_t k = 0; k < s.generators.size(); ++k) {
    const auto& g = s.generators[k];
    double acc = 0.0;
    for (std::size_t i = g.first; i < g.last; ++i) acc += f[i] * g(i);
    c[k] = acc * w;
  }
  return c;
}

/// sum_k c_k phi_k.
inline std::vector<double> haar_synthesis(const WaveletSystem& s, std::span<const double> coeffs) {
  std::vector<double> f(s.n, 0.0);
  for (std::size_t k = 0; k < s.generators.size(); ++k) {
    const auto& g = s.generators[k];
    for (std::size_t i = g.first; i < g.last; ++i) f[i] += coeffs[k] * g(i);
  }
  return f;
}

/// T_Lambda f = sum_k lambda_k <f, phi_k> phi_k.
inline std::vector<double> wavelet_multiplier_apply(const WaveletSystem& s, std::span<const double> lambdas,
                                                    std::span<const double> f) {
  detail::require_lambdas(s, lambdas);
  auto c = haar_analysis(s, f);
  for (std::size_t k = 0; k < c.size(); ++k) c[k] *= lambdas[k];
  return haar_synthesis(s, c);
}

/// Dense n x n matrix K_Lambda(t_a, t_b), row-major.
inline std::vector<double> wavelet_kernel(const WaveletSystem& s, std::span<const double> lambdas) {
  detail::require_lambdas(s, lambdas);
  const std::size_t n = s.n;
  std::vector<double> k(n * n, 0.0);
  for (std::size_t g = 0; g < s.generators.size(); ++g) {
    const auto& gen = s.generators[g];
    const double lam = lambdas[g];
    if (lam == 0.0) continue;
    for (std::size_t a = gen.first; a < gen.last; ++a) {
      const double va = lam * gen(a);
      double* row = k.data() + a * n;
      for (std::size_t b = gen.first; b < gen.last; ++b) row[b] += va * gen(b);
    }
  }
  return k;
}

/// sup over a != b of |K(t_a, t_b)| |t_a - t_b| (distance on [0,1]).
inline double kernel_size_constant(std::span<const double> kernel, std::size_t n) {
  double c = 0.0;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      if (a != b) {
        const double d = std::abs(static_cast<double>(a) - static_cast<double>(b)) / static_cast<double>(n);
        c = std::max(c, std::abs(kernel[a * n + b]) * d);
      }
  return c;
}

/// Smallest c with |phi_k(t_i)| <= c 2^(m/2) xi(2^m (t_i - t_k)) over all
/// generators k >= 1 and grid points.
inline double haar_decay_constant(const WaveletSystem& s) {
  double c = 0.0;
  for (const auto& g : s.generators) {
    if (g.level < 0) continue;
    const double scale = std::ldexp(1.0, g.level);
    for (std::size_t i = 0; i < s.n; ++i) {
      const double x = scale * (static_cast<double>(i) / static_cast<double>(s.n) - g.center);
      const double xi = std::pow(1.0 + std::abs(x), -(1.0 + s.delta));
      c = std::max(c, std::abs(g(i)) / (g.height * xi));
    }
  }
  return c;
}

/// Smallest c in the smoothness bound
///   |phi_k(t) - phi_k(t')| <= c 2^(m/2) (2^m |t-t'|)^alpha xi(2^m (t - t_k))
/// over grid pairs with 0 < |t - t'| <= 2^-m. Haar functions jump, so this
/// grows with the resolution; it is reported, not assumed.
inline double haar_smoothness_constant(const WaveletSystem& s) {
  double c = 0.0;
  for (const auto& g : s.generators) {
    if (g.level < 0) continue;
    const double scale = std::ldexp(1.0, g.level);
    const std::size_t reach = s.n >> g.level;
    // Only pairs straddling a jump give nonzero differences; check those
    // within one support width of the support.
    const std::size_t lo = g.first >= reach ? g.first - reach : 0;
    const std::size_t hi = std::min(s.n, g.last + reach);
    for (std::size_t i = lo; i < hi; ++i) {
      const double x = scale * (static_cast<double>(i) / static_cast<double>(s.n) - g.center);
      const double xi = std::pow(1.0 + std::abs(x), -(1.0 + s.delta));
      for (std::size_t i2 = (i >= reach ? i - reach : 0); i2 <= std::min(s.n - 1, i + reach); ++i2) {
        if (i2 == i) continue;
        const double diff = std::abs(g(i) - g(i2));
        if (diff == 0.0) continue;
        const double dist = std::abs(static_cast<double>(i) - static_cast<double>(i2)) / static_cast<double>(s.n);
        c = std::max(c, diff / (g.height * std::pow(scale * dist, s.alpha) * xi));
      }
    }
  }
  return c;
}

}  // namespace oscbox
