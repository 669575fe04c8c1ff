#pragma once

// Seeded randomness for experiments. Every trial gets its own generator,
// derived from (seed, stream, trial) by splitmix64, so results do not depend
// on how trials are scheduled. Floating draws use the raw 64-bit output of
// mt19937_64, which is fully specified by the standard; the library
// distributions are not, so they are avoided here.

#include <cstdint>
#include <memory>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "oscbox/functionals.hpp"

namespace oscbox {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t bits() { return eng_(); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("below(0)");
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t x;
    do x = eng_();
    while (x >= limit);
    return x % n;
  }
  double sign() { return (eng_() >> 63) ? 1.0 : -1.0; }
  bool coin(double p = 0.5) { return uniform() < p; }

 private:
  std::mt19937_64 eng_;
};

/// Independent generator for one trial of one experiment stream.
inline Rng trial_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t trial) {
  return Rng(splitmix64(splitmix64(splitmix64(seed) ^ stream) ^ trial));
}

enum class FunctionFamily { random_uniform, random_signs, staircase, indicator };

inline FunctionFamily parse_family(std::string_view s) {
  if (s == "random-uniform") return FunctionFamily::random_uniform;
  if (s == "random-signs") return FunctionFamily::random_signs;
  if (s == "staircase") return FunctionFamily::staircase;
  if (s == "indicator") return FunctionFamily::indicator;
  throw std::invalid_argument("unknown function family '" + std::string(s) + "'");
}

inline std::string to_string(FunctionFamily f) {
  switch (f) {
    case FunctionFamily::random_uniform: return "random-uniform";
    case FunctionFamily::random_signs: return "random-signs";
    case FunctionFamily::staircase: return "staircase";
    case FunctionFamily::indicator: return "indicator";
  }
  return "?";
}

/// f_N = sum_{k=1..N} 1_[0, 2^-k) on a binary tree of height N, i.e. the leaf
/// with index i (of 2^N) takes the value #{k : i < 2^(N-k)}.
inline GridFunction staircase(std::shared_ptr<const MeasureTree> tree) {
  const int depth = tree->height();
  const std::size_t n = tree->leaf_count();
  if (n != (std::size_t{1} << depth))
    throw std::invalid_argument("staircase needs a complete binary tree");
  std::vector<double> v(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (int k = 1; k <= depth; ++k)
      if (i < (std::size_t{1} << (depth - k))) v[i] += 1.0;
  return GridFunction(std::move(tree), std::move(v));
}

/// One member of a function family. Random families use `rng`; the indicator
/// family picks a uniformly random node.
inline GridFunction sample_function(FunctionFamily fam, std::shared_ptr<const MeasureTree> tree, Rng& rng) {
  const std::size_t n = tree->leaf_count();
  switch (fam) {
    case FunctionFamily::random_uniform: {
      std::vector<double> v(n);
      for (double& x : v) x = rng.uniform(-1.0, 1.0);
      return GridFunction(std::move(tree), std::move(v));
    }
    case FunctionFamily::random_signs: {
      std::vector<double> v(n);
      for (double& x : v) x = rng.sign();
      return GridFunction(std::move(tree), std::move(v));
    }
    case FunctionFamily::staircase:
      return staircase(std::move(tree));
    case FunctionFamily::indicator: {
      const auto id = static_cast<NodeId>(rng.below(tree->size()));
      return GridFunction::indicator(std::move(tree), id);
    }
  }
  throw std::logic_error("unreachable");
}

}  // namespace oscbox
