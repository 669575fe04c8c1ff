#include <gtest/gtest.h>

#include <cmath>

#include "oscbox/functionals.hpp"
#include "oscbox/harness.hpp"
#include "oscbox/oracles.hpp"
#include "oscbox/report.hpp"

using namespace oscbox;

namespace {

std::shared_ptr<const MeasureTree> tree_of(int depth) { return dyadic(depth); }

// 1 on [0, 1/2), 0 on [1/2, 1).
GridFunction left_half(int depth) { return GridFunction::indicator(tree_of(depth), 1); }

GridFunction random_function(std::uint64_t seed, int depth) {
  Rng rng(seed);
  return sample_function(FunctionFamily::random_uniform, tree_of(depth), rng);
}

}  // namespace

TEST(GridFunction, RejectsWrongLengthAndNonFinite) {
  auto t = tree_of(2);
  EXPECT_THROW(GridFunction(t, {1.0, 2.0}), std::invalid_argument);
  EXPECT_THROW(GridFunction(t, {1.0, 2.0, NAN, 0.0}), std::invalid_argument);
}

TEST(GridFunction, JsonRoundTrip) {
  const GridFunction f = random_function(3, 4);
  const auto j = to_json(f, "dyadic-4");
  EXPECT_EQ(j.at("tree_ref"), "dyadic-4");
  const GridFunction g = grid_function_from_json(j, f.tree_ptr());
  for (std::size_t i = 0; i < f.size(); ++i) EXPECT_EQ(f[i], g[i]);
}

TEST(Mean, Examples) {
  EXPECT_EQ(mean(left_half(3), 0), 0.5);
  const GridFunction c = GridFunction::constant(tree_of(3), 2.5);
  for (const Node& n : c.tree().nodes()) EXPECT_EQ(mean(c, n.id), 2.5);
  // Indicator of the first 1/8 leaf, averaged over its parent.
  const GridFunction leaf = GridFunction::indicator(tree_of(3), 7);
  EXPECT_EQ(mean(leaf, 3), 0.5);
}

TEST(LrAverage, Examples) {
  EXPECT_EQ(lr_average(GridFunction::constant(tree_of(2), -3.0), 0, 2.0), 3.0);
  auto t = tree_of(1);
  const GridFunction pm(t, {1.0, -1.0});
  for (double r : {1.0, 2.0, 3.5}) EXPECT_DOUBLE_EQ(lr_average(pm, 0, r), 1.0);
  const GridFunction onezero(t, {1.0, 0.0});
  EXPECT_DOUBLE_EQ(lr_average(onezero, 0, 2.0), std::sqrt(0.5));
  EXPECT_THROW(lr_average(onezero, 0, 0.5), std::invalid_argument);
}

TEST(StarredAverage, Examples) {
  EXPECT_EQ(starred_average(GridFunction::constant(tree_of(3), -2.0), 9, 1.0), 2.0);
  // 1 on [1/2, 1) at depth 2; leaf [0, 1/4) sees 0, 0, 1/2 along its ancestors.
  const GridFunction f = GridFunction::indicator(tree_of(2), 2);
  EXPECT_EQ(starred_average(f, 3, 1.0), 0.5);
  EXPECT_EQ(starred_average(f, 0, 1.0), lr_average(f, 0, 1.0));
}

TEST(SharpAverage, Examples) {
  const GridFunction c = GridFunction::constant(tree_of(3), 4.0);
  EXPECT_EQ(sharp_average(c, 0, 1.0), 0.0);
  EXPECT_EQ(starred_sharp_average(c, 9, 1.0), 0.0);
  const GridFunction f = left_half(2);
  EXPECT_EQ(sharp_average(f, 0, 1.0), 0.5);
  EXPECT_EQ(sharp_average(f, 3, 1.0), 0.0);
  EXPECT_EQ(starred_sharp_average(f, 3, 1.0), 0.5);
}

TEST(SharpAverage, AtMostTwiceLrAverage) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const GridFunction f = random_function(s, 5);
    for (const Node& n : f.tree().nodes())
      for (double r : {1.0, 2.0}) EXPECT_LE(sharp_average(f, n.id, r), 2.0 * lr_average(f, n.id, r) + 1e-15);
  }
}

TEST(OscSet, Examples) {
  auto t = tree_of(2);
  const GridFunction c = GridFunction::constant(t, 1.0);
  const std::vector<NodeId> all{3, 4, 5, 6};
  EXPECT_EQ(osc_set(c, all), 0.0);
  const GridFunction f(t, {0.0, 1.0, -2.0, 3.0});
  EXPECT_EQ(osc_set(f, std::vector<NodeId>{3, 4}), 1.0);
  const GridFunction g(t, {-2.0, 3.0, 5.0, 0.0});
  EXPECT_EQ(osc_set(g, std::vector<NodeId>{3, 4, 5}), 7.0);
  EXPECT_THROW(osc_set(g, std::vector<NodeId>{}), std::invalid_argument);
}

TEST(AlphaOsc, HalfIndicator) {
  const GridFunction f = left_half(3);
  EXPECT_EQ(alpha_osc(f, 0, 0.6), 1.0);
  EXPECT_EQ(alpha_osc(f, 0, 0.4), 0.0);
  // Exactly half the mass does not exceed alpha = 1/2.
  EXPECT_EQ(alpha_osc(f, 0, 0.5), 1.0);
  EXPECT_THROW(alpha_osc(f, 0, 1.0), std::invalid_argument);
  EXPECT_THROW(alpha_osc(f, 0, 0.0), std::invalid_argument);
}

TEST(AlphaOsc, MatchesSubsetOracleOnRandomSmallTrees) {
  static constexpr double kAlphas[] = {0.1, 0.25, 0.5, 0.6, 0.75, 0.9, 2.0 / 3.0};
  for (std::uint64_t s = 0; s < 200; ++s) {
    Rng rng(9000 + s);
    auto t = std::make_shared<const MeasureTree>(random_tree(rng, 12, 3));
    std::vector<double> v(t->leaf_count());
    for (double& x : v) x = static_cast<double>(rng.below(4));
    const GridFunction f(t, v);
    const double alpha = kAlphas[s % std::size(kAlphas)];
    const auto all = alpha_osc_all(f, alpha);
    for (const Node& n : t->nodes()) {
      const double ora = oracle::alpha_osc_subsets(f, n.id, alpha);
      EXPECT_EQ(alpha_osc(f, n.id, alpha), ora);
      EXPECT_EQ(all[static_cast<std::size_t>(n.id)], ora);
    }
  }
}

TEST(AlphaOsc, MonotoneInAlphaAndBelowOsc) {
  const GridFunction f = random_function(11, 6);
  for (const Node& n : f.tree().nodes()) {
    double prev = 0.0;
    for (double a : {0.1, 0.3, 0.5, 0.7, 0.9, 0.99}) {
      const double v = alpha_osc(f, n.id, a);
      EXPECT_GE(v, prev);
      prev = v;
    }
    EXPECT_LE(prev, osc_ball(f, n.id));
  }
}

TEST(Invariance, TranslationAndHomogeneity) {
  const GridFunction f = random_function(21, 5);
  std::vector<double> shifted(f.size()), scaled(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) shifted[i] = f[i] + 7.0, scaled[i] = -4.0 * f[i];
  const GridFunction g = f.with_values(shifted), h = f.with_values(scaled);
  for (const Node& n : f.tree().nodes()) {
    EXPECT_NEAR(alpha_osc(g, n.id, 0.7), alpha_osc(f, n.id, 0.7), 1e-13);
    EXPECT_NEAR(alpha_osc(h, n.id, 0.7), 4.0 * alpha_osc(f, n.id, 0.7), 1e-13);
    EXPECT_NEAR(sharp_average(g, n.id, 2.0), sharp_average(f, n.id, 2.0), 1e-13);
    EXPECT_NEAR(sharp_average(h, n.id, 1.0), 4.0 * sharp_average(f, n.id, 1.0), 1e-13);
    EXPECT_NEAR(osc_ball(g, n.id), osc_ball(f, n.id), 1e-13);
  }
  EXPECT_NEAR(bmo_norm(g, 1.0), bmo_norm(f, 1.0), 1e-13);
  EXPECT_NEAR(bmo_alpha_norm(h, 0.6), 4.0 * bmo_alpha_norm(f, 0.6), 1e-13);
}

TEST(BmoNorms, Examples) {
  const GridFunction c = GridFunction::constant(tree_of(3), 1.0);
  EXPECT_EQ(bmo_norm(c, 1.0), 0.0);
  EXPECT_EQ(bmo_alpha_norm(c, 0.5), 0.0);
  const GridFunction f = left_half(3);
  EXPECT_EQ(bmo_norm(f, 1.0), 0.5);
  EXPECT_EQ(bmo_alpha_norm(f, 0.6), 1.0);
}

TEST(BmoNorms, AgreesWithDirectEvaluation) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const GridFunction f = random_function(40 + s, 6);
    EXPECT_NEAR(bmo_norm(f, 1.0), oracle::bmo_norm_direct(f), 1e-14);
  }
}

TEST(BmoNorms, ForwardComparisonOnExample) {
  const ForwardBmo fb = forward_bmo(left_half(3), 0.6, 1.0);
  EXPECT_EQ(fb.bmo, 0.5);
  EXPECT_EQ(fb.bmo_alpha, 1.0);
  EXPECT_DOUBLE_EQ(fb.bound, 2.5);
  EXPECT_TRUE(fb.holds());
}

TEST(JnProfile, Examples) {
  const GridFunction c = GridFunction::constant(tree_of(3), 2.0);
  const std::vector<double> lams{0.0, 0.5, 1.0};
  for (double p : jn_profile(c, 0, lams)) EXPECT_EQ(p, 0.0);
  const GridFunction f = left_half(3);
  const std::vector<double> l2{0.4, 0.6};
  const auto p = jn_profile(f, 0, l2);
  EXPECT_EQ(p[0], 1.0);
  EXPECT_EQ(p[1], 0.0);
}

TEST(JnProfile, StaircaseIsNonincreasingWithGeometricTail) {
  auto t = tree_of(10);
  const GridFunction f = staircase(t);
  std::vector<double> lams;
  for (int k = 0; k <= 12; ++k) lams.push_back(0.5 * k);
  const auto p = jn_profile(f, 0, lams);
  for (std::size_t k = 0; k < p.size(); ++k) {
    EXPECT_GE(p[k], 0.0);
    EXPECT_LE(p[k], 1.0);
    if (k) EXPECT_LE(p[k], p[k - 1]);
  }
  // Integer-valued f_N: mu{f >= m} = 2^(1-m), so each unit of lambda halves the set.
  EXPECT_EQ(p[4], 2.0 * p[6]);
}

TEST(JnProfile, RejectsBadLambdas) {
  const GridFunction f = left_half(2);
  EXPECT_THROW(jn_profile(f, 0, std::vector<double>{0.5, 0.5}), std::invalid_argument);
  EXPECT_THROW(jn_profile(f, 0, std::vector<double>{-1.0}), std::invalid_argument);
}

TEST(JnProfile, CsvRows) {
  const std::vector<double> l{0.5, 1.0}, p{0.25, 0.0};
  EXPECT_EQ(jn_profile_csv(l, p), "lambda,fraction\n0.5,0.25\n1,0\n");
}

TEST(Drift, MeanDriftExamples) {
  const GridFunction c = GridFunction::constant(tree_of(2), 3.0);
  const DriftCheck z = check_mean_drift(c, 3, 0, 1.0);
  EXPECT_EQ(z.lhs, 0.0);
  EXPECT_EQ(z.rhs, 0.0);
  EXPECT_TRUE(z.holds(1.0));
  const GridFunction f = left_half(2);
  const DriftCheck d = check_mean_drift(f, 3, 0, 1.0);
  EXPECT_EQ(d.lhs, 0.5);
  EXPECT_EQ(d.rhs, 2.0);  // (mu(X)/mu(a)) * <f>*_{#,a} = 4 * 1/2
  EXPECT_LE(d.ratio(), 1.0);
  EXPECT_EQ(check_mean_drift(f, 3, 3, 1.0).lhs, 0.0);
}

TEST(Drift, RejectsDisjointOrMisorderedPairs) {
  const GridFunction f = left_half(2);
  EXPECT_THROW(check_mean_drift(f, 3, 4, 1.0), std::invalid_argument);
  EXPECT_THROW(check_mean_drift(f, 0, 3, 1.0), std::invalid_argument);
  EXPECT_THROW(check_log_drift(f, 1, 2, 1.0), std::invalid_argument);
}

TEST(Drift, LogDriftExamples) {
  const GridFunction c = GridFunction::constant(tree_of(3), 3.0);
  EXPECT_TRUE(check_log_drift(c, 7, 0, 1.0).holds(1.0));
  const GridFunction f = random_function(5, 5);
  for (const Node& a : f.tree().nodes()) {
    const DriftCheck same = check_log_drift(f, a.id, a.id, 1.5);
    EXPECT_DOUBLE_EQ(same.lhs, sharp_average(f, a.id, 1.5));
    EXPECT_LE(same.lhs, same.rhs * (1 + 1e-15));
  }
}

TEST(Drift, StaircaseLogRatioStaysBounded) {
  for (int n = 4; n <= 12; ++n) {
    auto t = tree_of(n);
    const GridFunction f = staircase(t);
    const DriftCheck d = check_log_drift(f, t->leaf_at(0), t->root(), 1.0);
    EXPECT_LE(d.ratio(), 2.0) << n;
    EXPECT_GT(d.lhs, 0.5 * (n - 2)) << n;  // grows like N
  }
}

TEST(Drift, BoundsHoldForAllNestedPairs) {
  for (double r : {1.0, 2.0}) {
    for (std::uint64_t s = 0; s < 5; ++s) {
      const GridFunction f = random_function(60 + s, 6);
      for (const Node& a : f.tree().nodes())
        for (NodeId b : f.tree().ancestors(a.id)) {
          EXPECT_LE(check_mean_drift(f, a.id, b, r).ratio(), 1.0 + 1e-12);
          EXPECT_LE(check_log_drift(f, a.id, b, r).ratio(), std::pow(2.0, 1.0 / r) * (1.0 + 1e-12));
        }
    }
  }
}
