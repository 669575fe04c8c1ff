#include <gtest/gtest.h>

#include <cmath>

#include "oscbox/harness.hpp"

using namespace oscbox;

namespace {

ExperimentConfig small(std::string experiment) {
  ExperimentConfig c;
  c.experiment = std::move(experiment);
  c.depth = 4;
  c.n = 16;
  c.trials = 3;
  return c;
}

}  // namespace

TEST(Summary, NearestRank) {
  const Summary s = summarize({5, 1, 4, 2, 3});
  EXPECT_EQ(s.count, 5u);
  EXPECT_EQ(s.max, 5.0);
  EXPECT_EQ(s.median, 3.0);
  EXPECT_EQ(s.p99, 5.0);
  EXPECT_EQ(summarize({}).count, 0u);
}

TEST(Report, JsonAndCsvLayout) {
  Report r;
  r.experiment = "demo";
  r.check_le("a", 1.0, 2.0);
  r.check_eq("b", std::numeric_limits<double>::infinity(), 0.0);
  r.records.push_back(Record{"lbl", 0, {}}.add("x", 1.0).add("x", 3.0));
  const auto j = to_json(r);
  EXPECT_EQ(j.at("schema"), kReportSchema);
  EXPECT_FALSE(j.at("passed").get<bool>());
  EXPECT_EQ(j.at("checks")[1].at("value"), "inf");
  EXPECT_FALSE(j.contains("wall_time_s"));
  const std::string csv = to_csv(r);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "section,name,label,trial,value,threshold,passed");
  EXPECT_NE(csv.find("check,a,"), std::string::npos);
  r.wall_time_s = 0.5;
  EXPECT_TRUE(to_json(r).contains("wall_time_s"));
}

TEST(Report, WitnessesAreCapped) {
  Report r;
  for (int i = 0; i < 20; ++i) r.add_witness({{"i", i}});
  EXPECT_EQ(r.witnesses.size(), Report::kMaxWitnesses);
}

TEST(Report, JnProfileCsv) {
  const std::vector<double> l{0.5, 1.0}, f{0.25, 0.0};
  EXPECT_EQ(jn_profile_csv(l, f), "lambda,fraction\n0.5,0.25\n1,0\n");
}

TEST(Config, ValidationAndRoundTrip) {
  ExperimentConfig c;
  EXPECT_NO_THROW(c.validate());
  for (auto mutate : std::vector<std::function<void(ExperimentConfig&)>>{
           [](auto& x) { x.experiment = "nope"; }, [](auto& x) { x.depth = 0; }, [](auto& x) { x.r = 0.5; },
           [](auto& x) { x.alpha = 1.0; }, [](auto& x) { x.beta = 0.0; }, [](auto& x) { x.format = "xml"; },
           [](auto& x) { x.n = 100; }}) {
    ExperimentConfig bad;
    mutate(bad);
    EXPECT_THROW(bad.validate(), std::invalid_argument);
  }
  c.experiment = "jn";
  c.omega = Omega::one;
  c.family = FunctionFamily::staircase;
  c.seed = 42;
  EXPECT_EQ(to_json(config_from_json(to_json(c))), to_json(c));
}

TEST(Eps, Parsing) {
  EXPECT_EQ(parse_eps("ones").kind, EpsSource::Kind::ones);
  EXPECT_EQ(parse_eps("signs").kind, EpsSource::Kind::signs);
  const EpsSource s = parse_eps("signs:17");
  EXPECT_EQ(s.kind, EpsSource::Kind::seeded);
  EXPECT_EQ(s.seed, 17u);
  EXPECT_THROW(parse_eps("signs:x"), std::invalid_argument);
  EXPECT_THROW(parse_eps("signs:3x"), std::invalid_argument);
  EXPECT_THROW(parse_eps("explicit:/nonexistent/file.json"), std::invalid_argument);
  EXPECT_THROW(parse_eps("random"), std::invalid_argument);
  // A seeded source ignores the trial stream.
  const MeasureTree t = build_dyadic_tree(4, 1);
  Rng a(1), b(2);
  EXPECT_EQ(s.make(t, a).values(), s.make(t, b).values());
}

TEST(Sweeps, Shapes) {
  EXPECT_EQ(depth_sweep(8), (std::vector<int>{6, 8, 10}));
  EXPECT_EQ(depth_sweep(2), (std::vector<int>{2, 4}));
  EXPECT_EQ(grid_sweep(1024), (std::vector<std::size_t>{512, 1024, 2048}));
  EXPECT_EQ(grid_sweep(8), (std::vector<std::size_t>{8, 16}));
  const std::vector<double> xs{1.0, 1.2, 1.1};
  EXPECT_NEAR(relative_spread(xs), 0.2, 1e-15);
  EXPECT_NEAR(spread_factor(xs), 1.2, 1e-15);
  const std::vector<double> zero{0.0, 1.0};
  EXPECT_TRUE(std::isinf(relative_spread(zero)));
}

TEST(GeometricFit, Statuses) {
  const std::vector<double> none{0.0, 0.0}, one{0.5, 0.0};
  EXPECT_EQ(fit_geometric(none).status, "vacuous");
  EXPECT_EQ(fit_geometric(one).status, "vacuous");
  const std::vector<double> geo{0.5, 0.25, 0.125, 0.0625};
  const GeometricFit f = fit_geometric(geo);
  EXPECT_EQ(f.status, "ok");
  EXPECT_EQ(f.points, 4u);
  EXPECT_NEAR(f.q, 0.5, 1e-12);
}

TEST(PropConstants, DyadicValues) {
  const PropConstants c = prop_constants(basis_report(build_dyadic_tree(6, 1)));
  EXPECT_EQ(c.theta, 0.5);
  EXPECT_EQ(c.k, 2.0);
  EXPECT_EQ(c.gamma, 4.0);
  EXPECT_DOUBLE_EQ(c.threshold, 1.0 / 320.0);
  EXPECT_DOUBLE_EQ(c.alpha, 0.998046875);
}

TEST(HalvingStep, ConstantAndSingleStep) {
  auto t = dyadic(4);
  const GridFunction c = GridFunction::constant(t, 3.0);
  const HalvingStep s = halving_step(c, t->root(), 0.5, bmo_alpha_norm(c, 0.9));
  EXPECT_EQ(s.before, 0.0);
  EXPECT_FALSE(s.applicable(1.0));
  // 1 on the left half: |g| = 1/2 everywhere, so every lambda >= 1/2 gives 0.
  const GridFunction step = GridFunction::indicator(t, 1);
  for (double lambda : {0.5, 1.0, 2.0}) EXPECT_EQ(jn_profile(step, t->root(), std::vector<double>{lambda})[0], 0.0);
  EXPECT_EQ(jn_profile(step, t->root(), std::vector<double>{0.25})[0], 1.0);
}

TEST(Evaluators, ForwardBmoAndWeak11) {
  auto t = dyadic(5);
  Rng rng(3);
  const GridFunction f = sample_function(FunctionFamily::random_uniform, t, rng);
  const ForwardBmo fb = forward_bmo(f, 0.9, 1.0);
  EXPECT_TRUE(fb.holds());
  EXPECT_DOUBLE_EQ(fb.bound, 20.0 * fb.bmo);
  EXPECT_TRUE(weak11(f).holds());
  EXPECT_EQ(parse_martingale_op("square"), MartingaleOp::square);
  EXPECT_THROW(parse_martingale_op("bogus"), std::invalid_argument);
}

class ExperimentSmoke : public ::testing::TestWithParam<const char*> {};

TEST_P(ExperimentSmoke, PassesAndIsDeterministic) {
  const ExperimentConfig c = small(GetParam());
  const Report a = run_experiment(c), b = run_experiment(c);
  for (const Check& ch : a.checks) EXPECT_TRUE(ch.passed) << ch.name << " " << ch.value << " " << ch.threshold;
  EXPECT_FALSE(a.checks.empty());
  EXPECT_EQ(to_json(a).dump(), to_json(b).dump());
  EXPECT_EQ(to_csv(a), to_csv(b));
  EXPECT_EQ(to_json(a).at("experiment"), c.experiment);
}

INSTANTIATE_TEST_SUITE_P(All, ExperimentSmoke, ::testing::ValuesIn(kExperiments),
                         [](const auto& info) {
                           std::string s = info.param;
                           std::replace(s.begin(), s.end(), '-', '_');
                           return s;
                         });

TEST(Experiments, SeedChangesRecords) {
  ExperimentConfig c = small("norms");
  const auto a = to_json(run_experiment(c));
  c.seed = 2;
  EXPECT_NE(a.at("records"), to_json(run_experiment(c)).at("records"));
}

TEST(Experiments, RejectsMalformedEps) {
  ExperimentConfig c = small("jn");
  c.eps = "signs:x";
  EXPECT_THROW(run_experiment(c), std::invalid_argument);
}

TEST(Experiments, TimingOnlyOnRequest) {
  ExperimentConfig c = small("axioms");
  EXPECT_FALSE(run_experiment(c).wall_time_s.has_value());
  c.timing = true;
  EXPECT_TRUE(run_experiment(c).wall_time_s.has_value());
}

TEST(Replay, ConfigWitnessRerunsTheExperiment) {
  const ExperimentConfig c = small("equiv");
  const nlohmann::json w{{"kind", "config"}, {"config", to_json(c)}};
  EXPECT_EQ(to_json(replay(w)).dump(), to_json(run_experiment(c)).dump());
}

TEST(Replay, FunctionWitnesses) {
  Rng rng(9);
  auto t = std::make_shared<const MeasureTree>(random_tree(rng, 10, 4));
  const GridFunction f = sample_function(FunctionFamily::random_uniform, t, rng);

  nlohmann::json w = function_witness("alpha_osc", "alpha_osc.oracle_mismatches", f);
  w["ball"] = t->root();
  w["alpha"] = 0.7;
  EXPECT_TRUE(replay(w).passed());

  w = function_witness("bmo_forward", "equiv.forward_failures", f);
  w["alpha"] = 0.6;
  w["r"] = 1.0;
  EXPECT_TRUE(replay(w).passed());

  EXPECT_TRUE(replay(function_witness("weak11", "martingale.weak11_failures", f)).passed());
  const Report ids = replay(function_witness("identities", "martingale.identities", f));
  EXPECT_TRUE(ids.passed());
  EXPECT_EQ(ids.checks.size(), 2u);

  Rng er(1);
  w = function_witness("localization", "martingale.localization", f);
  w["op"] = to_string(MartingaleOp::maximal_star);
  w["eps"] = to_json(TransformSpec::random_signs(*t, er));
  w["level"] = 1;
  w["ball"] = t->leaf_at(0);
  EXPECT_TRUE(replay(w).passed());

  const GridFunction back = witness_function(function_witness("x", "y", f));
  EXPECT_TRUE(std::equal(back.values().begin(), back.values().end(), f.values().begin(), f.values().end()));
}

TEST(Replay, TreeWitnesses) {
  const MeasureTree t = build_dyadic_tree(3, 1);
  EXPECT_TRUE(replay({{"kind", "axioms"}, {"tree", to_json(t)}}).passed());
  EXPECT_TRUE(replay({{"kind", "exhausting"}, {"check", "exhausting.violations"}, {"tree", to_json(t)},
                      {"ball", t.leaf_at(2)}})
                  .passed());
  EXPECT_THROW(replay({{"kind", "mystery"}}), std::invalid_argument);
}
