#include <gtest/gtest.h>

#include <cmath>

#include "builders.hpp"
#include "vmsync/errors.hpp"
#include "vmsync/simulator.hpp"

using namespace vmsync;

namespace {

ExperimentPlan small_plan(std::size_t seeds) {
  ExperimentPlan p;
  p.base = testing_support::small_config(6, 5, 3);
  p.sweep = parse_sweep("tasks:1,3");
  p.seeds = seeds;
  return p;
}

void expect_same(const ExperimentResult& a, const ExperimentResult& b, double tol) {
  ASSERT_EQ(a.cells.size(), b.cells.size());
  for (std::size_t c = 0; c < a.cells.size(); ++c) {
    EXPECT_EQ(a.cells[c].mechanism, b.cells[c].mechanism);
    EXPECT_EQ(a.cells[c].sweep_value, b.cells[c].sweep_value);
    for (const auto& name : metric_names()) {
      const auto& x = a.cells[c].metrics.at(name);
      const auto& y = b.cells[c].metrics.at(name);
      EXPECT_EQ(x.count(), y.count());
      EXPECT_NEAR(x.mean(), y.mean(), tol * (1 + std::fabs(y.mean()))) << name;
      EXPECT_NEAR(x.stderr_of_mean(), y.stderr_of_mean(), tol * (1 + y.stderr_of_mean())) << name;
    }
  }
}

}  // namespace

TEST(ParseSweep, Forms) {
  auto s = parse_sweep("tasks:1..10");
  EXPECT_EQ(s.variable, SweepVariable::tasks);
  ASSERT_EQ(s.values.size(), 10u);
  EXPECT_EQ(s.values.front(), 1.0);
  EXPECT_EQ(s.values.back(), 10.0);

  s = parse_sweep("gen_score:0.25,0.5,0.75");
  EXPECT_EQ(s.variable, SweepVariable::gen_score);
  EXPECT_EQ(s.values, (std::vector<double>{0.25, 0.5, 0.75}));

  s = parse_sweep("gen_score:0..1:0.25");
  EXPECT_EQ(s.values, (std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0}));
}

TEST(ParseSweep, Rejects) {
  for (const char* bad : {"tasks", "speed:1..3", "tasks:3..1", "tasks:1..3:0", "tasks:a,b",
                          "tasks:"})
    EXPECT_THROW(parse_sweep(bad), ConfigError) << bad;
}

TEST(ExperimentPlan, Validation) {
  auto p = small_plan(1);
  p.seeds = 0;
  EXPECT_THROW(p.validate(), ConfigError);
  p = small_plan(1);
  p.sweep = parse_sweep("tasks:0,2");
  EXPECT_THROW(p.validate(), ConfigError);
  p = small_plan(1);
  p.sweep = parse_sweep("gen_score:0.5,1.5");
  EXPECT_THROW(p.validate(), ConfigError);
  p = small_plan(1);
  p.mechanisms.clear();
  EXPECT_THROW(p.validate(), ConfigError);
}

TEST(ConfigAt, SetsSweepVariable) {
  const ScenarioConfig base;
  EXPECT_EQ(config_at(base, SweepVariable::tasks, 7).task_count, 7u);
  EXPECT_EQ(config_at(base, SweepVariable::gen_score, 0.3).generative_score,
            Distribution::constant(0.3));
}

TEST(RunExperiment, SingleSeedEqualsDirectRun) {
  ExperimentPlan p = small_plan(1);
  p.mechanisms = {MechanismKind::pvisa};
  p.sweep = parse_sweep("tasks:3");
  const auto r = run_experiment(p);
  ASSERT_EQ(r.cells.size(), 1u);
  const auto s = sample_scenario(config_at(p.base, SweepVariable::tasks, 3),
                                 scenario_seed(p.master_seed, 0));
  const auto o = run_pvisa(s, truthful_bids(analyze_market(s, analysis_options(MechanismKind::pvisa, s))));
  const auto& m = r.cells[0].metrics;
  EXPECT_EQ(m.at("total_surplus").mean(), o.surplus_total);
  EXPECT_EQ(m.at("dt_surplus").mean(), o.surplus_dt);
  EXPECT_EQ(m.at("revenue").mean(), o.revenue);
  EXPECT_EQ(m.at("total_surplus").stderr_of_mean(), 0.0);
}

TEST(RunExperiment, Deterministic) {
  const auto p = small_plan(20);
  expect_same(run_experiment(p), run_experiment(p), 0.0);
}

TEST(RunExperiment, ParallelMatchesSerial) {
  auto p = small_plan(20);
  const auto serial = run_experiment(p);
  p.parallel = 4;
  expect_same(run_experiment(p), serial, 0.0);
}

TEST(RunExperiment, SeedPartitionsMerge) {
  auto p = small_plan(100);
  const auto whole = run_experiment(p);
  p.seeds = 50;
  const auto first = run_experiment(p);
  p.first_seed = 50;
  const auto second = run_experiment(p);
  expect_same(merge_results(first, second), whole, 1e-12);
}

TEST(RunExperiment, CommonRandomNumbersAcrossMechanisms) {
  auto p = small_plan(10);
  std::vector<RunRecord> records;
  run_experiment(p, &records);
  ASSERT_EQ(records.size(), 3u * 2u * 10u);
  for (const auto& r : records) EXPECT_EQ(r.scenario_seed, scenario_seed(p.master_seed, r.seed_index));
}

TEST(RunExperiment, MeansNonNegativeAndRatesBounded) {
  const auto r = run_experiment(small_plan(30));
  for (const auto& c : r.cells) {
    for (const auto& name : metric_names()) {
      EXPECT_TRUE(std::isfinite(c.metrics.at(name).mean()));
      EXPECT_GE(c.metrics.at(name).mean(), 0.0) << name;
    }
    EXPECT_LE(c.metrics.at("feasibility_rate").mean(), 1.0);
  }
}

TEST(RunExperiment, InvalidBaseConfigThrows) {
  auto p = small_plan(2);
  p.base.av_count = 0;
  EXPECT_THROW(run_experiment(p), ConfigError);
}

TEST(RunExperiment, SurplusNonDecreasingInGenerativeScore) {
  ExperimentPlan p;
  p.mechanisms = {MechanismKind::mtepvisa};
  p.sweep = parse_sweep("gen_score:0,0.25,0.5,0.75");
  p.seeds = 100;
  const auto r = run_experiment(p);
  for (std::size_t c = 1; c < r.cells.size(); ++c)
    EXPECT_GE(r.cells[c].metrics.at("total_surplus").mean(),
              r.cells[c - 1].metrics.at("total_surplus").mean())
        << "G " << r.cells[c].sweep_value;
}

TEST(RunExperiment, FullGenerativeScoreStarvesSingleHitPairs) {
  // At G = 1 streaming the layers of a one-hit pair takes the whole slack
  // before any rendering time, so those pairs drop out and surplus falls.
  ExperimentPlan p;
  p.mechanisms = {MechanismKind::mtepvisa};
  p.sweep = parse_sweep("gen_score:0.75,1");
  p.seeds = 100;
  const auto r = run_experiment(p);
  EXPECT_LT(r.cells[1].metrics.at("total_surplus").mean(),
            r.cells[0].metrics.at("total_surplus").mean());
}
