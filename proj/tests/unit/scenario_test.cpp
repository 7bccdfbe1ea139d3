#include <gtest/gtest.h>

#include "vmsync/errors.hpp"
#include "vmsync/scenario.hpp"

using namespace vmsync;

TEST(SampleScenario, DefaultCounts) {
  const auto s = sample_scenario(ScenarioConfig{}, 7);
  EXPECT_EQ(s.avs.size(), 30u);
  EXPECT_EQ(s.mars.size(), 30u);
  EXPECT_EQ(s.rsus.size(), 1u);
  EXPECT_EQ(s.mars[0].kind, MarKind::functional);
  for (std::size_t k = 1; k < s.mars.size(); ++k) EXPECT_EQ(s.mars[k].kind, MarKind::infotainment);
  for (const auto& av : s.avs) EXPECT_EQ(av.tasks.size(), 5u);
}

TEST(SampleScenario, DegenerateDistributionsGiveMidpoints) {
  ScenarioConfig c;
  c.rsu_tx_power_mw = Distribution::constant(2.5);
  c.rsu_noise_var_mw = Distribution::constant(0.5);
  c.av_value = Distribution::constant(0.55);
  c.av_tx_power_mw = Distribution::constant(0.5);
  c.av_noise_var_mw = Distribution::constant(0.5);
  c.task_size_mb = Distribution::constant(0.5);
  c.task_cpu_gcycles_per_mb = Distribution::uniform(0.5, 0.5);
  c.task_deadline_s = Distribution::constant(1.0);
  c.ar_size_mb = Distribution::constant(0.125);
  c.ar_gpu_gcycles_per_mb = Distribution::constant(0.5);
  c.hit_count = Distribution::constant(5);
  c.channel_gain = Distribution::constant(0.5);
  const auto s = sample_scenario(c, 3);
  EXPECT_EQ(s.rsus[0].tx_power_mw, 2.5);
  EXPECT_EQ(s.rsus[0].noise_var_mw, 0.5);
  EXPECT_EQ(s.rsus[0].uplink_bw_hz, 20e6);
  EXPECT_EQ(s.rsus[0].cpu_freq_hz, 3.6e9);
  for (const auto& av : s.avs) {
    EXPECT_EQ(av.value, 0.55);
    for (const auto& t : av.tasks) {
      EXPECT_EQ(t.size_bits, 4e6);
      EXPECT_EQ(t.cycles_per_bit, 62.5);
      EXPECT_EQ(t.deadline_s, 1.0);
    }
  }
  for (const auto& m : s.mars) {
    EXPECT_EQ(m.ar_size_bits, 1e6);
    for (int h : m.hits) EXPECT_EQ(h, 5);
  }
  for (double g : s.channel.gain) EXPECT_EQ(g, 0.5);
  for (double g : s.gen.score) EXPECT_EQ(g, 0.5);
}

TEST(SampleScenario, Deterministic) {
  const auto a = sample_scenario(ScenarioConfig{}, 7);
  const auto b = sample_scenario(ScenarioConfig{}, 7);
  EXPECT_EQ(a, b);
  EXPECT_EQ(to_json(a).dump(), to_json(b).dump());
  EXPECT_NE(to_json(a).dump(), to_json(sample_scenario(ScenarioConfig{}, 8)).dump());
}

TEST(SampleScenario, TaskCountOnlyAppendsTasks) {
  ScenarioConfig few, many;
  few.task_count = 2;
  many.task_count = 6;
  const auto a = sample_scenario(few, 5), b = sample_scenario(many, 5);
  for (std::size_t i = 0; i < a.avs.size(); ++i) {
    EXPECT_EQ(a.avs[i].tasks[0], b.avs[i].tasks[0]);
    EXPECT_EQ(a.avs[i].tasks[1], b.avs[i].tasks[1]);
    EXPECT_EQ(a.avs[i].value, b.avs[i].value);
  }
  EXPECT_EQ(a.mars, b.mars);
}

TEST(SampleScenario, InvalidConfigThrows) {
  ScenarioConfig c;
  c.av_count = 0;
  EXPECT_THROW(sample_scenario(c, 1), ConfigError);
  c = {};
  c.task_size_mb = Distribution::uniform(1, 0);
  EXPECT_THROW(sample_scenario(c, 1), ConfigError);
}

TEST(ValidateScenario, FreshSamplesAreValidAndInSupport) {
  const ScenarioConfig c;
  for (std::uint64_t seed = 0; seed < 10000; ++seed) {
    const auto s = sample_scenario(c, seed);
    const auto v = validate_scenario(s);
    ASSERT_TRUE(v.empty()) << "seed " << seed << ": " << v[0].entity << "." << v[0].field;
    for (const auto& av : s.avs) {
      ASSERT_GT(av.value, 0.1);
      ASSERT_LE(av.value, 1.0);
      ASSERT_LE(av.tx_power_mw, 1.0);
      for (const auto& t : av.tasks) {
        ASSERT_LE(t.size_bits, 8e6);
        ASSERT_LE(t.cycles_per_bit, 125.0);
        ASSERT_GT(t.deadline_s, 0.9);
        ASSERT_LE(t.deadline_s, 1.1);
      }
    }
    for (const auto& m : s.mars) {
      ASSERT_LE(m.ar_size_bits, 2e6);
      for (std::size_t i = 0; i < m.hits.size(); ++i) {
        ASSERT_GE(m.hits[i], 0);
        ASSERT_LE(m.hits[i], s.avs[i].cache_size);
      }
    }
    ASSERT_LE(s.rsus[0].tx_power_mw, 5.0);
    ASSERT_GE(s.rsus[0].noise_var_mw, 1e-6);
    for (double n : s.channel.noise_var_av) ASSERT_GE(n, 1e-6);
  }
}

TEST(ValidateScenario, HitsAboveCacheSize) {
  auto s = sample_scenario(ScenarioConfig{}, 7);
  s.mars[3].hits[2] = s.avs[2].cache_size + 1;
  const auto v = validate_scenario(s);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].entity, "mar[3]");
  EXPECT_EQ(v[0].field, "hits[2]");
}

TEST(ValidateScenario, TwoFunctionalMars) {
  auto s = sample_scenario(ScenarioConfig{}, 7);
  s.mars[4].kind = MarKind::functional;
  const auto v = validate_scenario(s);
  ASSERT_EQ(v.size(), 2u);  // wrong position, and the uniqueness rule
  EXPECT_EQ(v.back().field, "mars");
}

TEST(ValidateScenario, EmptyScenario) {
  EXPECT_EQ(validate_scenario(Scenario{}).size(), 3u);
}
