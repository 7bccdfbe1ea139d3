#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "vmsync/errors.hpp"
#include "vmsync/synchronization.hpp"

using namespace vmsync;

namespace {

MarProfile mar(double size_bits, double cycles_per_bit = 0.0) {
  MarProfile m;
  m.ar_size_bits = size_bits;
  m.ar_cycles_per_bit = cycles_per_bit;
  return m;
}

RsuProfile gpu(double hz) {
  RsuProfile r;
  r.gpu_freq_hz = hz;
  r.cpu_freq_hz = 3.6e9;
  return r;
}

// Half a second of slack on a 40 Mbit/s downlink.
const TaskTiming kHalfSecond{0.3, 0.2, 1.0};
const LinkBudget kLink{8e6, 4e7};

}  // namespace

TEST(RecommendationCount, HalfSecondSlack) {
  const auto c = recommendation_count(kHalfSecond, kLink, mar(2e6));
  EXPECT_DOUBLE_EQ(c.count, 10.0);
  EXPECT_TRUE(c.feasible);
}

TEST(RecommendationCount, ZeroSlack) {
  EXPECT_EQ(recommendation_count({0.5, 0.5, 1.0}, kLink, mar(2e6)).count, 0.0);
}

TEST(RecommendationCount, NegativeSlackIsFlagged) {
  const auto c = recommendation_count({0.7, 0.5, 1.0}, kLink, mar(2e6));
  EXPECT_EQ(c.count, 0.0);
  EXPECT_FALSE(c.feasible);
}

TEST(RecommendationCount, DoubleLayerSizeHalvesCount) {
  EXPECT_DOUBLE_EQ(recommendation_count(kHalfSecond, kLink, mar(4e6)).count,
                   0.5 * recommendation_count(kHalfSecond, kLink, mar(2e6)).count);
}

TEST(MatchQuality, ZeroScore) {
  EXPECT_EQ(match_quality(kHalfSecond, kLink, mar(2e6), 2, 0.0, 1.0).value, 0.0);
  EXPECT_EQ(match_quality(kHalfSecond, kLink, mar(2e6), 2, 0.0, 2.5).value, 0.0);
}

TEST(MatchQuality, HalfScoreTwoHits) {
  const auto m = match_quality(kHalfSecond, kLink, mar(2e6), 2, 0.5, 1.0);
  EXPECT_DOUBLE_EQ(m.value, 5.0);
  EXPECT_EQ(m.branch, HitBranch::regular);
}

TEST(MatchQuality, LinearThetaIgnoresHits) {
  EXPECT_DOUBLE_EQ(match_quality(kHalfSecond, kLink, mar(2e6), 4, 0.5, 1.0).value, 5.0);
}

TEST(MatchQuality, ZeroHitsBranches) {
  const auto lin = match_quality(kHalfSecond, kLink, mar(2e6), 0, 0.5, 1.0);
  EXPECT_DOUBLE_EQ(lin.value, 5.0);
  EXPECT_EQ(lin.branch, HitBranch::zero_hits_linear);
  const auto van = match_quality(kHalfSecond, kLink, mar(2e6), 0, 0.5, 2.0);
  EXPECT_EQ(van.value, 0.0);
  EXPECT_EQ(van.branch, HitBranch::zero_hits_vanishing);
}

TEST(MatchQuality, ConvexThetaPenalizesFewHits) {
  // theta(x) = x^2: 2.5^2 * 2 = 12.5
  EXPECT_DOUBLE_EQ(match_quality(kHalfSecond, kLink, mar(2e6), 2, 0.5, 2.0).value, 12.5);
}

TEST(ArTransmission, ZeroScoreStreamsOneLayer) {
  EXPECT_DOUBLE_EQ(ar_transmission_delay(kHalfSecond, kLink, mar(2e6), 2, 0.0), 2e6 / 4e7);
}

TEST(ArTransmission, HalfScore) {
  EXPECT_NEAR(ar_transmission_delay(kHalfSecond, kLink, mar(2e6), 2, 0.5), 0.175, 1e-15);
}

TEST(ArTransmission, DoubleDownlinkHalvesSingleLayer) {
  const LinkBudget fast{8e6, 8e7};
  EXPECT_DOUBLE_EQ(ar_transmission_delay(kHalfSecond, fast, mar(2e6), 2, 0.0),
                   0.5 * ar_transmission_delay(kHalfSecond, kLink, mar(2e6), 2, 0.0));
}

TEST(ArTransmission, ZeroDownlinkIsInfeasible) {
  EXPECT_THROW(ar_transmission_delay(kHalfSecond, {8e6, 0.0}, mar(2e6), 2, 0.5), InfeasibleLinkError);
}

TEST(ArCompute, ZeroScoreOneLayer) {
  EXPECT_NEAR(ar_compute_delay(kHalfSecond, kLink, mar(2e6, 125), gpu(19e9), 2, 0.0), 0.01316, 1e-5);
}

TEST(ArCompute, ZeroCycles) {
  EXPECT_EQ(ar_compute_delay(kHalfSecond, kLink, mar(2e6, 0), gpu(19e9), 2, 0.5), 0.0);
}

TEST(ArCompute, DoublingLayerTermScalesByRatio) {
  const auto m = mar(2e6, 125);
  const double c = layer_term(kHalfSecond, kLink, m, 2, 0.25);
  const double base = ar_compute_delay(kHalfSecond, kLink, m, gpu(19e9), 2, 0.25);
  const double doubled = ar_compute_delay(kHalfSecond, kLink, m, gpu(19e9), 2, 0.5);
  EXPECT_NEAR(doubled / base, (2 * c + 1) / (c + 1), 1e-14);
}

TEST(TotalDelay, NothingAllocated) {
  const auto e = combine_delays(0.3, 0.2, 0.175, 0.013, 5.0, 1e-9, {false, false});
  EXPECT_EQ(e.total_delay, 0.0);
  EXPECT_TRUE(e.feasible);
}

TEST(TotalDelay, DtOnlyOverDeadline) {
  const auto e = combine_delays(0.7, 0.5, 0.0, 0.0, 0.0, 1.0, {true, false});
  EXPECT_FALSE(e.feasible);
}

TEST(TotalDelay, ComponentsSum) {
  const auto e = combine_delays(0.3, 0.2, 0.175, 0.013, 5.0, 1.0, {true, true});
  EXPECT_NEAR(e.total_delay, 0.688, 1e-15);
  EXPECT_TRUE(e.feasible);
}

TEST(TotalDelay, FullEvaluation) {
  const auto e = total_delay(kHalfSecond, kLink, mar(2e6, 125), gpu(19e9), 2, 0.5, 1.0);
  EXPECT_DOUBLE_EQ(e.match_quality, 5.0);
  EXPECT_NEAR(e.t_ar, 0.175, 1e-15);
  EXPECT_NEAR(e.total_delay, 0.5 + 0.175 + 3.5 * 2e6 * 125 / 19e9, 1e-15);
  EXPECT_TRUE(e.feasible);
}

TEST(HitCache, StreamsHitLayers) {
  const auto e = hit_cache_delay(kHalfSecond, kLink, mar(2e6, 125), gpu(19e9), 3);
  EXPECT_EQ(e.match_quality, 3.0);
  EXPECT_DOUBLE_EQ(e.t_ar, 3 * 0.05);
  const auto none = hit_cache_delay(kHalfSecond, kLink, mar(2e6, 125), gpu(19e9), 0);
  EXPECT_EQ(none.t_ar + none.l_ar, 0.0);
  EXPECT_EQ(none.total_delay, 0.5);
}

namespace {

struct Draw {
  TaskTiming timing;
  LinkBudget link;
  MarProfile mar;
  RsuProfile rsu;
  int hits;
  double score;
  double beta;
};

Draw draw(std::mt19937_64& gen) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Draw d;
  d.timing = {0.6 * u(gen), 0.4 * u(gen), 0.9 + 0.2 * u(gen)};
  d.link = {1e6 + 4e7 * u(gen), 1e5 + 6e7 * u(gen)};
  d.mar = mar(1.0 + 2e6 * u(gen), 125 * u(gen));
  d.rsu = gpu(19e9);
  d.hits = static_cast<int>(11 * u(gen));
  d.score = u(gen);
  d.beta = u(gen) < 0.5 ? 1.0 : 1.0 + 2.0 * u(gen);
  return d;
}

}  // namespace

TEST(SyncProperties, FormulasMatchReferenceOver1e5Inputs) {
  std::mt19937_64 gen(17);
  double worst = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const auto d = draw(gen);
    const auto e = total_delay(d.timing, d.link, d.mar, d.rsu, d.hits, d.score, d.beta);
    const oracle::Timing tm{d.timing.upload_s, d.timing.compute_s, d.timing.deadline_s};
    const auto ref = oracle::evaluate(tm, d.link.downlink_rate, d.mar.ar_size_bits,
                                      d.mar.ar_cycles_per_bit, d.rsu.gpu_freq_hz, d.hits, d.score, d.beta);
    worst = std::max({worst, oracle::rel_err(e.t_ar, static_cast<double>(ref.t_ar)),
                      oracle::rel_err(e.l_ar, static_cast<double>(ref.l_ar)),
                      oracle::rel_err(e.match_quality, static_cast<double>(ref.m)),
                      oracle::rel_err(e.total_delay, static_cast<double>(ref.total))});
  }
  EXPECT_LT(worst, 1e-12);
}

TEST(SyncProperties, MatchMonotoneInScoreAndSlack) {
  std::mt19937_64 gen(23);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 100000; ++i) {
    const auto d = draw(gen);
    const double base = match_quality(d.timing, d.link, d.mar, d.hits, d.score, d.beta).value;
    const double more_g = std::min(1.0, d.score + u(gen));
    ASSERT_LE(base, match_quality(d.timing, d.link, d.mar, d.hits, more_g, d.beta).value);
    TaskTiming later = d.timing;
    later.deadline_s += u(gen);
    ASSERT_LE(base, match_quality(later, d.link, d.mar, d.hits, d.score, d.beta).value);
  }
}

TEST(SyncProperties, LinearThetaIsHitInvariant) {
  std::mt19937_64 gen(29);
  double worst = 0.0;
  for (int i = 0; i < 100000; ++i) {
    auto d = draw(gen);
    if (d.timing.slack() < 0) continue;
    const int h = 1 + d.hits;
    const double m = match_quality(d.timing, d.link, d.mar, h, d.score, 1.0).value;
    const double closed = d.score * d.timing.slack() * d.link.downlink_rate / d.mar.ar_size_bits;
    worst = std::max(worst, oracle::rel_err(m, closed));
  }
  EXPECT_LT(worst, 1e-12);
}

TEST(SyncProperties, SingleLayerFloor) {
  std::mt19937_64 gen(31);
  for (int i = 0; i < 100000; ++i) {
    const auto d = draw(gen);
    const auto e = total_delay(d.timing, d.link, d.mar, d.rsu, d.hits, d.score, d.beta);
    ASSERT_GE(e.t_ar, d.mar.ar_size_bits / d.link.downlink_rate);
    ASSERT_GE(e.l_ar, d.mar.ar_size_bits * d.mar.ar_cycles_per_bit / d.rsu.gpu_freq_hz);
    ASSERT_GE(e.t_dt, 0.0);
    ASSERT_GE(e.l_dt, 0.0);
  }
}

TEST(SyncProperties, LaterDeadlineNeverBreaksFeasibility) {
  // More slack also means more generated layers; the extra layers never cost
  // more than the slack they came from once a pair is feasible at all.
  std::mt19937_64 gen(37);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 100000; ++i) {
    const auto d = draw(gen);
    const auto e = total_delay(d.timing, d.link, d.mar, d.rsu, d.hits, d.score, d.beta);
    TaskTiming later = d.timing;
    later.deadline_s += u(gen);
    const auto l = total_delay(later, d.link, d.mar, d.rsu, d.hits, d.score, d.beta);
    if (e.feasible) {
      ASSERT_TRUE(l.feasible) << "draw " << i;
    }
  }
}
