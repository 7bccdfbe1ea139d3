#pragma once

// Hand-built scenarios with round numbers, for tests that need exact control.

#include <cstddef>
#include <vector>

#include "vmsync/scenario.hpp"

namespace testing_support {

inline vmsync::Scenario make_scenario(std::size_t avs, std::size_t mars, std::size_t tasks = 1) {
  using namespace vmsync;
  Scenario s;
  s.seed = 11;
  s.gamma = 1.0;
  s.hit_prior = Distribution::constant(2.0);
  s.estimator_samples = 8;
  RsuProfile r;
  r.uplink_bw_hz = 20e6;
  r.downlink_bw_hz = 20e6;
  r.cpu_freq_hz = 3.6e9;
  r.gpu_freq_hz = 19e9;
  r.tx_power_mw = 3.0;
  r.noise_var_mw = 1.0;
  s.rsus.push_back(r);
  s.channel.rsu_count = 1;
  for (std::size_t i = 0; i < avs; ++i) {
    AvProfile av;
    av.id = i;
    av.value = 0.5;
    av.tx_power_mw = 1.0;
    av.cache_size = 10;
    for (std::size_t n = 0; n < tasks; ++n) av.tasks.push_back({0.5 * kBitsPerMegabyte, 125.0, 1.0});
    s.avs.push_back(av);
    s.channel.gain.push_back(1.0);
    s.channel.noise_var_av.push_back(1.0);
  }
  for (std::size_t k = 0; k < mars; ++k) {
    MarProfile m;
    m.id = k;
    m.kind = k == 0 ? MarKind::functional : MarKind::infotainment;
    m.ar_size_bits = 0.1 * kBitsPerMegabyte;
    m.ar_cycles_per_bit = 62.5;
    m.hits.assign(avs, 2);
    s.mars.push_back(m);
  }
  s.gen.rsu_count = 1;
  s.gen.mar_count = mars;
  s.gen.score.assign(avs * mars, 0.5);
  s.gen.theta_exponent = 1.0;
  s.gen.score_prior = Distribution::constant(0.5);
  return s;
}

/// Small default-style config for fast batches.
inline vmsync::ScenarioConfig small_config(std::size_t avs, std::size_t mars, std::size_t tasks) {
  vmsync::ScenarioConfig c;
  c.av_count = avs;
  c.mar_count = mars;
  c.task_count = tasks;
  c.estimator_samples = 16;
  return c;
}

}  // namespace testing_support
