#include "vmsync/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace vmsync {

using nlohmann::json;

const char* to_string(MarKind kind) noexcept {
  return kind == MarKind::functional ? "functional" : "infotainment";
}

namespace {

constexpr double kHzPerMhz = 1.0e6;
constexpr double kHzPerGhz = 1.0e9;

int draw_count(const Distribution& d, Rng& rng, int lo, int hi) {
  return CountSampler(d, lo, hi)(rng);
}

}  // namespace

Scenario sample_scenario(const ScenarioConfig& config, std::uint64_t seed) {
  config.validate();
  Scenario s;
  s.seed = seed;
  s.gamma = config.gamma;
  s.hit_prior = config.hit_count;
  s.estimator_samples = config.estimator_samples;

  s.rsus.resize(config.rsu_count);
  for (std::size_t j = 0; j < config.rsu_count; ++j) {
    Rng rng(derive_seed(seed, Stream::rsu, j));
    auto& r = s.rsus[j];
    r.id = j;
    r.uplink_bw_hz = config.uplink_bandwidth_mhz.sample(rng) * kHzPerMhz;
    r.downlink_bw_hz = config.downlink_bandwidth_mhz.sample(rng) * kHzPerMhz;
    r.cpu_freq_hz = config.cpu_frequency_ghz.sample(rng) * kHzPerGhz;
    r.gpu_freq_hz = config.gpu_frequency_ghz.sample(rng) * kHzPerGhz;
    r.tx_power_mw = config.rsu_tx_power_mw.sample(rng);
    r.noise_var_mw = std::max(config.rsu_noise_var_mw.sample(rng), config.noise_floor_mw);
  }

  s.avs.resize(config.av_count);
  s.channel.rsu_count = config.rsu_count;
  s.channel.gain.resize(config.av_count * config.rsu_count);
  s.channel.noise_var_av.resize(config.av_count);
  for (std::size_t i = 0; i < config.av_count; ++i) {
    auto& av = s.avs[i];
    av.id = i;
    {
      Rng rng(derive_seed(seed, Stream::av, i));
      av.value = config.av_value.sample(rng);
      av.tx_power_mw = config.av_tx_power_mw.sample(rng);
      s.channel.noise_var_av[i] = std::max(config.av_noise_var_mw.sample(rng), config.noise_floor_mw);
      av.cache_size = draw_count(config.av_cache_size, rng, 1, 1 << 30);
    }
    {
      // Task n of an AV is the same for every task count, so sweeps over N
      // only add tasks.
      Rng rng(derive_seed(seed, Stream::task, i));
      av.tasks.resize(config.task_count);
      for (auto& t : av.tasks) {
        t.size_bits = config.task_size_mb.sample(rng) * kBitsPerMegabyte;
        t.cycles_per_bit = config.task_cpu_gcycles_per_mb.sample(rng) * kCyclesPerBitPerGcyclesPerMb;
        t.deadline_s = config.task_deadline_s.sample(rng);
      }
    }
    Rng rng(derive_seed(seed, Stream::channel, i));
    for (std::size_t j = 0; j < config.rsu_count; ++j)
      s.channel.gain[i * config.rsu_count + j] = config.channel_gain.sample(rng);
  }

  s.mars.resize(config.mar_count);
  std::map<int, CountSampler> hit_samplers;  // by cache size
  for (const auto& av : s.avs)
    hit_samplers.try_emplace(av.cache_size, config.hit_count, 0, av.cache_size);
  for (std::size_t k = 0; k < config.mar_count; ++k) {
    auto& m = s.mars[k];
    m.id = k;
    m.kind = k == 0 ? MarKind::functional : MarKind::infotainment;
    Rng rng(derive_seed(seed, Stream::mar, k));
    m.ar_size_bits = config.ar_size_mb.sample(rng) * kBitsPerMegabyte;
    m.ar_cycles_per_bit = config.ar_gpu_gcycles_per_mb.sample(rng) * kCyclesPerBitPerGcyclesPerMb;
    Rng hits(derive_seed(seed, Stream::hits, k));
    m.hits.resize(config.av_count);
    for (std::size_t i = 0; i < config.av_count; ++i)
      m.hits[i] = hit_samplers.at(s.avs[i].cache_size)(hits);
  }

  auto& g = s.gen;
  g.rsu_count = config.rsu_count;
  g.mar_count = config.mar_count;
  g.theta_exponent = config.theta_exponent;
  g.score_prior = config.generative_score;
  g.score.resize(config.av_count * config.rsu_count * config.mar_count);
  for (std::size_t i = 0; i < config.av_count; ++i) {
    Rng rng(derive_seed(seed, Stream::generative, i));
    const std::size_t base = i * config.rsu_count * config.mar_count;
    for (std::size_t x = 0; x < config.rsu_count * config.mar_count; ++x)
      g.score[base + x] = std::clamp(config.generative_score.sample(rng), 0.0, 1.0);
  }
  return s;
}

namespace {

std::string indexed(const char* what, std::size_t i) {
  return std::string(what) + "[" + std::to_string(i) + "]";
}

}  // namespace

std::vector<Violation> validate_scenario(const Scenario& s) {
  std::vector<Violation> out;
  auto fail = [&](std::string entity, std::string field, std::string rule) {
    out.push_back({std::move(entity), std::move(field), std::move(rule)});
  };

  if (s.avs.empty()) fail("scenario", "avs", "must be non-empty");
  if (s.rsus.empty()) fail("scenario", "rsus", "must be non-empty");
  if (s.mars.empty()) fail("scenario", "mars", "must be non-empty");
  if (!(s.gamma >= 0.0)) fail("scenario", "gamma", "must be >= 0");

  for (std::size_t i = 0; i < s.avs.size(); ++i) {
    const auto& av = s.avs[i];
    const auto e = indexed("av", i);
    if (av.id != i) fail(e, "id", "must equal its position");
    if (!(av.value > 0.0)) fail(e, "value", "must be > 0");
    if (!(av.tx_power_mw >= 0.0)) fail(e, "tx_power_mw", "must be >= 0");
    if (av.cache_size < 1) fail(e, "cache_size", "must be >= 1");
    if (av.tasks.empty()) fail(e, "tasks", "must be non-empty");
    for (std::size_t n = 0; n < av.tasks.size(); ++n) {
      const auto& t = av.tasks[n];
      const auto te = e + indexed(".task", n);
      if (!(t.size_bits > 0.0)) fail(te, "size_bits", "must be > 0");
      if (!(t.cycles_per_bit >= 0.0)) fail(te, "cycles_per_bit", "must be >= 0");
      if (!(t.deadline_s > 0.0)) fail(te, "deadline_s", "must be > 0");
    }
  }

  for (std::size_t j = 0; j < s.rsus.size(); ++j) {
    const auto& r = s.rsus[j];
    const auto e = indexed("rsu", j);
    if (r.id != j) fail(e, "id", "must equal its position");
    if (!(r.uplink_bw_hz > 0.0)) fail(e, "uplink_bw_hz", "must be > 0");
    if (!(r.downlink_bw_hz > 0.0)) fail(e, "downlink_bw_hz", "must be > 0");
    if (!(r.cpu_freq_hz > 0.0)) fail(e, "cpu_freq_hz", "must be > 0");
    if (!(r.gpu_freq_hz > 0.0)) fail(e, "gpu_freq_hz", "must be > 0");
    if (!(r.tx_power_mw > 0.0)) fail(e, "tx_power_mw", "must be > 0");
    if (!(r.noise_var_mw > 0.0)) fail(e, "noise_var_mw", "must be > 0");
  }

  std::size_t functional = 0;
  for (std::size_t k = 0; k < s.mars.size(); ++k) {
    const auto& m = s.mars[k];
    const auto e = indexed("mar", k);
    if (m.id != k) fail(e, "id", "must equal its position");
    if (m.kind == MarKind::functional) {
      ++functional;
      if (k != 0) fail(e, "kind", "the functional MAR must be index 0");
    }
    if (!(m.ar_size_bits > 0.0)) fail(e, "ar_size_bits", "must be > 0");
    if (!(m.ar_cycles_per_bit >= 0.0)) fail(e, "ar_cycles_per_bit", "must be >= 0");
    if (m.hits.size() != s.avs.size()) {
      fail(e, "hits", "needs one entry per AV");
      continue;
    }
    for (std::size_t i = 0; i < s.avs.size(); ++i) {
      if (m.hits[i] < 0) fail(e, indexed("hits", i), "must be >= 0");
      if (m.hits[i] > s.avs[i].cache_size)
        fail(e, indexed("hits", i), "must not exceed the AV's cache size");
    }
  }
  if (!s.mars.empty() && functional != 1)
    fail("scenario", "mars", "exactly one functional MAR required, found " + std::to_string(functional));

  const auto& ch = s.channel;
  if (ch.rsu_count != s.rsus.size() || ch.gain.size() != s.avs.size() * s.rsus.size())
    fail("channel", "gain", "needs one entry per (AV, RSU) pair");
  for (std::size_t x = 0; x < ch.gain.size(); ++x)
    if (!(ch.gain[x] >= 0.0)) fail("channel", indexed("gain", x), "must be >= 0");
  if (ch.noise_var_av.size() != s.avs.size())
    fail("channel", "noise_var_av", "needs one entry per AV");
  for (std::size_t i = 0; i < ch.noise_var_av.size(); ++i)
    if (!(ch.noise_var_av[i] > 0.0)) fail("channel", indexed("noise_var_av", i), "must be > 0");

  const auto& g = s.gen;
  if (g.rsu_count != s.rsus.size() || g.mar_count != s.mars.size() ||
      g.score.size() != s.avs.size() * s.rsus.size() * s.mars.size())
    fail("gen", "score", "needs one entry per (AV, RSU, MAR) triple");
  for (std::size_t x = 0; x < g.score.size(); ++x)
    if (!(g.score[x] >= 0.0 && g.score[x] <= 1.0)) fail("gen", indexed("score", x), "must lie in [0, 1]");
  if (!(g.theta_exponent >= 1.0)) fail("gen", "theta_exponent", "must be >= 1");
  return out;
}

json to_json(const Scenario& s) {
  json avs = json::array();
  for (const auto& av : s.avs) {
    json tasks = json::array();
    for (const auto& t : av.tasks)
      tasks.push_back({{"size_bits", t.size_bits}, {"cycles_per_bit", t.cycles_per_bit},
                       {"deadline_s", t.deadline_s}});
    avs.push_back({{"id", av.id}, {"value", av.value}, {"tx_power_mw", av.tx_power_mw},
                   {"cache_size", av.cache_size}, {"tasks", tasks}});
  }
  json rsus = json::array();
  for (const auto& r : s.rsus)
    rsus.push_back({{"id", r.id}, {"uplink_bw_hz", r.uplink_bw_hz},
                    {"downlink_bw_hz", r.downlink_bw_hz}, {"cpu_freq_hz", r.cpu_freq_hz},
                    {"gpu_freq_hz", r.gpu_freq_hz}, {"tx_power_mw", r.tx_power_mw},
                    {"noise_var_mw", r.noise_var_mw}});
  json mars = json::array();
  for (const auto& m : s.mars)
    mars.push_back({{"id", m.id}, {"kind", to_string(m.kind)}, {"ar_size_bits", m.ar_size_bits},
                    {"ar_cycles_per_bit", m.ar_cycles_per_bit}, {"hits", m.hits}});
  return json{
      {"seed", s.seed},
      {"gamma", s.gamma},
      {"avs", avs},
      {"rsus", rsus},
      {"mars", mars},
      {"channel", {{"rsu_count", s.channel.rsu_count}, {"gain", s.channel.gain},
                   {"noise_var_av", s.channel.noise_var_av}}},
      {"gen", {{"rsu_count", s.gen.rsu_count}, {"mar_count", s.gen.mar_count},
               {"score", s.gen.score}, {"theta_exponent", s.gen.theta_exponent},
               {"score_prior", to_json(s.gen.score_prior)}}},
      {"hit_prior", to_json(s.hit_prior)},
      {"estimator_samples", s.estimator_samples},
  };
}

json to_json(const Violation& v) {
  return json{{"entity", v.entity}, {"field", v.field}, {"rule", v.rule}};
}

}  // namespace vmsync
