#include "vmsync/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>

#include "vmsync/errors.hpp"

namespace vmsync {

using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

[[noreturn]] void config_error(const std::string& what, const std::string& msg) {
  throw ConfigError(what + ": " + msg);
}

double number_at(const json& j, const char* key, const std::string& what) {
  if (!j.contains(key)) config_error(what, std::string("missing \"") + key + "\"");
  const auto& v = j.at(key);
  if (!v.is_number()) config_error(what, std::string("\"") + key + "\" must be a number");
  return v.get<double>();
}

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& what) {
  for (const auto& [k, _] : j.items()) {
    if (!allowed.contains(k)) config_error(what, "unknown key \"" + k + "\"");
  }
}

const char* kind_name(Distribution::Kind k) {
  switch (k) {
    case Distribution::Kind::constant: return "constant";
    case Distribution::Kind::uniform: return "uniform";
    case Distribution::Kind::abs_normal: return "abs_normal";
    case Distribution::Kind::lognormal: return "lognormal";
    case Distribution::Kind::pareto: return "pareto";
    case Distribution::Kind::zipf: return "zipf";
  }
  return "?";
}

}  // namespace

double Distribution::sample(Rng& rng) const {
  switch (kind) {
    case Kind::constant: return a;
    case Kind::uniform: return rng.uniform(a, b);
    case Kind::abs_normal: return std::fabs(a + b * rng.standard_normal());
    case Kind::lognormal: return std::exp(a + b * rng.standard_normal());
    case Kind::pareto: return rng.pareto(a, b);
    case Kind::zipf: return static_cast<double>(rng.zipf(a));
  }
  return a;
}

bool Distribution::degenerate() const noexcept {
  switch (kind) {
    case Kind::constant: return true;
    case Kind::uniform: return a == b;
    case Kind::abs_normal:
    case Kind::lognormal: return b == 0.0;
    case Kind::pareto:
    case Kind::zipf: return false;
  }
  return false;
}

double Distribution::mean() const noexcept {
  switch (kind) {
    case Kind::constant: return a;
    case Kind::uniform: return 0.5 * (a + b);
    case Kind::abs_normal: {
      if (b == 0.0) return std::fabs(a);
      const double z = a / b;
      return b * std::sqrt(2.0 / std::numbers::pi) * std::exp(-0.5 * z * z) +
             a * std::erf(z / std::sqrt(2.0));
    }
    case Kind::lognormal: return std::exp(a + 0.5 * b * b);
    case Kind::pareto: return a > 1.0 ? a * b / (a - 1.0) : kInf;
    case Kind::zipf: return a > 2.0 ? zeta(a - 1.0) / zeta(a) : kInf;
  }
  return a;
}

double Distribution::lower_bound() const noexcept {
  switch (kind) {
    case Kind::constant:
    case Kind::uniform: return a;
    case Kind::abs_normal:
    case Kind::lognormal: return 0.0;
    case Kind::pareto: return b;
    case Kind::zipf: return 1.0;
  }
  return a;
}

double Distribution::upper_bound() const noexcept {
  switch (kind) {
    case Kind::constant: return a;
    case Kind::uniform: return b;
    default: return kInf;
  }
}

void Distribution::validate(const std::string& what) const {
  auto finite = [](double x) { return std::isfinite(x); };
  switch (kind) {
    case Kind::constant:
      if (!finite(a)) config_error(what, "constant must be finite");
      break;
    case Kind::uniform:
      if (!finite(a) || !finite(b)) config_error(what, "uniform bounds must be finite");
      if (a > b) config_error(what, "uniform bounds out of order (low > high)");
      break;
    case Kind::abs_normal:
      if (!finite(a) || !finite(b) || b < 0.0) config_error(what, "abs_normal needs stddev >= 0");
      break;
    case Kind::lognormal:
      if (!finite(a) || !finite(b) || b < 0.0) config_error(what, "lognormal needs sigma >= 0");
      break;
    case Kind::pareto:
      if (!(a > 0.0) || !(b > 0.0) || !finite(a) || !finite(b))
        config_error(what, "pareto needs shape > 0 and scale > 0");
      break;
    case Kind::zipf:
      if (!(a > 1.0) || !finite(a)) config_error(what, "zipf needs exponent > 1");
      break;
  }
}

CountSampler::CountSampler(const Distribution& d, int lo, int hi) : dist_(d), lo_(lo), hi_(hi) {
  constexpr int kMaxTable = 4096;
  if (d.kind != Distribution::Kind::zipf || hi <= lo || hi - lo > kMaxTable) return;
  const double norm = zeta(d.a);
  double below = 0.0;  // P(floor(X) <= v)
  for (int k = 1; k < lo; ++k) below += std::pow(static_cast<double>(k), -d.a) / norm;
  for (int v = lo; v < hi; ++v) {
    if (v >= 1) below += std::pow(static_cast<double>(v), -d.a) / norm;
    cdf_.push_back(below);
  }
}

int CountSampler::fallback(Rng& rng) const {
  const double x = std::floor(dist_.sample(rng));
  if (!(x >= lo_)) return lo_;
  if (x >= hi_) return hi_;
  return static_cast<int>(x);
}

Distribution distribution_from_json(const json& j, const std::string& what) {
  if (j.is_number()) return Distribution::constant(j.get<double>());
  if (!j.is_object()) config_error(what, "expected a number or a distribution object");
  if (!j.contains("dist") || !j.at("dist").is_string()) config_error(what, "missing \"dist\"");
  const auto name = j.at("dist").get<std::string>();
  Distribution d;
  if (name == "constant") {
    reject_unknown(j, {"dist", "value"}, what);
    d = Distribution::constant(number_at(j, "value", what));
  } else if (name == "uniform") {
    reject_unknown(j, {"dist", "low", "high"}, what);
    d = Distribution::uniform(number_at(j, "low", what), number_at(j, "high", what));
  } else if (name == "abs_normal") {
    reject_unknown(j, {"dist", "mean", "stddev"}, what);
    d = Distribution::abs_normal(number_at(j, "mean", what), number_at(j, "stddev", what));
  } else if (name == "lognormal") {
    reject_unknown(j, {"dist", "mu", "sigma"}, what);
    d = Distribution::lognormal(number_at(j, "mu", what), number_at(j, "sigma", what));
  } else if (name == "pareto") {
    reject_unknown(j, {"dist", "shape", "scale"}, what);
    d = Distribution::pareto(number_at(j, "shape", what), number_at(j, "scale", what));
  } else if (name == "zipf") {
    reject_unknown(j, {"dist", "exponent"}, what);
    d = Distribution::zipf(number_at(j, "exponent", what));
  } else {
    config_error(what, "unknown distribution \"" + name + "\"");
  }
  d.validate(what);
  return d;
}

json to_json(const Distribution& d) {
  json j{{"dist", kind_name(d.kind)}};
  switch (d.kind) {
    case Distribution::Kind::constant: j["value"] = d.a; break;
    case Distribution::Kind::uniform: j["low"] = d.a; j["high"] = d.b; break;
    case Distribution::Kind::abs_normal: j["mean"] = d.a; j["stddev"] = d.b; break;
    case Distribution::Kind::lognormal: j["mu"] = d.a; j["sigma"] = d.b; break;
    case Distribution::Kind::pareto: j["shape"] = d.a; j["scale"] = d.b; break;
    case Distribution::Kind::zipf: j["exponent"] = d.a; break;
  }
  return j;
}

namespace {

// Validates a quantity that must be strictly positive on every draw.
void require_positive_support(const Distribution& d, const std::string& what) {
  d.validate(what);
  if (d.kind == Distribution::Kind::constant || d.kind == Distribution::Kind::uniform) {
    if (!(d.upper_bound() > 0.0)) config_error(what, "support must contain positive values");
  }
}

void require_nonnegative_support(const Distribution& d, const std::string& what) {
  d.validate(what);
  if (d.lower_bound() < 0.0) config_error(what, "support must be non-negative");
}

}  // namespace

void ScenarioConfig::validate() const {
  if (av_count < 1) throw ConfigError("counts.avs: need at least 1 AV");
  if (mar_count < 1) throw ConfigError("counts.mars: need at least 1 MAR");
  if (rsu_count < 1) throw ConfigError("counts.rsus: need at least 1 RSU");
  if (task_count < 1) throw ConfigError("counts.tasks: need at least 1 task");

  // Resource capacities: strictly positive everywhere.
  auto strictly_positive = [](const Distribution& d, const std::string& what) {
    d.validate(what);
    if (!(d.lower_bound() > 0.0)) config_error(what, "must be strictly positive on its support");
  };
  strictly_positive(uplink_bandwidth_mhz, "rsu.uplink_bandwidth_mhz");
  strictly_positive(downlink_bandwidth_mhz, "rsu.downlink_bandwidth_mhz");
  strictly_positive(cpu_frequency_ghz, "rsu.cpu_frequency_ghz");
  strictly_positive(gpu_frequency_ghz, "rsu.gpu_frequency_ghz");
  require_nonnegative_support(rsu_tx_power_mw, "rsu.tx_power_mw");
  require_nonnegative_support(rsu_noise_var_mw, "rsu.noise_var_mw");

  require_nonnegative_support(av_value, "av.value");
  require_positive_support(av_value, "av.value");
  require_nonnegative_support(av_tx_power_mw, "av.tx_power_mw");
  require_nonnegative_support(av_noise_var_mw, "av.noise_var_mw");
  require_nonnegative_support(av_cache_size, "av.cache_size");
  if (av_cache_size.upper_bound() < 1.0) config_error("av.cache_size", "must allow values >= 1");

  require_nonnegative_support(task_size_mb, "task.size_mb");
  require_positive_support(task_size_mb, "task.size_mb");
  require_nonnegative_support(task_cpu_gcycles_per_mb, "task.cpu_gcycles_per_mb");
  require_nonnegative_support(task_deadline_s, "task.deadline_s");
  require_positive_support(task_deadline_s, "task.deadline_s");

  require_nonnegative_support(ar_size_mb, "mar.ar_size_mb");
  require_positive_support(ar_size_mb, "mar.ar_size_mb");
  require_nonnegative_support(ar_gpu_gcycles_per_mb, "mar.gpu_gcycles_per_mb");
  require_nonnegative_support(hit_count, "mar.hit_count");

  channel_gain.validate("channel.gain");
  if (channel_gain.lower_bound() < 0.0 || channel_gain.upper_bound() > 1.0)
    config_error("channel.gain", "support must lie in [0, 1]");

  generative_score.validate("generative.score");
  if (generative_score.lower_bound() < 0.0 || generative_score.upper_bound() > 1.0)
    config_error("generative.score", "support must lie in [0, 1]");
  if (!(theta_exponent >= 1.0) || !std::isfinite(theta_exponent))
    config_error("generative.theta_exponent", "must be >= 1");

  if (!(gamma >= 0.0) || !std::isfinite(gamma)) config_error("market.gamma", "must be >= 0");
  if (!(noise_floor_mw > 0.0)) config_error("market.noise_floor_mw", "must be > 0");
  if (estimator_samples < 1) config_error("market.estimator_samples", "must be >= 1");
}

namespace {

std::size_t count_at(const json& j, const char* key, std::size_t fallback, const std::string& what) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0)
    config_error(what + "." + key, "must be a non-negative integer");
  return v.get<std::size_t>();
}

void read_dist(const json& group, const char* key, Distribution& dst, const std::string& prefix) {
  if (group.contains(key)) dst = distribution_from_json(group.at(key), prefix + "." + key);
}

const json& group_at(const json& j, const char* key, const json& empty) {
  if (!j.contains(key)) return empty;
  const auto& g = j.at(key);
  if (!g.is_object()) config_error(key, "must be an object");
  return g;
}

}  // namespace

ScenarioConfig scenario_config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("scenario: must be an object");
  reject_unknown(j, {"counts", "rsu", "av", "task", "mar", "channel", "generative", "market"},
                 "scenario");
  const json empty = json::object();
  ScenarioConfig c;

  const auto& counts = group_at(j, "counts", empty);
  reject_unknown(counts, {"avs", "mars", "rsus", "tasks"}, "counts");
  c.av_count = count_at(counts, "avs", c.av_count, "counts");
  c.mar_count = count_at(counts, "mars", c.mar_count, "counts");
  c.rsu_count = count_at(counts, "rsus", c.rsu_count, "counts");
  c.task_count = count_at(counts, "tasks", c.task_count, "counts");

  const auto& rsu = group_at(j, "rsu", empty);
  reject_unknown(rsu, {"uplink_bandwidth_mhz", "downlink_bandwidth_mhz", "cpu_frequency_ghz",
                       "gpu_frequency_ghz", "tx_power_mw", "noise_var_mw"}, "rsu");
  read_dist(rsu, "uplink_bandwidth_mhz", c.uplink_bandwidth_mhz, "rsu");
  read_dist(rsu, "downlink_bandwidth_mhz", c.downlink_bandwidth_mhz, "rsu");
  read_dist(rsu, "cpu_frequency_ghz", c.cpu_frequency_ghz, "rsu");
  read_dist(rsu, "gpu_frequency_ghz", c.gpu_frequency_ghz, "rsu");
  read_dist(rsu, "tx_power_mw", c.rsu_tx_power_mw, "rsu");
  read_dist(rsu, "noise_var_mw", c.rsu_noise_var_mw, "rsu");

  const auto& av = group_at(j, "av", empty);
  reject_unknown(av, {"value", "tx_power_mw", "noise_var_mw", "cache_size"}, "av");
  read_dist(av, "value", c.av_value, "av");
  read_dist(av, "tx_power_mw", c.av_tx_power_mw, "av");
  read_dist(av, "noise_var_mw", c.av_noise_var_mw, "av");
  read_dist(av, "cache_size", c.av_cache_size, "av");

  const auto& task = group_at(j, "task", empty);
  reject_unknown(task, {"size_mb", "cpu_gcycles_per_mb", "deadline_s"}, "task");
  read_dist(task, "size_mb", c.task_size_mb, "task");
  read_dist(task, "cpu_gcycles_per_mb", c.task_cpu_gcycles_per_mb, "task");
  read_dist(task, "deadline_s", c.task_deadline_s, "task");

  const auto& mar = group_at(j, "mar", empty);
  reject_unknown(mar, {"ar_size_mb", "gpu_gcycles_per_mb", "hit_count"}, "mar");
  read_dist(mar, "ar_size_mb", c.ar_size_mb, "mar");
  read_dist(mar, "gpu_gcycles_per_mb", c.ar_gpu_gcycles_per_mb, "mar");
  read_dist(mar, "hit_count", c.hit_count, "mar");

  const auto& ch = group_at(j, "channel", empty);
  reject_unknown(ch, {"gain"}, "channel");
  read_dist(ch, "gain", c.channel_gain, "channel");

  const auto& gen = group_at(j, "generative", empty);
  reject_unknown(gen, {"score", "theta_exponent"}, "generative");
  read_dist(gen, "score", c.generative_score, "generative");
  if (gen.contains("theta_exponent")) {
    if (!gen.at("theta_exponent").is_number())
      config_error("generative.theta_exponent", "must be a number");
    c.theta_exponent = gen.at("theta_exponent").get<double>();
  }

  const auto& market = group_at(j, "market", empty);
  reject_unknown(market, {"gamma", "noise_floor_mw", "estimator_samples"}, "market");
  if (market.contains("gamma")) c.gamma = number_at(market, "gamma", "market");
  if (market.contains("noise_floor_mw"))
    c.noise_floor_mw = number_at(market, "noise_floor_mw", "market");
  c.estimator_samples = count_at(market, "estimator_samples", c.estimator_samples, "market");

  c.validate();
  return c;
}

json to_json(const ScenarioConfig& c) {
  return json{
      {"counts", {{"avs", c.av_count}, {"mars", c.mar_count}, {"rsus", c.rsu_count},
                  {"tasks", c.task_count}}},
      {"rsu", {{"uplink_bandwidth_mhz", to_json(c.uplink_bandwidth_mhz)},
               {"downlink_bandwidth_mhz", to_json(c.downlink_bandwidth_mhz)},
               {"cpu_frequency_ghz", to_json(c.cpu_frequency_ghz)},
               {"gpu_frequency_ghz", to_json(c.gpu_frequency_ghz)},
               {"tx_power_mw", to_json(c.rsu_tx_power_mw)},
               {"noise_var_mw", to_json(c.rsu_noise_var_mw)}}},
      {"av", {{"value", to_json(c.av_value)},
              {"tx_power_mw", to_json(c.av_tx_power_mw)},
              {"noise_var_mw", to_json(c.av_noise_var_mw)},
              {"cache_size", to_json(c.av_cache_size)}}},
      {"task", {{"size_mb", to_json(c.task_size_mb)},
                {"cpu_gcycles_per_mb", to_json(c.task_cpu_gcycles_per_mb)},
                {"deadline_s", to_json(c.task_deadline_s)}}},
      {"mar", {{"ar_size_mb", to_json(c.ar_size_mb)},
               {"gpu_gcycles_per_mb", to_json(c.ar_gpu_gcycles_per_mb)},
               {"hit_count", to_json(c.hit_count)}}},
      {"channel", {{"gain", to_json(c.channel_gain)}}},
      {"generative", {{"score", to_json(c.generative_score)},
                      {"theta_exponent", c.theta_exponent}}},
      {"market", {{"gamma", c.gamma},
                  {"noise_floor_mw", c.noise_floor_mw},
                  {"estimator_samples", c.estimator_samples}}},
  };
}

json read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
}

}  // namespace vmsync
