#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "vmsync/random.hpp"

namespace vmsync {

/// A one-dimensional sampling distribution as written in the JSON config.
///
/// JSON forms:
///   1.5                                       constant
///   {"dist": "constant", "value": 1.5}
///   {"dist": "uniform", "low": 0, "high": 1}
///   {"dist": "abs_normal", "mean": 0, "stddev": 1}   |N(mean, stddev)|
///   {"dist": "lognormal", "mu": 0, "sigma": 1}
///   {"dist": "pareto", "shape": 1.5, "scale": 1}
///   {"dist": "zipf", "exponent": 2}                  integer support {1, 2, ...}
struct Distribution {
  enum class Kind { constant, uniform, abs_normal, lognormal, pareto, zipf };

  Kind kind = Kind::constant;
  double a = 0.0;  // value | low | mean | mu | shape | exponent
  double b = 0.0;  // high | stddev | sigma | scale

  static Distribution constant(double v) { return {Kind::constant, v, 0.0}; }
  static Distribution uniform(double lo, double hi) { return {Kind::uniform, lo, hi}; }
  static Distribution abs_normal(double mean, double sd) { return {Kind::abs_normal, mean, sd}; }
  static Distribution lognormal(double mu, double sigma) { return {Kind::lognormal, mu, sigma}; }
  static Distribution pareto(double shape, double scale) { return {Kind::pareto, shape, scale}; }
  static Distribution zipf(double exponent) { return {Kind::zipf, exponent, 0.0}; }

  double sample(Rng& rng) const;
  /// True when every draw returns the same value.
  bool degenerate() const noexcept;
  /// Analytic mean; infinite for heavy tails without one.
  double mean() const noexcept;
  double lower_bound() const noexcept;
  double upper_bound() const noexcept;

  /// Throws ConfigError naming `what` if parameters are invalid.
  void validate(const std::string& what) const;

  friend bool operator==(const Distribution&, const Distribution&) = default;
};

/// Draws floor(X) clamped to [lo, hi]. Zipf priors with a short clamped range
/// use a precomputed inverse CDF (one uniform per draw); everything else goes
/// through Distribution::sample.
class CountSampler {
 public:
  CountSampler(const Distribution& d, int lo, int hi);
  int operator()(Rng& rng) const {
    if (cdf_.empty()) return fallback(rng);
    const double u = rng.unit();
    int v = lo_;
    for (double c : cdf_) {
      if (u <= c) return v;
      ++v;
    }
    return hi_;
  }
  /// P(draw <= v) for tabulated samplers; empty otherwise.
  const std::vector<double>& cdf() const noexcept { return cdf_; }

 private:
  int fallback(Rng& rng) const;

  Distribution dist_;
  int lo_;
  int hi_;
  std::vector<double> cdf_;  // cdf_[v - lo] = P(draw <= v), v in [lo, hi)
};

Distribution distribution_from_json(const nlohmann::json& j, const std::string& what);
nlohmann::json to_json(const Distribution& d);

/// Every sampled quantity of a market instance, in the units written in the
/// config file (MHz, GHz, MB, Gcycles/MB, mW, seconds).
struct ScenarioConfig {
  std::size_t av_count = 30;
  std::size_t mar_count = 30;  // includes the functional MAR (index 0)
  std::size_t rsu_count = 1;
  std::size_t task_count = 5;

  Distribution uplink_bandwidth_mhz = Distribution::constant(20.0);
  Distribution downlink_bandwidth_mhz = Distribution::constant(20.0);
  Distribution cpu_frequency_ghz = Distribution::constant(3.6);
  Distribution gpu_frequency_ghz = Distribution::constant(19.0);
  Distribution rsu_tx_power_mw = Distribution::uniform(0.0, 5.0);
  Distribution rsu_noise_var_mw = Distribution::abs_normal(0.0, 1.0);

  Distribution av_value = Distribution::uniform(0.1, 1.0);
  Distribution av_tx_power_mw = Distribution::uniform(0.0, 1.0);
  Distribution av_noise_var_mw = Distribution::abs_normal(0.0, 1.0);
  Distribution av_cache_size = Distribution::constant(10.0);

  Distribution task_size_mb = Distribution::uniform(0.0, 1.0);
  Distribution task_cpu_gcycles_per_mb = Distribution::uniform(0.0, 1.0);
  Distribution task_deadline_s = Distribution::uniform(0.9, 1.1);

  Distribution ar_size_mb = Distribution::uniform(0.0, 0.25);
  Distribution ar_gpu_gcycles_per_mb = Distribution::uniform(0.0, 1.0);
  Distribution hit_count = Distribution::zipf(2.0);

  Distribution channel_gain = Distribution::uniform(0.0, 1.0);

  Distribution generative_score = Distribution::constant(0.5);
  double theta_exponent = 1.0;

  double gamma = 1.0;
  double noise_floor_mw = 1e-6;
  std::size_t estimator_samples = 64;

  /// Throws ConfigError on the first invalid field.
  void validate() const;

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

/// Parses the "scenario" object of a config file. Missing keys keep defaults;
/// unknown keys are rejected.
ScenarioConfig scenario_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ScenarioConfig& c);

/// Reads and parses a whole config file. Throws ConfigError on I/O or parse
/// failure.
nlohmann::json read_config_file(const std::filesystem::path& path);

}  // namespace vmsync
