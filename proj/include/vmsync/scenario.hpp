#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "vmsync/config.hpp"

namespace vmsync {

/// Bytes per megabyte and cycles-per-bit per Gcycles/MB.
inline constexpr double kBitsPerMegabyte = 8.0e6;
inline constexpr double kCyclesPerBitPerGcyclesPerMb = 1.0e9 / kBitsPerMegabyte;  // 125

/// One digital-twin synchronization task.
struct DtTask {
  double size_bits = 0.0;
  double cycles_per_bit = 0.0;
  double deadline_s = 0.0;

  friend bool operator==(const DtTask&, const DtTask&) = default;
};

struct AvProfile {
  std::size_t id = 0;
  double value = 0.0;        // private DT value
  double tx_power_mw = 0.0;
  int cache_size = 1;        // preference-cache capacity C_i
  std::vector<DtTask> tasks;

  friend bool operator==(const AvProfile&, const AvProfile&) = default;
};

struct RsuProfile {
  std::size_t id = 0;
  double uplink_bw_hz = 0.0;
  double downlink_bw_hz = 0.0;
  double cpu_freq_hz = 0.0;
  double gpu_freq_hz = 0.0;
  double tx_power_mw = 0.0;
  double noise_var_mw = 0.0;

  friend bool operator==(const RsuProfile&, const RsuProfile&) = default;
};

enum class MarKind { functional, infotainment };

const char* to_string(MarKind kind) noexcept;

struct MarProfile {
  std::size_t id = 0;
  MarKind kind = MarKind::infotainment;
  double ar_size_bits = 0.0;
  double ar_cycles_per_bit = 0.0;
  std::vector<int> hits;  // h_{i,k}, one entry per AV

  friend bool operator==(const MarProfile&, const MarProfile&) = default;
};

/// Channel gains are stored AV-major: gain[av * rsu_count + rsu].
struct ChannelState {
  std::size_t rsu_count = 0;
  std::vector<double> gain;
  std::vector<double> noise_var_av;

  double gain_at(std::size_t av, std::size_t rsu) const { return gain.at(av * rsu_count + rsu); }

  friend bool operator==(const ChannelState&, const ChannelState&) = default;
};

/// Generative scores G_{i,j,k}, stored [av][rsu][mar] row-major, plus the
/// prior they were drawn from (used when an estimator resamples them).
struct GenScoreModel {
  std::size_t rsu_count = 0;
  std::size_t mar_count = 0;
  std::vector<double> score;
  double theta_exponent = 1.0;
  Distribution score_prior = Distribution::constant(0.5);

  double at(std::size_t av, std::size_t rsu, std::size_t mar) const {
    return score.at((av * rsu_count + rsu) * mar_count + mar);
  }

  friend bool operator==(const GenScoreModel&, const GenScoreModel&) = default;
};

/// A fully sampled market instance. Immutable after construction.
struct Scenario {
  std::vector<AvProfile> avs;
  std::vector<RsuProfile> rsus;
  std::vector<MarProfile> mars;
  ChannelState channel;
  GenScoreModel gen;
  double gamma = 1.0;
  std::uint64_t seed = 0;

  // Priors the Monte Carlo estimators resample from.
  Distribution hit_prior = Distribution::zipf(2.0);
  std::size_t estimator_samples = 64;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

/// Draws a scenario. Same (config, seed) gives an identical Scenario.
/// Throws ConfigError if the config is invalid.
Scenario sample_scenario(const ScenarioConfig& config, std::uint64_t seed);

struct Violation {
  std::string entity;  // e.g. "av[3]", "mar[0]"
  std::string field;
  std::string rule;
};

/// Every invariant breach; empty iff the scenario is well formed.
std::vector<Violation> validate_scenario(const Scenario& s);

nlohmann::json to_json(const Scenario& s);
nlohmann::json to_json(const Violation& v);

}  // namespace vmsync
