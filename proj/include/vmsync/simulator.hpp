#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "vmsync/config.hpp"
#include "vmsync/market.hpp"
#include "vmsync/stats.hpp"

namespace vmsync {

enum class SweepVariable { tasks, gen_score };

const char* to_string(SweepVariable v) noexcept;

struct Sweep {
  SweepVariable variable = SweepVariable::tasks;
  std::vector<double> values{5.0};
};

/// Parses "tasks:1..10", "gen_score:0.25,0.5,0.75", "gen_score:0..1:0.25".
/// Throws ConfigError on malformed input.
Sweep parse_sweep(const std::string& text);

struct ExperimentPlan {
  std::vector<MechanismKind> mechanisms{MechanismKind::mtepvisa, MechanismKind::epvisa,
                                        MechanismKind::pvisa};
  Sweep sweep;
  std::size_t seeds = 100;
  std::size_t first_seed = 0;  // seed indices [first_seed, first_seed + seeds)
  std::uint64_t master_seed = 2023;
  std::size_t parallel = 1;
  ScenarioConfig base;

  void validate() const;
};

/// Scenario seed of seed index `i`. Shared across mechanisms and sweep points
/// (common random numbers).
std::uint64_t scenario_seed(std::uint64_t master_seed, std::size_t seed_index) noexcept;

/// Base config with the sweep variable set to `value`.
ScenarioConfig config_at(const ScenarioConfig& base, SweepVariable var, double value);

inline const std::vector<std::string>& metric_names() {
  static const std::vector<std::string> names{"total_surplus", "dt_surplus", "ar_surplus",
                                              "revenue", "feasibility_rate"};
  return names;
}

struct CellStats {
  MechanismKind mechanism = MechanismKind::mtepvisa;
  double sweep_value = 0.0;
  std::map<std::string, RunningStats> metrics;
};

struct ExperimentResult {
  SweepVariable variable = SweepVariable::tasks;
  std::size_t seeds = 0;
  std::vector<CellStats> cells;  // mechanism-major, then sweep point order

  const CellStats& cell(MechanismKind m, double sweep_value) const;
};

/// Runs every (mechanism, sweep point, seed) cell with truthful bidding.
/// Deterministic for a given plan regardless of `parallel`. Throws
/// std::runtime_error naming the seed when a run fails.
ExperimentResult run_experiment(const ExperimentPlan& plan);

/// Per-seed observer for acceptance checks; called in seed order per cell.
struct RunRecord {
  MechanismKind mechanism;
  double sweep_value;
  std::size_t seed_index;
  std::uint64_t scenario_seed;
  AuctionOutcome outcome;
};

ExperimentResult run_experiment(const ExperimentPlan& plan, std::vector<RunRecord>* records);

/// Merges results of two plans that differ only in their seed ranges.
ExperimentResult merge_results(const ExperimentResult& a, const ExperimentResult& b);

}  // namespace vmsync
