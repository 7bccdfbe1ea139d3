#include "vmsync/simulator.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <exception>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "vmsync/errors.hpp"

namespace vmsync {

const char* to_string(SweepVariable v) noexcept {
  return v == SweepVariable::tasks ? "tasks" : "gen_score";
}

namespace {

double parse_number(const std::string& text, const std::string& whole) {
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size() || !std::isfinite(x))
    throw ConfigError("sweep \"" + whole + "\": bad number \"" + text + "\"");
  return x;
}

}  // namespace

Sweep parse_sweep(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos)
    throw ConfigError("sweep \"" + text + "\": expected <var>:<range>");
  const auto var = text.substr(0, colon);
  Sweep sw;
  if (var == "tasks") {
    sw.variable = SweepVariable::tasks;
  } else if (var == "gen_score") {
    sw.variable = SweepVariable::gen_score;
  } else {
    throw ConfigError("sweep \"" + text + "\": unknown variable \"" + var + "\" (tasks or gen_score)");
  }
  std::string range = text.substr(colon + 1);
  sw.values.clear();
  const auto dots = range.find("..");
  if (dots == std::string::npos) {
    std::stringstream ss(range);
    std::string item;
    while (std::getline(ss, item, ',')) sw.values.push_back(parse_number(item, text));
  } else {
    const double lo = parse_number(range.substr(0, dots), text);
    std::string rest = range.substr(dots + 2);
    double step = 1.0;
    if (const auto c = rest.find(':'); c != std::string::npos) {
      step = parse_number(rest.substr(c + 1), text);
      rest = rest.substr(0, c);
    }
    const double hi = parse_number(rest, text);
    if (!(step > 0.0)) throw ConfigError("sweep \"" + text + "\": step must be positive");
    if (hi < lo) throw ConfigError("sweep \"" + text + "\": range is empty");
    const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
    for (std::size_t i = 0; i < count; ++i) sw.values.push_back(lo + static_cast<double>(i) * step);
  }
  if (sw.values.empty()) throw ConfigError("sweep \"" + text + "\": no points");
  return sw;
}

void ExperimentPlan::validate() const {
  if (mechanisms.empty()) throw ConfigError("experiment: no mechanisms selected");
  if (seeds < 1) throw ConfigError("experiment: seeds must be >= 1");
  if (parallel < 1) throw ConfigError("experiment: parallel must be >= 1");
  if (sweep.values.empty()) throw ConfigError("experiment: sweep has no points");
  for (double v : sweep.values) {
    if (sweep.variable == SweepVariable::tasks && (v < 1.0 || v != std::floor(v)))
      throw ConfigError("experiment: task counts must be integers >= 1");
    if (sweep.variable == SweepVariable::gen_score && !(v >= 0.0 && v <= 1.0))
      throw ConfigError("experiment: generative scores must lie in [0, 1]");
  }
  base.validate();
}

std::uint64_t scenario_seed(std::uint64_t master_seed, std::size_t seed_index) noexcept {
  return derive_seed(master_seed, Stream::experiment, seed_index);
}

ScenarioConfig config_at(const ScenarioConfig& base, SweepVariable var, double value) {
  ScenarioConfig c = base;
  if (var == SweepVariable::tasks) {
    c.task_count = static_cast<std::size_t>(value);
  } else {
    c.generative_score = Distribution::constant(value);
  }
  return c;
}

const CellStats& ExperimentResult::cell(MechanismKind m, double sweep_value) const {
  for (const auto& c : cells)
    if (c.mechanism == m && c.sweep_value == sweep_value) return c;
  throw std::out_of_range(std::string("no cell for ") + to_string(m));
}

namespace {

std::array<double, 5> metrics_of(const AuctionOutcome& o) {
  const bool ok = o.winner_av && deadlines_met(o);
  return {o.surplus_total, o.surplus_dt, o.surplus_total - o.surplus_dt, o.revenue, ok ? 1.0 : 0.0};
}

struct Job {
  std::vector<AuctionOutcome> outcomes;  // one per mechanism
  std::exception_ptr error;
};

}  // namespace

ExperimentResult run_experiment(const ExperimentPlan& plan) { return run_experiment(plan, nullptr); }

ExperimentResult run_experiment(const ExperimentPlan& plan, std::vector<RunRecord>* records) {
  plan.validate();
  const auto& points = plan.sweep.values;
  const std::size_t total = points.size() * plan.seeds;
  std::vector<ScenarioConfig> configs;
  for (double v : points) configs.push_back(config_at(plan.base, plan.sweep.variable, v));

  std::vector<Job> jobs(total);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t j = next++; j < total; j = next++) {
      const std::size_t p = j / plan.seeds;
      const std::size_t idx = plan.first_seed + j % plan.seeds;
      try {
        const auto s = sample_scenario(configs[p], scenario_seed(plan.master_seed, idx));
        for (auto m : plan.mechanisms) jobs[j].outcomes.push_back(run_truthful(s, m));
      } catch (...) {
        jobs[j].error = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::min(plan.parallel, total);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  for (std::size_t j = 0; j < total; ++j) {
    if (!jobs[j].error) continue;
    const std::size_t idx = plan.first_seed + j % plan.seeds;
    try {
      std::rethrow_exception(jobs[j].error);
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw std::runtime_error("run failed at seed index " + std::to_string(idx) +
                               " (scenario seed " +
                               std::to_string(scenario_seed(plan.master_seed, idx)) + "): " + e.what());
    }
  }

  ExperimentResult r;
  r.variable = plan.sweep.variable;
  r.seeds = plan.seeds;
  const auto& names = metric_names();
  for (std::size_t mi = 0; mi < plan.mechanisms.size(); ++mi) {
    for (std::size_t p = 0; p < points.size(); ++p) {
      CellStats cell;
      cell.mechanism = plan.mechanisms[mi];
      cell.sweep_value = points[p];
      for (const auto& n : names) cell.metrics[n];
      for (std::size_t sd = 0; sd < plan.seeds; ++sd) {
        const auto& o = jobs[p * plan.seeds + sd].outcomes[mi];
        const auto values = metrics_of(o);
        for (std::size_t x = 0; x < names.size(); ++x) cell.metrics[names[x]].add(values[x]);
        if (records) {
          const std::size_t idx = plan.first_seed + sd;
          records->push_back({cell.mechanism, points[p], idx, scenario_seed(plan.master_seed, idx), o});
        }
      }
      r.cells.push_back(std::move(cell));
    }
  }
  return r;
}

ExperimentResult merge_results(const ExperimentResult& a, const ExperimentResult& b) {
  if (a.variable != b.variable || a.cells.size() != b.cells.size())
    throw std::invalid_argument("results cover different experiments");
  ExperimentResult r = a;
  r.seeds = a.seeds + b.seeds;
  for (std::size_t c = 0; c < r.cells.size(); ++c) {
    const auto& other = b.cells[c];
    if (other.mechanism != r.cells[c].mechanism || other.sweep_value != r.cells[c].sweep_value)
      throw std::invalid_argument("results cover different cells");
    for (auto& [name, stats] : r.cells[c].metrics) stats.merge(other.metrics.at(name));
  }
  return r;
}

}  // namespace vmsync
