#include "vmsync/cli.hpp"

#include <atomic>
#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "vmsync/errors.hpp"
#include "vmsync/property_lab.hpp"

namespace vmsync::cli {

using nlohmann::json;

namespace {

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::stringstream ss(s);
  while (std::getline(ss, item, sep)) out.push_back(item);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

double parse_double(const std::string& s, std::size_t line) {
  char* end = nullptr;
  const double x = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size())
    throw ConfigError("csv line " + std::to_string(line) + ": bad number \"" + s + "\"");
  return x;
}

}  // namespace

std::vector<OutputRecord> to_records(const ExperimentResult& r) {
  std::vector<OutputRecord> rows;
  for (const auto& cell : r.cells) {
    for (const auto& name : metric_names()) {
      const auto& st = cell.metrics.at(name);
      rows.push_back({to_string(cell.mechanism), to_string(r.variable), cell.sweep_value, name,
                      st.mean(), st.stderr_of_mean(), st.count()});
    }
  }
  return rows;
}

std::string to_csv(const std::vector<OutputRecord>& rows) {
  std::string out = std::string(kCsvHeader) + "\n";
  for (const auto& r : rows) {
    out += r.mechanism + "," + r.sweep_var + "," + format_double(r.sweep_value) + "," + r.metric +
           "," + format_double(r.mean) + "," + format_double(r.stderr_) + "," +
           std::to_string(r.n_seeds) + "\n";
  }
  return out;
}

std::vector<OutputRecord> parse_csv(const std::string& text) {
  std::stringstream ss(text);
  std::string line;
  if (!std::getline(ss, line) || line != kCsvHeader) throw ConfigError("csv: unexpected header");
  std::vector<OutputRecord> rows;
  std::size_t n = 1;
  while (std::getline(ss, line)) {
    ++n;
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 7) throw ConfigError("csv line " + std::to_string(n) + ": expected 7 fields");
    OutputRecord r;
    r.mechanism = f[0];
    r.sweep_var = f[1];
    r.sweep_value = parse_double(f[2], n);
    r.metric = f[3];
    r.mean = parse_double(f[4], n);
    r.stderr_ = parse_double(f[5], n);
    char* end = nullptr;
    const auto count = std::strtoull(f[6].c_str(), &end, 10);
    if (f[6].empty() || end != f[6].c_str() + f[6].size())
      throw ConfigError("csv line " + std::to_string(n) + ": bad seed count");
    r.n_seeds = static_cast<std::size_t>(count);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string to_json_text(const std::vector<OutputRecord>& rows) {
  json arr = json::array();
  for (const auto& r : rows)
    arr.push_back({{"mechanism", r.mechanism}, {"sweep_var", r.sweep_var},
                   {"sweep_value", r.sweep_value}, {"metric", r.metric}, {"mean", r.mean},
                   {"stderr", r.stderr_}, {"n_seeds", r.n_seeds}});
  return arr.dump(2) + "\n";
}

std::filesystem::path resolve_config(const std::filesystem::path& p) {
  if (std::filesystem::exists(p) || p.is_absolute()) return p;
  if (const char* dir = std::getenv(kConfigDirEnv); dir && *dir) {
    const auto candidate = std::filesystem::path(dir) / p;
    if (std::filesystem::exists(candidate)) return candidate;
  }
  return p;
}

namespace {

const std::set<std::string> kTopLevel{"scenario", "experiment", "verify", "adverse_selection"};

struct ConfigFile {
  ScenarioConfig scenario;
  json experiment = json::object();
  json verify = json::object();
  json adverse_selection = json::object();
};

ConfigFile load(const std::filesystem::path& path) {
  const auto j = read_config_file(resolve_config(path));
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  for (const auto& [k, _] : j.items())
    if (!kTopLevel.contains(k)) throw ConfigError("config: unknown top-level key \"" + k + "\"");
  ConfigFile c;
  c.scenario = scenario_config_from_json(j.value("scenario", json::object()));
  for (auto [key, dst] : {std::pair{"experiment", &c.experiment}, std::pair{"verify", &c.verify},
                          std::pair{"adverse_selection", &c.adverse_selection}}) {
    if (!j.contains(key)) continue;
    if (!j.at(key).is_object()) throw ConfigError(std::string(key) + ": must be an object");
    *dst = j.at(key);
  }
  return c;
}

std::uint64_t uint_field(const json& j, const char* key, std::uint64_t fallback, const char* group) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0)
    throw ConfigError(std::string(group) + "." + key + " must be a non-negative integer");
  return v.get<std::uint64_t>();
}

void reject_unknown(const json& j, const std::set<std::string>& known, const char* group) {
  for (const auto& [k, _] : j.items())
    if (!known.contains(k)) throw ConfigError(std::string(group) + ": unknown key \"" + k + "\"");
}

std::vector<MechanismKind> parse_mechanisms(const std::string& list) {
  std::vector<MechanismKind> out;
  for (const auto& name : split(list, ',')) {
    if (name.empty()) throw ConfigError("empty mechanism name in \"" + list + "\"");
    out.push_back(mechanism_from_string(name));
  }
  if (out.empty()) throw ConfigError("no mechanisms selected");
  return out;
}

/// Opens --out or falls back to the given stream. Throws on I/O failure.
class Sink {
 public:
  Sink(const std::optional<std::filesystem::path>& path, std::ostream& fallback) : out_(&fallback) {
    if (path) {
      file_.open(*path, std::ios::binary);
      if (!file_) throw std::runtime_error("cannot open output file " + path->string());
      out_ = &file_;
    }
  }
  std::ostream& stream() { return *out_; }

 private:
  std::ofstream file_;
  std::ostream* out_;
};

}  // namespace

ExperimentPlan plan_from(const RunOptions& o) {
  const auto file = load(o.config);
  const auto& e = file.experiment;
  reject_unknown(e, {"sweep", "seeds", "first_seed", "master_seed", "mechanisms", "parallel"},
                 "experiment");
  ExperimentPlan plan;
  plan.base = file.scenario;
  if (e.contains("sweep")) {
    if (!e.at("sweep").is_string()) throw ConfigError("experiment.sweep must be a string");
    plan.sweep = parse_sweep(e.at("sweep").get<std::string>());
  } else {
    plan.sweep.values = {static_cast<double>(plan.base.task_count)};
  }
  plan.seeds = uint_field(e, "seeds", plan.seeds, "experiment");
  plan.first_seed = uint_field(e, "first_seed", plan.first_seed, "experiment");
  plan.master_seed = uint_field(e, "master_seed", plan.master_seed, "experiment");
  plan.parallel = uint_field(e, "parallel", plan.parallel, "experiment");
  if (e.contains("mechanisms")) {
    const auto& m = e.at("mechanisms");
    if (!m.is_array()) throw ConfigError("experiment.mechanisms must be an array");
    plan.mechanisms.clear();
    for (const auto& name : m) {
      if (!name.is_string()) throw ConfigError("experiment.mechanisms entries must be strings");
      plan.mechanisms.push_back(mechanism_from_string(name.get<std::string>()));
    }
  }
  if (o.sweep) plan.sweep = parse_sweep(*o.sweep);
  if (o.seeds) plan.seeds = *o.seeds;
  if (o.mechanisms) plan.mechanisms = parse_mechanisms(*o.mechanisms);
  if (o.master_seed) plan.master_seed = *o.master_seed;
  if (o.parallel > 1) plan.parallel = o.parallel;
  if (o.format != "csv" && o.format != "json")
    throw ConfigError("--format must be csv or json, got \"" + o.format + "\"");
  plan.validate();
  return plan;
}

int cmd_run(const RunOptions& o, std::ostream& out, std::ostream& err) {
  ExperimentPlan plan;
  try {
    plan = plan_from(o);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  try {
    const auto rows = to_records(run_experiment(plan));
    Sink sink(o.out, out);
    sink.stream() << (o.format == "json" ? to_json_text(rows) : to_csv(rows));
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

namespace {

struct VerifySettings {
  std::size_t sp_scenarios = 1000;
  std::size_t ir_scenarios = 100000;
  DeviationOptions deviation;
  std::uint64_t master_seed = 2023;
};

VerifySettings verify_settings(const ConfigFile& f, const VerifyOptions& o) {
  const auto& v = f.verify;
  reject_unknown(v, {"scenarios", "ir_scenarios", "grid", "tolerance", "master_seed"}, "verify");
  VerifySettings s;
  s.sp_scenarios = uint_field(v, "scenarios", s.sp_scenarios, "verify");
  s.ir_scenarios = uint_field(v, "ir_scenarios", s.ir_scenarios, "verify");
  s.deviation.grid_size = uint_field(v, "grid", s.deviation.grid_size, "verify");
  s.master_seed = uint_field(v, "master_seed", s.master_seed, "verify");
  if (v.contains("tolerance")) {
    if (!v.at("tolerance").is_number() || !(v.at("tolerance").get<double>() >= 0.0))
      throw ConfigError("verify.tolerance must be a non-negative number");
    s.deviation.tolerance = v.at("tolerance").get<double>();
  }
  if (o.scenarios) s.sp_scenarios = s.ir_scenarios = *o.scenarios;
  if (o.grid) s.deviation.grid_size = *o.grid;
  if (o.master_seed) s.master_seed = *o.master_seed;
  if (s.deviation.grid_size < 2) throw ConfigError("deviation grid needs at least 2 points");
  return s;
}

/// Runs fn(i) for i in [0, n) on `threads` workers; results keep index order.
template <class T, class Fn>
std::vector<T> parallel_map(std::size_t n, std::size_t threads, Fn fn) {
  std::vector<T> out(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        out[i] = fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  threads = std::max<std::size_t>(1, std::min(threads, n));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

bool verify_strategy_proofness(const ConfigFile& f, const VerifySettings& vs, MechanismKind kind,
                               std::size_t threads, std::ostream& report) {
  auto per_scenario = parallel_map<std::vector<DeviationReport>>(
      vs.sp_scenarios, threads, [&](std::size_t i) {
        const auto s = sample_scenario(f.scenario, scenario_seed(vs.master_seed, i));
        return check_strategy_proofness(s, kind, vs.deviation);
      });
  std::size_t probed = 0, flagged = 0, flagged_scenarios = 0, functional_flagged = 0;
  double max_gain = 0.0;
  for (const auto& reports : per_scenario) {
    probed += reports.size();
    bool any = false;
    for (const auto& r : reports) {
      if (!r.flagged) continue;
      if (r.functional) {
        ++functional_flagged;
      } else {
        ++flagged;
        any = true;
        max_gain = std::max(max_gain, r.gain);
      }
      report << to_json(r).dump() << "\n";
    }
    flagged_scenarios += any ? 1 : 0;
  }
  const bool pass = flagged == 0;
  report << json{{"check", "strategy-proofness"},
                 {"mechanism", to_string(kind)},
                 {"scenarios", vs.sp_scenarios},
                 {"grid", vs.deviation.grid_size},
                 {"tolerance", vs.deviation.tolerance},
                 {"reports", probed},
                 {"flagged", flagged},
                 {"flagged_scenarios", flagged_scenarios},
                 {"functional_flagged", functional_flagged},
                 {"max_gain", max_gain},
                 {"pass", pass}}
                .dump()
         << "\n";
  return pass;
}

bool verify_ir(const ConfigFile& f, const VerifySettings& vs, MechanismKind kind,
               std::size_t threads, std::ostream& report) {
  struct Result {
    bool ir_violation = false;
    bool deadline_violation = false;
  };
  const auto results = parallel_map<Result>(vs.ir_scenarios, threads, [&](std::size_t i) {
    const auto s = sample_scenario(f.scenario, scenario_seed(vs.master_seed, i));
    const auto o = run_truthful(s, kind);
    return Result{violates_individual_rationality(o), o.winner_av && !deadlines_met(o)};
  });
  std::size_t ir = 0, deadlines = 0;
  for (const auto& r : results) {
    ir += r.ir_violation;
    deadlines += r.deadline_violation;
  }
  const bool pass = ir == 0 && deadlines == 0;
  report << json{{"check", "ir"},
                 {"mechanism", to_string(kind)},
                 {"scenarios", vs.ir_scenarios},
                 {"violations", ir},
                 {"deadline_violations", deadlines},
                 {"pass", pass}}
                .dump()
         << "\n";
  return pass;
}

bool verify_adverse_selection(const ConfigFile& f, const VerifySettings& vs, std::ostream& report) {
  const auto cfg = adverse_selection_from_json(f.adverse_selection);
  const auto summary = check_adverse_selection(cfg, vs.master_seed);
  auto j = to_json(summary);
  j["check"] = "adverse-selection";
  j["pass"] = summary.adverse_selection_free();
  report << j.dump() << "\n";
  return summary.adverse_selection_free();
}

}  // namespace

int cmd_verify(const VerifyOptions& o, std::ostream& out, std::ostream& err) {
  ConfigFile file;
  VerifySettings settings;
  MechanismKind kind{};
  try {
    file = load(o.config);
    settings = verify_settings(file, o);
    kind = mechanism_from_string(o.mechanism);
    for (const auto& c : o.checks)
      if (c != "strategy-proofness" && c != "ir" && c != "adverse-selection")
        throw ConfigError("unknown check \"" + c + "\" (strategy-proofness, ir, adverse-selection)");
    if (file.adverse_selection.size() > 0) adverse_selection_from_json(file.adverse_selection);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  try {
    Sink sink(o.out, out);
    bool pass = true;
    for (const auto& c : o.checks) {
      bool ok = true;
      if (c == "strategy-proofness") {
        ok = verify_strategy_proofness(file, settings, kind, o.parallel, sink.stream());
      } else if (c == "ir") {
        ok = verify_ir(file, settings, kind, o.parallel, sink.stream());
      } else {
        ok = verify_adverse_selection(file, settings, sink.stream());
      }
      if (!ok) err << "check failed: " << c << "\n";
      pass = pass && ok;
    }
    return pass ? kExitOk : kExitFailure;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

int cmd_inspect(const InspectOptions& o, std::ostream& out, std::ostream& err) {
  ConfigFile file;
  MechanismKind kind{};
  try {
    file = load(o.config);
    kind = mechanism_from_string(o.mechanism);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  try {
    const auto s = sample_scenario(file.scenario, o.seed);
    auto j = to_json(run_truthful(s, kind));
    j["seed"] = o.seed;
    out << j.dump(2) << "\n";
    return kExitOk;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

int main_entry(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Vehicular Metaverse synchronization market simulator"};
  app.require_subcommand(1);

  RunOptions run;
  std::optional<std::size_t> run_parallel;
  auto* run_cmd = app.add_subcommand("run", "Run a Monte Carlo experiment and emit CSV or JSON");
  run_cmd->add_option("--config", run.config, "Config file (JSON)")->required();
  run_cmd->add_option("--sweep", run.sweep, "Sweep, e.g. tasks:1..10 or gen_score:0.25,0.5,0.75");
  run_cmd->add_option("--seeds", run.seeds, "Seeds per sweep point");
  run_cmd->add_option("--mechanisms", run.mechanisms, "Comma-separated: mtepvisa,epvisa,pvisa");
  run_cmd->add_option("--format", run.format, "csv or json");
  run_cmd->add_option("--out", run.out, "Output file (default stdout)");
  run_cmd->add_option("--parallel", run_parallel, "Worker threads");
  run_cmd->add_option("--master-seed", run.master_seed, "Master seed");

  VerifyOptions verify;
  std::optional<std::string> checks;
  std::optional<std::size_t> verify_parallel;
  auto* verify_cmd = app.add_subcommand("verify", "Run property checks; exit 0 iff all pass");
  verify_cmd->add_option("--config", verify.config, "Config file (JSON)")->required();
  verify_cmd->add_option("--checks", checks, "Comma-separated: strategy-proofness,ir,adverse-selection");
  verify_cmd->add_option("--mechanism", verify.mechanism, "Mechanism under test");
  verify_cmd->add_option("--out", verify.out, "JSON-lines report file (default stdout)");
  verify_cmd->add_option("--scenarios", verify.scenarios, "Scenario count for each batch check");
  verify_cmd->add_option("--grid", verify.grid, "Deviation grid size");
  verify_cmd->add_option("--master-seed", verify.master_seed, "Master seed");
  verify_cmd->add_option("--parallel", verify_parallel, "Worker threads");

  InspectOptions inspect;
  auto* inspect_cmd = app.add_subcommand("inspect", "Print one scenario's auction outcome as JSON");
  inspect_cmd->add_option("--config", inspect.config, "Config file (JSON)")->required();
  inspect_cmd->add_option("--seed", inspect.seed, "Scenario seed");
  inspect_cmd->add_option("--mechanism", inspect.mechanism, "Mechanism");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (*run_cmd) {
    if (run_parallel) run.parallel = *run_parallel;
    return cmd_run(run, out, err);
  }
  if (*verify_cmd) {
    if (checks) {
      for (const auto& c : split(*checks, ','))
        if (!c.empty()) verify.checks.push_back(c);
    } else {
      verify.checks = {"strategy-proofness", "ir", "adverse-selection"};
    }
    if (verify_parallel) verify.parallel = *verify_parallel;
    return cmd_verify(verify, out, err);
  }
  return cmd_inspect(inspect, out, err);
}

}  // namespace vmsync::cli
