#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "vmsync/simulator.hpp"

namespace vmsync::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;

/// Environment variable naming the directory searched for relative --config paths.
inline constexpr const char* kConfigDirEnv = "VMSYNC_CONFIG_DIR";

inline constexpr const char* kCsvHeader = "mechanism,sweep_var,sweep_value,metric,mean,stderr,n_seeds";

/// One CSV row.
struct OutputRecord {
  std::string mechanism;
  std::string sweep_var;
  double sweep_value = 0.0;
  std::string metric;
  double mean = 0.0;
  double stderr_ = 0.0;
  std::size_t n_seeds = 0;

  friend bool operator==(const OutputRecord&, const OutputRecord&) = default;
};

std::vector<OutputRecord> to_records(const ExperimentResult& r);
std::string to_csv(const std::vector<OutputRecord>& rows);
/// Inverse of to_csv. Throws ConfigError on a malformed header or row.
std::vector<OutputRecord> parse_csv(const std::string& text);
std::string to_json_text(const std::vector<OutputRecord>& rows);

/// Resolves a config path: as given if it exists, else under $VMSYNC_CONFIG_DIR.
std::filesystem::path resolve_config(const std::filesystem::path& p);

struct RunOptions {
  std::filesystem::path config;
  std::optional<std::string> sweep;
  std::optional<std::size_t> seeds;
  std::optional<std::string> mechanisms;  // comma separated
  std::string format = "csv";
  std::optional<std::filesystem::path> out;
  std::size_t parallel = 1;
  std::optional<std::uint64_t> master_seed;
};

/// Builds the experiment plan a run would execute. Throws ConfigError.
ExperimentPlan plan_from(const RunOptions& o);

int cmd_run(const RunOptions& o, std::ostream& out, std::ostream& err);

struct VerifyOptions {
  std::filesystem::path config;
  std::vector<std::string> checks;  // strategy-proofness | ir | adverse-selection
  std::string mechanism = "mtepvisa";
  std::optional<std::filesystem::path> out;
  std::optional<std::size_t> scenarios;
  std::optional<std::size_t> grid;
  std::optional<std::uint64_t> master_seed;
  std::size_t parallel = 1;
};

int cmd_verify(const VerifyOptions& o, std::ostream& out, std::ostream& err);

struct InspectOptions {
  std::filesystem::path config;
  std::uint64_t seed = 7;
  std::string mechanism = "mtepvisa";
};

int cmd_inspect(const InspectOptions& o, std::ostream& out, std::ostream& err);

/// Full CLI entry point (argument parsing included).
int main_entry(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace vmsync::cli
