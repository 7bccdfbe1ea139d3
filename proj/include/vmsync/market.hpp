#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "vmsync/link_layer.hpp"
#include "vmsync/mechanism.hpp"
#include "vmsync/scenario.hpp"
#include "vmsync/synchronization.hpp"

namespace vmsync {

enum class MechanismKind { mtepvisa, epvisa, pvisa, first_price_control };

const char* to_string(MechanismKind kind) noexcept;
/// Accepts "mtepvisa", "epvisa", "pvisa", "first-price-control".
MechanismKind mechanism_from_string(const std::string& name);

/// How MAR match quality is produced.
enum class MatchModel {
  generative,  // generative-score-driven layers
  hit_cache,   // limited to the h hit caches
};

/// How an AV's task list is presented to the mechanism.
enum class TaskView {
  per_task,   // each task evaluated against its own deadline
  collapsed,  // one aggregate task: summed size and cycles, earliest deadline
};

/// Collapses a task list into one aggregate task.
DtTask collapse_tasks(const std::vector<DtTask>& tasks);

/// Truthful-evaluation results for one (AV, MAR) pair on the auctioneer RSU.
struct PairEvaluation {
  bool feasible = false;            // every task meets its deadline (with AR)
  double match_quality = 0.0;       // mean over tasks
  double value_rate = 0.0;          // U = v * m
  double display_duration = 0.0;    // sum of per-task total delays
  std::vector<double> task_delays;  // T_total per task
};

struct AvEvaluation {
  LinkBudget link;
  std::vector<DtTask> tasks;  // as seen by the mechanism
  std::vector<TaskTiming> timings;
  bool dt_feasible = false;
  std::vector<double> dt_delays;  // t + l per task
  double display_weight = 0.0;     // d* = sum of clamped slack
  std::vector<PairEvaluation> pairs;

  // Monte Carlo quantities conditional on this AV synchronizing.
  double expected_functional_value = 0.0;  // E[U_0]
  double expected_second_value = 0.0;      // E[U_(2)]
  double alpha = 1.0;
  double virtual_estimate = 0.0;  // E[d* (gamma S_F + S_I)]
  double virtual_estimate_stderr = 0.0;
};

struct AnalysisOptions {
  MatchModel model = MatchModel::generative;
  TaskView view = TaskView::per_task;
  std::size_t estimator_samples = 64;
  bool with_estimates = true;  // PViSA does not need them
  std::size_t rsu = 0;         // auctioneer
};

AnalysisOptions analysis_options(MechanismKind kind, const Scenario& s);

/// Everything about a scenario that does not depend on submitted bids.
/// Clearing many bid profiles against one analysis is cheap.
struct MarketAnalysis {
  AnalysisOptions options;
  double gamma = 1.0;
  std::uint64_t seed = 0;
  std::vector<double> values;  // true AV values
  std::vector<AvEvaluation> avs;
  std::size_t mar_count = 0;
};

MarketAnalysis analyze_market(const Scenario& s, const AnalysisOptions& options);

/// Monte Carlo estimate of d* [gamma S_F + S_I] for `av` synchronizing:
/// resample generative scores and hit counts from their priors, clear the
/// virtual submarket with truthful bids, average. Deterministic in
/// (scenario seed, av id, n_samples).
double estimate_virtual_surplus(const AvProfile& av, const Scenario& s, std::size_t n_samples);

/// alpha for `av` synchronizing. Throws DegenerateMarketError without
/// infotainment MARs.
double price_scaling_factor(const Scenario& s, std::size_t av, std::size_t n_samples);

/// Bids of every entity. MAR bids are per synchronizing AV: mar_prices[av][mar].
struct BidSet {
  std::vector<AvBid> avs;
  std::vector<std::vector<double>> mar_prices;
};

/// AVs bid (v, true deadlines); infotainment MARs bid their realized U;
/// the functional MAR bids its Monte Carlo expected U.
BidSet truthful_bids(const MarketAnalysis& a);
BidSet truthful_bids(const Scenario& s);

struct AuctionOutcome {
  MechanismKind mechanism = MechanismKind::mtepvisa;
  std::optional<std::size_t> winner_av;
  double pay_av = 0.0;
  std::optional<std::size_t> winner_mar;
  double pay_mar = 0.0;
  double alpha = 1.0;
  std::vector<double> scores;           // physical scores (absent = -inf)
  std::vector<double> per_task_delays;  // T_total per task of the winning pair
  std::vector<double> deadlines;        // matching deadlines
  double display_duration = 0.0;
  double value_av = 0.0;                // winner's true DT value
  double value_mar = 0.0;               // winner MAR's realized value D * U
  double surplus_dt = 0.0;
  double surplus_ar_functional = 0.0;   // U_0 if functional won
  double surplus_ar_infotainment = 0.0; // U_k if infotainment won
  double surplus_total = 0.0;
  double revenue = 0.0;                 // pay_av + pay_mar
};

/// Clears both submarkets for one bid profile.
AuctionOutcome clear_market(const MarketAnalysis& a, const BidSet& bids, MechanismKind kind);

AuctionOutcome run_mtepvisa(const Scenario& s, const BidSet& bids);
AuctionOutcome run_epvisa(const Scenario& s, const BidSet& bids);
AuctionOutcome run_pvisa(const Scenario& s, const BidSet& bids);
/// Analysis + truthful bids + clearing in one call.
AuctionOutcome run_truthful(const Scenario& s, MechanismKind kind);

/// S_DT + D * (gamma S_F + S_I).
double social_surplus(const AuctionOutcome& o, double gamma);

/// True when every winning per-task delay is within its deadline.
bool deadlines_met(const AuctionOutcome& o);

nlohmann::json to_json(const AuctionOutcome& o);

}  // namespace vmsync
