#include "vmsync/property_lab.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <set>
#include <tuple>

#include "vmsync/errors.hpp"
#include "vmsync/random.hpp"
#include "vmsync/stats.hpp"

namespace vmsync {

using nlohmann::json;

namespace {

// Probes bids on [0, hi]; returns (best utility, best bid), starting from the
// truthful point so ties keep it.
template <class Utility>
std::pair<double, double> search(Utility&& utility, double truthful_bid, double truthful_utility,
                                 const DeviationOptions& opt) {
  double best_u = truthful_utility, best_b = truthful_bid;
  const double hi = 2.0 * truthful_bid;
  const auto g = opt.grid_size;
  std::size_t best_grid = g;  // none
  double best_grid_u = -std::numeric_limits<double>::infinity();
  for (std::size_t x = 0; x < g; ++x) {
    const double b = hi * static_cast<double>(x) / static_cast<double>(g - 1);
    const double u = utility(b);
    if (u > best_grid_u) {
      best_grid_u = u;
      best_grid = x;
    }
    if (u > best_u) {
      best_u = u;
      best_b = b;
    }
  }
  if (opt.refine && best_grid < g && hi > 0.0) {
    const double step = hi / static_cast<double>(g - 1);
    const double lo = std::max(0.0, hi * static_cast<double>(best_grid) / static_cast<double>(g - 1) - step);
    constexpr int kRefine = 16;
    for (int r = 1; r < 2 * kRefine; ++r) {
      const double b = std::min(hi, lo + step * r / kRefine);
      const double u = utility(b);
      if (u > best_u) {
        best_u = u;
        best_b = b;
      }
    }
  }
  return {best_u, best_b};
}

double av_utility(const AuctionOutcome& o, std::size_t i) {
  return o.winner_av == i ? o.value_av - o.pay_av : 0.0;
}

double mar_utility(const AuctionOutcome& o, std::size_t av, std::size_t k) {
  return o.winner_av == av && o.winner_mar == k ? o.value_mar - o.pay_mar : 0.0;
}

}  // namespace

std::vector<DeviationReport> check_strategy_proofness(const MarketAnalysis& a,
                                                      MechanismKind kind,
                                                      const DeviationOptions& options) {
  if (options.grid_size < 2) throw ConfigError("deviation grid needs at least 2 points");
  const BidSet truthful = truthful_bids(a);
  const AuctionOutcome base = clear_market(a, truthful, kind);
  std::vector<DeviationReport> out;

  BidSet bids = truthful;
  for (std::size_t i = 0; i < a.avs.size(); ++i) {
    DeviationReport r;
    r.scenario_seed = a.seed;
    r.entity = EntityKind::av;
    r.index = i;
    r.truthful_bid = truthful.avs[i].price;
    r.truthful_utility = av_utility(base, i);
    auto utility = [&](double b) {
      bids.avs[i].price = b;
      return av_utility(clear_market(a, bids, kind), i);
    };
    std::tie(r.best_utility, r.best_bid) = search(utility, r.truthful_bid, r.truthful_utility, options);
    bids.avs[i].price = truthful.avs[i].price;
    r.gain = r.best_utility - r.truthful_utility;
    r.flagged = r.gain > options.tolerance;
    out.push_back(r);
  }

  // MAR bids only matter for the synchronizing AV.
  const std::size_t w = base.winner_av.value_or(0);
  for (std::size_t k = 0; k < a.mar_count; ++k) {
    DeviationReport r;
    r.scenario_seed = a.seed;
    r.entity = EntityKind::mar;
    r.index = k;
    r.functional = k == 0;
    if (a.avs.empty()) {
      out.push_back(r);
      continue;
    }
    r.truthful_bid = truthful.mar_prices[w][k];
    r.truthful_utility = mar_utility(base, w, k);
    auto utility = [&](double b) {
      bids.mar_prices[w][k] = b;
      return mar_utility(clear_market(a, bids, kind), w, k);
    };
    std::tie(r.best_utility, r.best_bid) = search(utility, r.truthful_bid, r.truthful_utility, options);
    bids.mar_prices[w][k] = truthful.mar_prices[w][k];
    r.gain = r.best_utility - r.truthful_utility;
    r.flagged = r.gain > options.tolerance;
    out.push_back(r);
  }
  return out;
}

std::vector<DeviationReport> check_strategy_proofness(const Scenario& s, MechanismKind kind,
                                                      const DeviationOptions& options) {
  return check_strategy_proofness(analyze_market(s, analysis_options(kind, s)), kind, options);
}

bool has_profitable_deviation(const std::vector<DeviationReport>& reports) {
  return std::any_of(reports.begin(), reports.end(),
                     [](const DeviationReport& r) { return r.flagged && !r.functional; });
}

bool violates_individual_rationality(const AuctionOutcome& o) {
  if (o.winner_av && o.pay_av > o.value_av) return true;
  if (o.winner_mar && o.pay_mar > o.value_mar) return true;
  return o.pay_av < 0.0 || o.pay_mar < 0.0;
}

std::size_t check_individual_rationality(const std::vector<AuctionOutcome>& outcomes) {
  return static_cast<std::size_t>(
      std::count_if(outcomes.begin(), outcomes.end(), violates_individual_rationality));
}

void AdverseSelectionConfig::validate() const {
  if (trials < 1) throw ConfigError("adverse_selection.trials must be >= 1");
  if (infotainment_count < 1) throw ConfigError("adverse_selection.infotainment_count must be >= 1");
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw ConfigError("adverse_selection.gamma must be >= 0");
  if (estimator_samples < 1) throw ConfigError("adverse_selection.estimator_samples must be >= 1");
  const std::pair<const Distribution*, const char*> dists[] = {
      {&value, "adverse_selection.value"},
      {&common_factor, "adverse_selection.common_factor"},
      {&functional_factor, "adverse_selection.functional_factor"},
      {&infotainment_factor, "adverse_selection.infotainment_factor"}};
  for (const auto& [d, name] : dists) {
    d->validate(name);
    if (d->lower_bound() < 0.0) throw ConfigError(std::string(name) + ": support must be non-negative");
  }
}

AdverseSelectionConfig adverse_selection_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("adverse_selection: must be an object");
  static const std::set<std::string> known{"trials", "infotainment_count", "gamma",
                                           "estimator_samples", "value", "common_factor",
                                           "functional_factor", "infotainment_factor"};
  for (const auto& [k, _] : j.items())
    if (!known.contains(k)) throw ConfigError("adverse_selection: unknown key \"" + k + "\"");
  AdverseSelectionConfig c;
  auto count = [&](const char* key, std::size_t& dst) {
    if (!j.contains(key)) return;
    if (!j.at(key).is_number_integer() || j.at(key).get<long long>() < 0)
      throw ConfigError(std::string("adverse_selection.") + key + " must be a non-negative integer");
    dst = j.at(key).get<std::size_t>();
  };
  count("trials", c.trials);
  count("infotainment_count", c.infotainment_count);
  count("estimator_samples", c.estimator_samples);
  if (j.contains("gamma")) {
    if (!j.at("gamma").is_number()) throw ConfigError("adverse_selection.gamma must be a number");
    c.gamma = j.at("gamma").get<double>();
  }
  auto dist = [&](const char* key, Distribution& dst) {
    if (j.contains(key)) dst = distribution_from_json(j.at(key), std::string("adverse_selection.") + key);
  };
  dist("value", c.value);
  dist("common_factor", c.common_factor);
  dist("functional_factor", c.functional_factor);
  dist("infotainment_factor", c.infotainment_factor);
  c.validate();
  return c;
}

json to_json(const AdverseSelectionConfig& c) {
  return json{{"trials", c.trials},
              {"infotainment_count", c.infotainment_count},
              {"gamma", c.gamma},
              {"estimator_samples", c.estimator_samples},
              {"value", to_json(c.value)},
              {"common_factor", to_json(c.common_factor)},
              {"functional_factor", to_json(c.functional_factor)},
              {"infotainment_factor", to_json(c.infotainment_factor)}};
}

namespace {

struct ArmAccumulator {
  double alpha = 1.0;
  std::size_t wins = 0;
  RunningStats deficit;
  RunningStats value;
  RunningStats win;

  ArmSummary summary() const {
    ArmSummary s;
    s.alpha = alpha;
    s.wins = wins;
    s.win_rate = win.mean();
    s.deficit = deficit.mean();
    s.deficit_stderr = deficit.stderr_of_mean();
    s.mean_value_when_winning = value.mean();
    return s;
  }
};

}  // namespace

bool AdverseSelectionSummary::adverse_selection_free() const {
  return scaled.deficit <= 2.0 * scaled.deficit_stderr && scaled.deficit <= unscaled.deficit;
}

AdverseSelectionSummary check_adverse_selection(const AdverseSelectionConfig& c,
                                                std::uint64_t seed) {
  c.validate();
  const std::size_t k_count = c.infotainment_count + 1;

  // Prior moments per unit value; the functional MAR learns v, nothing else.
  double mean_functional = 0.0, mean_second = 0.0;
  {
    Rng rng(derive_seed(seed, Stream::estimator));
    std::vector<double> u(k_count);
    RunningStats f, second;
    for (std::size_t t = 0; t < c.estimator_samples; ++t) {
      const double common = c.common_factor.sample(rng);
      u[0] = common * c.functional_factor.sample(rng);
      for (std::size_t k = 1; k < k_count; ++k) u[k] = common * c.infotainment_factor.sample(rng);
      f.add(u[0]);
      std::partial_sort(u.begin(), u.begin() + 2, u.end(), std::greater<>());
      second.add(u[1]);
    }
    mean_second = second.mean();
    // Factors are independent, so the exact prior mean is available when both have one.
    const double exact = c.common_factor.mean() * c.functional_factor.mean();
    mean_functional = std::isfinite(exact) ? exact : f.mean();
  }

  AdverseSelectionSummary out;
  out.trials = c.trials;
  out.expected_functional_value = mean_functional;
  out.expected_second_value = mean_second;
  ArmAccumulator scaled, unscaled;
  scaled.alpha = scaling_factor(c.gamma, mean_functional, mean_second);
  RunningStats calibration, gap;

  Rng rng(derive_seed(seed, Stream::adverse_selection));
  std::vector<double> bids(k_count);
  for (std::size_t t = 0; t < c.trials; ++t) {
    const double v = c.value.sample(rng);
    const double common = c.common_factor.sample(rng);
    const double u0 = v * common * c.functional_factor.sample(rng);
    double top = 0.0;
    bids[0] = v * mean_functional;
    for (std::size_t k = 1; k < k_count; ++k) {
      bids[k] = v * common * c.infotainment_factor.sample(rng);
      top = std::max(top, bids[k]);
    }
    const double should_win = bids[0] > top ? 1.0 : 0.0;
    calibration.add(should_win);
    for (auto* arm : {&scaled, &unscaled}) {
      const bool won = allocate_virtual(bids, arm->alpha) == std::optional<std::size_t>(0);
      arm->win.add(won ? 1.0 : 0.0);
      if (arm == &scaled) gap.add((won ? 1.0 : 0.0) - should_win);
      if (!won) continue;
      ++arm->wins;
      arm->deficit.add(bids[0] - u0);
      arm->value.add(u0);
    }
  }
  out.scaled = scaled.summary();
  out.unscaled = unscaled.summary();
  out.calibration_rate = calibration.mean();
  out.calibration_gap = gap.mean();
  out.calibration_gap_stderr = gap.stderr_of_mean();
  return out;
}

json to_json(const DeviationReport& r) {
  return json{{"scenario_seed", r.scenario_seed},
              {"entity", r.entity == EntityKind::av ? "av" : "mar"},
              {"index", r.index},
              {"functional", r.functional},
              {"truthful_bid", r.truthful_bid},
              {"truthful_utility", r.truthful_utility},
              {"best_utility", r.best_utility},
              {"gain", r.gain},
              {"best_bid", r.best_bid},
              {"flagged", r.flagged}};
}

json to_json(const ArmSummary& a) {
  return json{{"alpha", a.alpha},
              {"wins", a.wins},
              {"win_rate", a.win_rate},
              {"deficit", a.deficit},
              {"deficit_stderr", a.deficit_stderr},
              {"mean_value_when_winning", a.mean_value_when_winning}};
}

json to_json(const AdverseSelectionSummary& s) {
  return json{{"trials", s.trials},
              {"expected_functional_value", s.expected_functional_value},
              {"expected_second_value", s.expected_second_value},
              {"scaled", to_json(s.scaled)},
              {"unscaled", to_json(s.unscaled)},
              {"calibration_rate", s.calibration_rate},
              {"calibration_gap", s.calibration_gap},
              {"calibration_gap_stderr", s.calibration_gap_stderr},
              {"adverse_selection_free", s.adverse_selection_free()}};
}

}  // namespace vmsync
