#include "vmsync/market.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "vmsync/errors.hpp"
#include "vmsync/random.hpp"
#include "vmsync/stats.hpp"

namespace vmsync {

using nlohmann::json;

const char* to_string(MechanismKind kind) noexcept {
  switch (kind) {
    case MechanismKind::mtepvisa: return "mtepvisa";
    case MechanismKind::epvisa: return "epvisa";
    case MechanismKind::pvisa: return "pvisa";
    case MechanismKind::first_price_control: return "first-price-control";
  }
  return "?";
}

MechanismKind mechanism_from_string(const std::string& name) {
  for (auto k : {MechanismKind::mtepvisa, MechanismKind::epvisa, MechanismKind::pvisa,
                 MechanismKind::first_price_control}) {
    if (name == to_string(k)) return k;
  }
  throw ConfigError("unknown mechanism \"" + name +
                    "\" (expected mtepvisa, epvisa, pvisa or first-price-control)");
}

DtTask collapse_tasks(const std::vector<DtTask>& tasks) {
  DtTask out;
  if (tasks.empty()) return out;
  double cycles = 0.0;
  out.deadline_s = std::numeric_limits<double>::infinity();
  for (const auto& t : tasks) {
    out.size_bits += t.size_bits;
    cycles += t.size_bits * t.cycles_per_bit;
    out.deadline_s = std::min(out.deadline_s, t.deadline_s);
  }
  out.cycles_per_bit = out.size_bits > 0.0 ? cycles / out.size_bits : 0.0;
  return out;
}

AnalysisOptions analysis_options(MechanismKind kind, const Scenario& s) {
  AnalysisOptions o;
  o.estimator_samples = s.estimator_samples;
  switch (kind) {
    case MechanismKind::epvisa:
      o.model = MatchModel::hit_cache;
      o.view = TaskView::collapsed;
      break;
    case MechanismKind::pvisa:
      o.with_estimates = false;
      break;
    case MechanismKind::mtepvisa:
    case MechanismKind::first_price_control:
      break;
  }
  return o;
}

namespace {

/// Per-AV quantities the sampled pair evaluation needs.
struct AvSummary {
  double downlink = 0.0;
  double gpu_hz = 0.0;
  double sum_dt = 0.0;     // sum of t + l
  double sum_slack = 0.0;
  double min_slack = 0.0;
  std::vector<double> slack;
};

struct SampledPair {
  bool feasible = false;
  double match = 0.0;     // mean match quality
  double duration = 0.0;  // sum of per-task total delays
};

// Closed form of the per-task evaluation for one (AV, MAR) pair under sampled
// G and h. Every AR layer costs the same `per_layer` seconds, so the binding
// deadline is the one with the least slack.
SampledPair sample_pair(const AvSummary& av, const MarProfile& mar, MatchModel model, int hits,
                        double score, double beta) {
  SampledPair p;
  const double n = static_cast<double>(av.slack.size());
  const double per_layer =
      mar.ar_size_bits / av.downlink + mar.ar_size_bits * mar.ar_cycles_per_bit / av.gpu_hz;
  if (model == MatchModel::hit_cache) {
    p.feasible = av.min_slack >= hits * per_layer;
    p.duration = av.sum_dt + n * hits * per_layer;
    p.match = hits;
    return p;
  }
  // c_n = q * slack_n
  const double rate = score * av.downlink / mar.ar_size_bits;
  const double q = hits > 0 ? rate / hits : 0.0;
  const double margin = 1.0 - q * per_layer;
  p.feasible = margin > 0.0 && av.min_slack * margin >= per_layer;
  p.duration = av.sum_dt + per_layer * (n + q * av.sum_slack);
  if (beta == 1.0 || hits == 0) {
    p.match = beta == 1.0 ? rate * av.sum_slack / n : 0.0;
  } else {
    double total = 0.0;
    for (double s : av.slack) total += theta(q * s, beta) * hits;
    p.match = total / n;
  }
  return p;
}

void estimate(AvEvaluation& ev, const AvProfile& av, const AvSummary& sum, const Scenario& s,
              const AnalysisOptions& opt) {
  const std::size_t k_count = s.mars.size();
  const double beta = s.gen.theta_exponent;
  const bool score_fixed = s.gen.score_prior.degenerate();
  const bool hits_fixed = s.hit_prior.degenerate();
  // The functional MAR's match quality is a point mass when nothing it cannot
  // observe moves it; it then knows its value exactly.
  const bool point_mass = opt.model == MatchModel::generative
                              ? score_fixed && (beta == 1.0 || hits_fixed)
                              : hits_fixed;
  if (point_mass) ev.expected_functional_value = ev.pairs[0].value_rate;
  if (!opt.with_estimates && point_mass) return;

  const std::size_t n = std::max<std::size_t>(opt.estimator_samples, 1);
  std::vector<SampledPair> draws(n * k_count);
  Rng rng(derive_seed(s.seed, Stream::estimator, av.id));
  const CountSampler sample_hits(s.hit_prior, 0, av.cache_size);
  // The functional MAR is only displayed if its pair passes the deadline
  // filter, so it values the slot conditional on that.
  double sum_m0 = 0.0;
  std::size_t feasible_m0 = 0;
  // With fixed scores a pair depends on the sampled h alone.
  const std::size_t h_count = static_cast<std::size_t>(av.cache_size) + 1;
  std::vector<SampledPair> by_hits;
  if (score_fixed && h_count <= 64) {
    by_hits.resize(k_count * h_count);
    for (std::size_t k = 0; k < k_count; ++k)
      for (std::size_t h = 0; h < h_count; ++h)
        by_hits[k * h_count + h] = sample_pair(sum, s.mars[k], opt.model, static_cast<int>(h),
                                               s.gen.at(av.id, opt.rsu, k), beta);
  }
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t k = 0; k < k_count; ++k) {
      if (!by_hits.empty()) {
        draws[t * k_count + k] = by_hits[k * h_count + static_cast<std::size_t>(sample_hits(rng))];
        continue;
      }
      const double g = score_fixed ? s.gen.at(av.id, opt.rsu, k)
                                   : std::clamp(s.gen.score_prior.sample(rng), 0.0, 1.0);
      const int h = sample_hits(rng);
      draws[t * k_count + k] = sample_pair(sum, s.mars[k], opt.model, h, g, beta);
    }
    if (draws[t * k_count].feasible) {
      sum_m0 += draws[t * k_count].match;
      ++feasible_m0;
    }
  }
  if (!point_mass)
    ev.expected_functional_value =
        feasible_m0 > 0 ? av.value * (sum_m0 / static_cast<double>(feasible_m0)) : 0.0;
  if (!opt.with_estimates) return;

  double sum_second = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    double first = 0.0, second = 0.0;
    int feasible = 0;
    for (std::size_t k = 0; k < k_count; ++k) {
      const auto& d = draws[t * k_count + k];
      if (!d.feasible) continue;
      const double u = av.value * d.match;
      ++feasible;
      if (u > first) {
        second = first;
        first = u;
      } else if (u > second) {
        second = u;
      }
    }
    if (feasible >= 2) sum_second += second;
  }
  ev.expected_second_value = sum_second / static_cast<double>(n);
  ev.alpha = k_count >= 2 ? scaling_factor(s.gamma, ev.expected_functional_value,
                                           ev.expected_second_value)
                          : 1.0;

  std::vector<double> bids(k_count);
  RunningStats surplus;
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t k = 0; k < k_count; ++k) {
      const auto& d = draws[t * k_count + k];
      bids[k] = !d.feasible ? kAbsent : k == 0 ? ev.expected_functional_value : av.value * d.match;
    }
    const auto w = allocate_virtual(bids, ev.alpha);
    if (!w) {
      surplus.add(0.0);
      continue;
    }
    const auto& d = draws[t * k_count + *w];
    surplus.add(d.duration * (*w == 0 ? s.gamma : 1.0) * av.value * d.match);
  }
  ev.virtual_estimate = surplus.mean();
  ev.virtual_estimate_stderr = surplus.stderr_of_mean();
}

AvEvaluation evaluate_av(const Scenario& s, std::size_t i, const AnalysisOptions& opt) {
  const auto& av = s.avs.at(i);
  const auto& rsu = s.rsus.at(opt.rsu);
  const double beta = s.gen.theta_exponent;
  AvEvaluation ev;
  ev.link = link_budget(av, rsu, s.channel);
  ev.tasks = opt.view == TaskView::per_task ? av.tasks : std::vector<DtTask>{collapse_tasks(av.tasks)};
  ev.pairs.resize(s.mars.size());
  ev.dt_feasible = ev.link.uplink_rate > 0.0;

  AvSummary sum;
  sum.downlink = ev.link.downlink_rate;
  sum.gpu_hz = rsu.gpu_freq_hz;
  sum.min_slack = std::numeric_limits<double>::infinity();
  if (ev.dt_feasible) {
    for (const auto& task : ev.tasks) {
      const auto timing = task_timing(task, ev.link, rsu);
      ev.timings.push_back(timing);
      ev.dt_delays.push_back(timing.upload_s + timing.compute_s);
      if (ev.dt_delays.back() > task.deadline_s) ev.dt_feasible = false;
      const double slack = std::max(timing.slack(), 0.0);
      ev.display_weight += slack;
      sum.slack.push_back(slack);
      sum.sum_dt += ev.dt_delays.back();
      sum.sum_slack += slack;
      sum.min_slack = std::min(sum.min_slack, slack);
    }
  }
  if (!ev.dt_feasible || !(ev.link.downlink_rate > 0.0)) return ev;

  for (std::size_t k = 0; k < s.mars.size(); ++k) {
    const auto& mar = s.mars[k];
    const int h = mar.hits.at(i);
    const double g = s.gen.at(i, opt.rsu, k);
    auto& pair = ev.pairs[k];
    pair.feasible = true;
    double m = 0.0;
    for (const auto& timing : ev.timings) {
      const auto e = opt.model == MatchModel::generative
                         ? total_delay(timing, ev.link, mar, rsu, h, g, beta)
                         : hit_cache_delay(timing, ev.link, mar, rsu, h);
      pair.feasible = pair.feasible && e.feasible;
      pair.task_delays.push_back(e.total_delay);
      pair.display_duration += e.total_delay;
      m += e.match_quality;
    }
    pair.match_quality = m / static_cast<double>(ev.timings.size());
    pair.value_rate = av.value * pair.match_quality;
  }
  estimate(ev, av, sum, s, opt);
  return ev;
}

}  // namespace

MarketAnalysis analyze_market(const Scenario& s, const AnalysisOptions& options) {
  if (options.rsu >= s.rsus.size()) throw ConfigError("auctioneer RSU index out of range");
  MarketAnalysis a;
  a.options = options;
  a.gamma = s.gamma;
  a.seed = s.seed;
  a.mar_count = s.mars.size();
  a.values.reserve(s.avs.size());
  a.avs.reserve(s.avs.size());
  for (std::size_t i = 0; i < s.avs.size(); ++i) {
    a.values.push_back(s.avs[i].value);
    a.avs.push_back(evaluate_av(s, i, options));
  }
  return a;
}

double estimate_virtual_surplus(const AvProfile& av, const Scenario& s, std::size_t n_samples) {
  auto opt = analysis_options(MechanismKind::mtepvisa, s);
  opt.estimator_samples = n_samples;
  return evaluate_av(s, av.id, opt).virtual_estimate;
}

double price_scaling_factor(const Scenario& s, std::size_t av, std::size_t n_samples) {
  if (s.mars.size() < 2) throw DegenerateMarketError("no infotainment MARs in the virtual submarket");
  auto opt = analysis_options(MechanismKind::mtepvisa, s);
  opt.estimator_samples = n_samples;
  return evaluate_av(s, av, opt).alpha;
}

BidSet truthful_bids(const MarketAnalysis& a) {
  BidSet b;
  b.avs.resize(a.avs.size());
  b.mar_prices.resize(a.avs.size());
  for (std::size_t i = 0; i < a.avs.size(); ++i) {
    const auto& ev = a.avs[i];
    b.avs[i].price = a.values[i];
    for (const auto& t : ev.tasks) b.avs[i].deadlines.push_back(t.deadline_s);
    auto& prices = b.mar_prices[i];
    prices.resize(a.mar_count, 0.0);
    for (std::size_t k = 0; k < a.mar_count; ++k)
      prices[k] = k == 0 ? ev.expected_functional_value : ev.pairs[k].value_rate;
  }
  return b;
}

BidSet truthful_bids(const Scenario& s) {
  return truthful_bids(analyze_market(s, analysis_options(MechanismKind::mtepvisa, s)));
}

AuctionOutcome clear_market(const MarketAnalysis& a, const BidSet& bids, MechanismKind kind) {
  const std::size_t n = a.avs.size();
  if (bids.avs.size() != n) throw ConfigError("bid set does not match the AV roster");
  AuctionOutcome o;
  o.mechanism = kind;
  std::vector<double> prices(n);
  o.scores.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    prices[i] = bids.avs[i].price;
    if (!a.avs[i].dt_feasible) {
      o.scores[i] = kAbsent;
    } else if (kind == MechanismKind::pvisa) {
      o.scores[i] = prices[i];
    } else {
      o.scores[i] = efficient_score(prices[i], a.avs[i].virtual_estimate);
    }
  }
  o.winner_av = allocate_physical(o.scores);
  if (!o.winner_av) return o;
  const std::size_t w = *o.winner_av;
  const auto& ev = a.avs[w];
  o.pay_av = kind == MechanismKind::first_price_control ? prices[w]
                                                        : price_physical(prices, o.scores, w);
  o.value_av = a.values[w];
  o.surplus_dt = o.value_av;
  o.alpha = kind == MechanismKind::pvisa ? 1.0 : ev.alpha;
  for (const auto& t : ev.tasks) o.deadlines.push_back(t.deadline_s);

  std::vector<double> vb(a.mar_count, kAbsent);
  const auto& submitted = bids.mar_prices.at(w);
  for (std::size_t k = 0; k < a.mar_count; ++k)
    if (ev.pairs[k].feasible) vb[k] = submitted.at(k);
  o.winner_mar = a.mar_count > 0 ? allocate_virtual(vb, o.alpha) : std::nullopt;
  if (o.winner_mar) {
    const std::size_t k = *o.winner_mar;
    const auto& pair = ev.pairs[k];
    o.display_duration = pair.display_duration;
    o.per_task_delays = pair.task_delays;
    o.pay_mar = kind == MechanismKind::first_price_control
                    ? o.display_duration * vb[k]
                    : price_virtual(vb, o.alpha, k, o.display_duration);
    o.value_mar = o.display_duration * pair.value_rate;
    (k == 0 ? o.surplus_ar_functional : o.surplus_ar_infotainment) = pair.value_rate;
  } else {
    o.per_task_delays = ev.dt_delays;
  }
  o.surplus_total = social_surplus(o, a.gamma);
  o.revenue = o.pay_av + o.pay_mar;
  return o;
}

namespace {

AuctionOutcome run(const Scenario& s, const BidSet& bids, MechanismKind kind) {
  return clear_market(analyze_market(s, analysis_options(kind, s)), bids, kind);
}

}  // namespace

AuctionOutcome run_mtepvisa(const Scenario& s, const BidSet& bids) {
  return run(s, bids, MechanismKind::mtepvisa);
}

AuctionOutcome run_epvisa(const Scenario& s, const BidSet& bids) {
  return run(s, bids, MechanismKind::epvisa);
}

AuctionOutcome run_pvisa(const Scenario& s, const BidSet& bids) {
  return run(s, bids, MechanismKind::pvisa);
}

AuctionOutcome run_truthful(const Scenario& s, MechanismKind kind) {
  const auto a = analyze_market(s, analysis_options(kind, s));
  return clear_market(a, truthful_bids(a), kind);
}

double social_surplus(const AuctionOutcome& o, double gamma) {
  if (!o.winner_av) return 0.0;
  return o.surplus_dt +
         o.display_duration * (gamma * o.surplus_ar_functional + o.surplus_ar_infotainment);
}

bool deadlines_met(const AuctionOutcome& o) {
  if (o.per_task_delays.size() != o.deadlines.size()) return false;
  for (std::size_t n = 0; n < o.deadlines.size(); ++n)
    if (!(o.per_task_delays[n] <= o.deadlines[n])) return false;
  return true;
}

json to_json(const AuctionOutcome& o) {
  auto index = [](const std::optional<std::size_t>& x) { return x ? json(*x) : json(nullptr); };
  json scores = json::array();
  for (double x : o.scores) scores.push_back(present(x) ? json(x) : json(nullptr));
  return json{
      {"mechanism", to_string(o.mechanism)},
      {"winner_av", index(o.winner_av)},
      {"pay_av", o.pay_av},
      {"winner_mar", index(o.winner_mar)},
      {"pay_mar", o.pay_mar},
      {"alpha", o.alpha},
      {"scores", scores},
      {"per_task_delays", o.per_task_delays},
      {"deadlines", o.deadlines},
      {"display_duration", o.display_duration},
      {"value_av", o.value_av},
      {"value_mar", o.value_mar},
      {"surplus_dt", o.surplus_dt},
      {"surplus_ar_functional", o.surplus_ar_functional},
      {"surplus_ar_infotainment", o.surplus_ar_infotainment},
      {"surplus_total", o.surplus_total},
      {"revenue", o.revenue},
  };
}

}  // namespace vmsync
