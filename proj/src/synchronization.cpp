#include "vmsync/synchronization.hpp"

#include <cmath>

#include "vmsync/errors.hpp"

namespace vmsync {

TaskTiming task_timing(const DtTask& task, const LinkBudget& link, const RsuProfile& rsu) {
  return {dt_upload_delay(task, link.uplink_rate), dt_compute_delay(task, rsu), task.deadline_s};
}

RecommendationCount recommendation_count(const TaskTiming& timing, const LinkBudget& link,
                                         const MarProfile& mar) {
  const double slack = timing.slack();
  if (slack < 0.0) return {0.0, false};
  return {slack * link.downlink_rate / mar.ar_size_bits, true};
}

double theta(double x, double beta) { return beta == 1.0 ? x : std::pow(x, beta); }

double layer_term(const TaskTiming& timing, const LinkBudget& link, const MarProfile& mar,
                  int hits, double score) {
  if (hits == 0) return 0.0;
  return score * recommendation_count(timing, link, mar).count / hits;
}

MatchQuality match_quality(const TaskTiming& timing, const LinkBudget& link,
                           const MarProfile& mar, int hits, double score, double beta) {
  if (hits > 0) return {theta(layer_term(timing, link, mar, hits, score), beta) * hits, HitBranch::regular};
  if (beta == 1.0)
    return {score * recommendation_count(timing, link, mar).count, HitBranch::zero_hits_linear};
  return {0.0, HitBranch::zero_hits_vanishing};
}

double ar_transmission_delay(const TaskTiming& timing, const LinkBudget& link,
                             const MarProfile& mar, int hits, double score) {
  if (!(link.downlink_rate > 0.0)) throw InfeasibleLinkError("downlink rate is zero");
  return (layer_term(timing, link, mar, hits, score) + 1.0) * mar.ar_size_bits / link.downlink_rate;
}

double ar_compute_delay(const TaskTiming& timing, const LinkBudget& link, const MarProfile& mar,
                        const RsuProfile& rsu, int hits, double score) {
  return (layer_term(timing, link, mar, hits, score) + 1.0) * mar.ar_size_bits *
         mar.ar_cycles_per_bit / rsu.gpu_freq_hz;
}

SyncEvaluation combine_delays(double t_dt, double l_dt, double t_ar, double l_ar,
                              double match_quality, double deadline, Allocation alloc) {
  SyncEvaluation e{t_dt, l_dt, t_ar, l_ar, match_quality, 0.0, true};
  if (alloc.dt) e.total_delay += t_dt + l_dt;
  if (alloc.ar) e.total_delay += t_ar + l_ar;
  e.feasible = e.total_delay <= deadline;
  return e;
}

SyncEvaluation total_delay(const TaskTiming& timing, const LinkBudget& link,
                           const MarProfile& mar, const RsuProfile& rsu, int hits, double score,
                           double beta, Allocation alloc) {
  double t_ar = 0.0, l_ar = 0.0, m = 0.0;
  if (alloc.ar) {
    t_ar = ar_transmission_delay(timing, link, mar, hits, score);
    l_ar = ar_compute_delay(timing, link, mar, rsu, hits, score);
    m = match_quality(timing, link, mar, hits, score, beta).value;
  }
  return combine_delays(timing.upload_s, timing.compute_s, t_ar, l_ar, m, timing.deadline_s, alloc);
}

SyncEvaluation hit_cache_delay(const TaskTiming& timing, const LinkBudget& link,
                               const MarProfile& mar, const RsuProfile& rsu, int hits,
                               Allocation alloc) {
  double t_ar = 0.0, l_ar = 0.0, m = 0.0;
  if (alloc.ar && hits > 0) {
    if (!(link.downlink_rate > 0.0)) throw InfeasibleLinkError("downlink rate is zero");
    t_ar = hits * mar.ar_size_bits / link.downlink_rate;
    l_ar = hits * mar.ar_size_bits * mar.ar_cycles_per_bit / rsu.gpu_freq_hz;
    m = hits;
  }
  return combine_delays(timing.upload_s, timing.compute_s, t_ar, l_ar, m, timing.deadline_s, alloc);
}

}  // namespace vmsync
