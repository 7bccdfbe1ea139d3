#pragma once

#include "vmsync/link_layer.hpp"
#include "vmsync/scenario.hpp"

namespace vmsync {

/// DT-side timing of one task on one RSU.
struct TaskTiming {
  double upload_s = 0.0;
  double compute_s = 0.0;
  double deadline_s = 0.0;

  /// Time left for AR display after the DT task completes; may be negative.
  double slack() const noexcept { return deadline_s - upload_s - compute_s; }
};

TaskTiming task_timing(const DtTask& task, const LinkBudget& link, const RsuProfile& rsu);

struct RecommendationCount {
  double count = 0.0;
  bool feasible = true;  // false when the deadline slack is negative
};

/// Number of AR layers the downlink can carry in the slack:
/// slack * R_d / s_AR, or 0 (flagged infeasible) for negative slack.
RecommendationCount recommendation_count(const TaskTiming& timing, const LinkBudget& link,
                                         const MarProfile& mar);

/// Which branch resolved the h_{i,k} division.
enum class HitBranch { regular, zero_hits_linear, zero_hits_vanishing };

struct MatchQuality {
  double value = 0.0;
  HitBranch branch = HitBranch::regular;
};

/// theta(x) = x^beta.
double theta(double x, double beta);

/// Generated layers per hit cache, G * count / h. Zero when h == 0: with no
/// hit caches only the mandatory layer is streamed.
double layer_term(const TaskTiming& timing, const LinkBudget& link, const MarProfile& mar,
                  int hits, double score);

/// Generative match quality theta(G * count / h) * h.
///
/// For h == 0 the expression only has a limit when beta == 1, where h cancels
/// and m = G * count; for beta > 1 the match quality is 0.
MatchQuality match_quality(const TaskTiming& timing, const LinkBudget& link,
                           const MarProfile& mar, int hits, double score, double beta);

/// (layer_term + 1) * s_AR / R_d. Throws InfeasibleLinkError on a zero downlink.
double ar_transmission_delay(const TaskTiming& timing, const LinkBudget& link,
                             const MarProfile& mar, int hits, double score);

/// (layer_term + 1) * s_AR * e_AR / f_G.
double ar_compute_delay(const TaskTiming& timing, const LinkBudget& link, const MarProfile& mar,
                        const RsuProfile& rsu, int hits, double score);

/// Allocation indicators (g_DT, g_AR) for the evaluated pair.
struct Allocation {
  bool dt = true;
  bool ar = true;
};

struct SyncEvaluation {
  double t_dt = 0.0;
  double l_dt = 0.0;
  double t_ar = 0.0;
  double l_ar = 0.0;
  double match_quality = 0.0;
  double total_delay = 0.0;
  bool feasible = true;
};

/// Builds a SyncEvaluation from already computed components.
SyncEvaluation combine_delays(double t_dt, double l_dt, double t_ar, double l_ar,
                              double match_quality, double deadline, Allocation alloc);

/// Full per-task evaluation of an (AV, RSU, MAR) triple under the generative model.
SyncEvaluation total_delay(const TaskTiming& timing, const LinkBudget& link,
                           const MarProfile& mar, const RsuProfile& rsu, int hits, double score,
                           double beta, Allocation alloc = {});

/// Same triple without generative content: the MAR can only stream its h hit
/// caches, so match quality is h and h layers are rendered and sent.
SyncEvaluation hit_cache_delay(const TaskTiming& timing, const LinkBudget& link,
                               const MarProfile& mar, const RsuProfile& rsu, int hits,
                               Allocation alloc = {});

}  // namespace vmsync
