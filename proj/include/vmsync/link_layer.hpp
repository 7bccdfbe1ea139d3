#pragma once

#include "vmsync/scenario.hpp"

namespace vmsync {

/// Shannon rates for one (AV, RSU) pair, bits/s.
struct LinkBudget {
  double uplink_rate = 0.0;
  double downlink_rate = 0.0;
};

/// bandwidth * log2(1 + gain * power / noise). Throws DomainError if noise <= 0.
double shannon_rate(double bandwidth_hz, double gain, double power_mw, double noise_mw);

/// AV -> RSU rate with the AV's transmit power and the RSU's noise.
double uplink_rate(const AvProfile& av, const RsuProfile& rsu, const ChannelState& ch);
/// RSU -> AV rate with the RSU's transmit power and the AV's noise.
double downlink_rate(const AvProfile& av, const RsuProfile& rsu, const ChannelState& ch);
LinkBudget link_budget(const AvProfile& av, const RsuProfile& rsu, const ChannelState& ch);

/// size / uplink rate. Throws InfeasibleLinkError when the rate is not positive.
double dt_upload_delay(const DtTask& task, double uplink_rate);
/// size * cycles-per-bit / CPU frequency.
double dt_compute_delay(const DtTask& task, const RsuProfile& rsu);

}  // namespace vmsync
