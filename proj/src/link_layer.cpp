#include "vmsync/link_layer.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "vmsync/errors.hpp"

namespace vmsync {

double shannon_rate(double bandwidth_hz, double gain, double power_mw, double noise_mw) {
  if (!(noise_mw > 0.0)) throw DomainError("noise variance must be positive, got " + std::to_string(noise_mw));
  // log1p keeps full relative precision at low SNR, where 1 + snr rounds.
  return bandwidth_hz * (std::log1p(gain * power_mw / noise_mw) / std::numbers::ln2);
}

double uplink_rate(const AvProfile& av, const RsuProfile& rsu, const ChannelState& ch) {
  return shannon_rate(rsu.uplink_bw_hz, ch.gain_at(av.id, rsu.id), av.tx_power_mw, rsu.noise_var_mw);
}

double downlink_rate(const AvProfile& av, const RsuProfile& rsu, const ChannelState& ch) {
  return shannon_rate(rsu.downlink_bw_hz, ch.gain_at(av.id, rsu.id), rsu.tx_power_mw,
                      ch.noise_var_av.at(av.id));
}

LinkBudget link_budget(const AvProfile& av, const RsuProfile& rsu, const ChannelState& ch) {
  return {uplink_rate(av, rsu, ch), downlink_rate(av, rsu, ch)};
}

double dt_upload_delay(const DtTask& task, double uplink_rate) {
  if (!(uplink_rate > 0.0)) throw InfeasibleLinkError("uplink rate is zero");
  return task.size_bits / uplink_rate;
}

double dt_compute_delay(const DtTask& task, const RsuProfile& rsu) {
  return task.size_bits * task.cycles_per_bit / rsu.cpu_freq_hz;
}

}  // namespace vmsync
