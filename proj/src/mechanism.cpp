#include "vmsync/mechanism.hpp"

#include <algorithm>
#include <string>

#include "vmsync/errors.hpp"

namespace vmsync {

void validate_penalty(const DeadlinePenalty& phi, std::size_t dim) {
  if (!phi) throw ConfigError("deadline penalty is empty");
  std::vector<double> x(dim, 0.0);
  if (phi(x) != 0.0) throw ConfigError("deadline penalty must vanish at zero");
  constexpr int kSteps = 8;
  constexpr double kStep = 2.0 / kSteps;
  for (int t = 0; t <= kSteps; ++t) {
    std::fill(x.begin(), x.end(), t * kStep);
    const double base = phi(x);
    for (std::size_t c = 0; c < dim; ++c) {
      x[c] += kStep;
      const double up = phi(x);
      x[c] -= kStep;
      if (up < base)
        throw ConfigError("deadline penalty decreases along coordinate " + std::to_string(c));
    }
  }
}

double sync_score(const AvBid& bid, const DeadlinePenalty& phi) {
  validate_penalty(phi, bid.deadlines.size());
  return bid.price - phi(bid.deadlines);
}

double efficient_score(double price, double virtual_surplus_estimate) {
  return price + virtual_surplus_estimate;
}

std::optional<std::size_t> allocate_physical(std::span<const double> scores) {
  if (scores.empty()) throw NoMarketError("physical submarket has no bidders");
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!present(scores[i])) continue;
    if (!best || scores[i] > scores[*best]) best = i;
  }
  return best;
}

double price_physical(std::span<const double> bids, std::span<const double> scores,
                      std::size_t winner) {
  double second = kAbsent;
  for (std::size_t i = 0; i < scores.size(); ++i)
    if (i != winner && present(scores[i])) second = std::max(second, scores[i]);
  if (!present(second)) return 0.0;
  // The winner's non-price part of the score, then the price that ties the runner-up.
  const double rest = scores[winner] - bids[winner];
  const double pay = second - rest;
  return std::clamp(pay, 0.0, std::max(bids[winner], 0.0));
}

double scaling_factor(double gamma, double expected_functional_value,
                      double expected_second_value) {
  if (!(expected_second_value > 0.0)) return 1.0;
  return std::max(1.0, gamma * expected_functional_value / expected_second_value);
}

double competing_bid(std::span<const double> bids, std::size_t k, double alpha) {
  double best = 0.0;  // reserve
  const std::size_t first = alpha > 1.0 ? 1 : 0;
  for (std::size_t j = first; j < bids.size(); ++j)
    if (j != k && present(bids[j])) best = std::max(best, bids[j]);
  return best;
}

std::optional<std::size_t> allocate_virtual(std::span<const double> bids, double alpha) {
  if (bids.empty()) throw NoMarketError("virtual submarket has no bidders");
  if (alpha >= 1.0) {
    // Only the top infotainment bid can clear a bar that includes the others.
    std::size_t top = 0;
    for (std::size_t k = 1; k < bids.size(); ++k)
      if (present(bids[k]) && (top == 0 || bids[k] > bids[top])) top = k;
    if (top != 0 && bids[top] > alpha * competing_bid(bids, top, alpha)) return top;
  } else {
    for (std::size_t k = 1; k < bids.size(); ++k)
      if (present(bids[k]) && bids[k] > alpha * competing_bid(bids, k, alpha)) return k;
  }
  if (present(bids[0])) return 0;
  return std::nullopt;
}

double price_virtual(std::span<const double> bids, double alpha, std::size_t winner,
                     double display_duration) {
  if (winner == 0) return display_duration * bids[0];
  return display_duration * (alpha * competing_bid(bids, winner, alpha));
}

}  // namespace vmsync
