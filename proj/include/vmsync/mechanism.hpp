#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace vmsync {

/// Marks a bidder that is not in the market (e.g. filtered for infeasibility).
inline constexpr double kAbsent = -std::numeric_limits<double>::infinity();

inline bool present(double bid) noexcept { return bid != kAbsent; }

/// A physical-submarket bid: offered price plus the task deadlines.
struct AvBid {
  double price = 0.0;
  std::vector<double> deadlines;
};

/// Deadline penalty phi(d). Must be non-decreasing with phi(0) = 0.
using DeadlinePenalty = std::function<double(std::span<const double>)>;

/// Probes `phi` on a grid over [0, 2]^dim; throws ConfigError if phi(0) != 0
/// or any coordinate step decreases it.
void validate_penalty(const DeadlinePenalty& phi, std::size_t dim);

/// price - phi(deadlines). Validates phi first.
double sync_score(const AvBid& bid, const DeadlinePenalty& phi);

/// price + expected display-weighted MAR surplus.
double efficient_score(double price, double virtual_surplus_estimate);

/// Highest score wins; ties go to the lowest index. Absent entries never win.
/// Returns nullopt when every entry is absent. Throws NoMarketError on an
/// empty score list.
std::optional<std::size_t> allocate_physical(std::span<const double> scores);

/// Second-score payment: the price at which the winner's score would equal the
/// runner-up score, i.e. bid - (score - second_score), kept within [0, bid].
/// When scores are bids this is the runner-up's bid. Zero without a runner-up.
double price_physical(std::span<const double> bids, std::span<const double> scores,
                      std::size_t winner);

/// max(1, gamma * E[U_0] / E[U_(2)]). Returns 1 if E[U_(2)] <= 0.
double scaling_factor(double gamma, double expected_functional_value,
                      double expected_second_value);

/// Bids entering the threshold for infotainment MAR k (index >= 1).
///
/// With alpha == 1 every other present bid competes, functional included, so
/// the rule is a plain second-price auction. With alpha > 1 only the other
/// infotainment bids set the bar and the functional MAR takes the slot
/// whenever nobody clears it.
double competing_bid(std::span<const double> bids, std::size_t k, double alpha);

/// Infotainment MAR k wins iff bid_k > alpha * competing_bid (strict); at
/// most one can. Otherwise the functional MAR (index 0) wins if present.
/// Throws NoMarketError on an empty roster.
std::optional<std::size_t> allocate_virtual(std::span<const double> bids, double alpha);

/// Cost-per-time payment: functional winner pays duration * b_0, infotainment
/// winner pays duration * alpha * competing_bid.
double price_virtual(std::span<const double> bids, double alpha, std::size_t winner,
                     double display_duration);

}  // namespace vmsync
