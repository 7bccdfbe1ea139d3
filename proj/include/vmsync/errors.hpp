#pragma once

#include <stdexcept>
#include <string>

namespace vmsync {

/// Invalid configuration: bad distribution bounds, zero entity counts, schema errors.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A formula was evaluated outside its domain (e.g. non-positive noise variance).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A zero-rate link; the task cannot be scheduled on this RSU.
class InfeasibleLinkError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Clearing was requested on a submarket with no bidders.
class NoMarketError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The virtual submarket lacks the functional/infotainment split a rule needs.
class DegenerateMarketError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace vmsync
