#pragma once

#include <cstdint>
#include <random>

namespace vmsync {

/// SplitMix64 finalizer. Used to derive independent sub-seeds.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Counter-based seed split: the child seed depends only on (parent, stream),
/// so cells can be evaluated in any order and still reproduce.
std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t stream) noexcept;
std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t stream,
                          std::uint64_t index) noexcept;

/// Named streams for scenario sampling. Each entity class draws from its own
/// stream so changing one count (e.g. tasks per AV) does not shift the others.
enum class Stream : std::uint64_t {
  rsu = 1,
  av = 2,
  task = 3,
  mar = 4,
  hits = 5,
  channel = 6,
  generative = 7,
  estimator = 8,
  experiment = 9,
  deviation = 10,
  adverse_selection = 11,
};

std::uint64_t derive_seed(std::uint64_t parent, Stream stream) noexcept;
std::uint64_t derive_seed(std::uint64_t parent, Stream stream,
                          std::uint64_t index) noexcept;

/// Riemann zeta for s > 1 (Euler-Maclaurin, about 1e-15 relative).
double zeta(double s) noexcept;

/// Portable random source. std::mt19937_64 is fully specified by the standard;
/// the std::*_distribution adaptors are not, so the transforms live here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on (0, 1]; never returns 0, so lower bounds are never hit exactly.
  double unit() noexcept {
    // 53 random bits mapped to (0, 1].
    return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
  }
  double uniform(double lo, double hi) noexcept;
  double standard_normal() noexcept;
  /// Zipf(s) on {1, 2, ...}, s > 1 (Devroye's rejection sampler).
  std::uint64_t zipf(double exponent) noexcept;
  /// Pareto with minimum `scale` and tail index `shape`.
  double pareto(double shape, double scale) noexcept;

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace vmsync
