#include "vmsync/random.hpp"

#include <cmath>
#include <numbers>

namespace vmsync {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t stream) noexcept {
  return splitmix64(splitmix64(parent) ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t stream,
                          std::uint64_t index) noexcept {
  return derive_seed(derive_seed(parent, stream), index);
}

std::uint64_t derive_seed(std::uint64_t parent, Stream stream) noexcept {
  return derive_seed(parent, static_cast<std::uint64_t>(stream));
}

std::uint64_t derive_seed(std::uint64_t parent, Stream stream, std::uint64_t index) noexcept {
  return derive_seed(parent, static_cast<std::uint64_t>(stream), index);
}

double Rng::uniform(double lo, double hi) noexcept {
  if (lo == hi) return lo;
  return lo + (hi - lo) * unit();
}

double Rng::standard_normal() noexcept {
  // Box-Muller, one variate per call so the stream position stays simple.
  const double u1 = unit();
  const double u2 = unit();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double zeta(double s) noexcept {
  constexpr int kN = 32;
  double sum = 0.0;
  for (int k = kN - 1; k >= 1; --k) sum += std::pow(static_cast<double>(k), -s);
  const double n = kN;
  const double ns = std::pow(n, -s);
  sum += n * ns / (s - 1.0) + 0.5 * ns;
  // Bernoulli correction terms B2..B8.
  constexpr double kCoef[] = {1.0 / 12.0, -1.0 / 720.0, 1.0 / 30240.0, -1.0 / 1209600.0};
  double rising = s;  // s (s+1) ... (s+2j-2)
  double power = ns / n;
  for (int j = 0; j < 4; ++j) {
    sum += kCoef[j] * rising * power;
    rising *= (s + 2 * j + 1) * (s + 2 * j + 2);
    power /= n * n;
  }
  return sum;
}

std::uint64_t Rng::zipf(double exponent) noexcept {
  const double am1 = exponent - 1.0;
  const double b = std::pow(2.0, am1);
  constexpr double kMax = 9.0e15;
  for (;;) {
    const double u = unit();
    const double v = unit();
    const double x = std::floor(std::pow(u, -1.0 / am1));
    if (!(x < kMax)) continue;
    const double t = std::pow(1.0 + 1.0 / x, am1);
    if (v * x * (t - 1.0) / (b - 1.0) <= t / b) return static_cast<std::uint64_t>(x);
  }
}

double Rng::pareto(double shape, double scale) noexcept {
  return scale * std::pow(unit(), -1.0 / shape);
}

}  // namespace vmsync
