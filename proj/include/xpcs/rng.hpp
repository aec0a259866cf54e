#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace xpcs {

// Counter-based deterministic generator: output t of stream s is
// mix64(key(s) + t*phi), i.e. splitmix64 running on a per-stream key.
// split() derives a child key without advancing the parent, so stream
// layouts are insensitive to the order trials execute in.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : key_(mix64(seed + kGolden)) {}

  Rng split(std::uint64_t stream) const {
    Rng child(0);
    child.key_ = mix64(key_ ^ mix64(stream + 0xd1b54a32d192ed03ULL));
    child.counter_ = 0;
    return child;
  }
  Rng split(std::uint64_t a, std::uint64_t b) const { return split(a).split(b); }

  std::uint64_t next_u64() { return mix64(key_ + (++counter_) * kGolden); }

  // uniform in [0, 1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // uniform integer in [0, bound), unbiased
  std::uint64_t below(std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("Rng::below: bound must be positive");
    const std::uint64_t threshold = (-bound) % bound;
    for (;;) {
      const std::uint64_t x = next_u64();
      if (x >= threshold) return x % bound;
    }
  }

  // standard normal (Box-Muller, cosine branch only)
  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

  // Poisson draw: sequential-search inversion below 10, transformed
  // rejection (Hormann PTRS) at 10 and above.
  std::int64_t poisson(double mean) {
    if (mean < 0.0 || !std::isfinite(mean))
      throw std::domain_error("Rng::poisson: mean must be finite and nonnegative");
    if (mean == 0.0) return 0;
    if (mean < 10.0) return poisson_inversion(mean);
    return poisson_ptrs(mean);
  }

 private:
  static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
  static constexpr double kPi = 3.141592653589793238462643383279502884;

  static std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return z;
  }

  std::int64_t poisson_inversion(double mean) {
    double p = std::exp(-mean);
    double cum = p;
    const double u = uniform();
    std::int64_t x = 0;
    while (u > cum) {
      ++x;
      p *= mean / static_cast<double>(x);
      cum += p;
      if (x > 2000) break;  // cum has saturated numerically
    }
    return x;
  }

  std::int64_t poisson_ptrs(double mean) {
    const double slam = std::sqrt(mean);
    const double loglam = std::log(mean);
    const double b = 0.931 + 2.53 * slam;
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double v_r = 0.9277 - 3.6224 / (b - 2.0);
    for (;;) {
      const double u = uniform() - 0.5;
      const double v = uniform();
      const double us = 0.5 - std::fabs(u);
      const auto k = static_cast<std::int64_t>(
          std::floor((2.0 * a / us + b) * u + mean + 0.43));
      if (us >= 0.07 && v <= v_r) return k;
      if (k < 0 || (us < 0.013 && v > us)) continue;
      if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
          static_cast<double>(k) * loglam - mean - std::lgamma(static_cast<double>(k) + 1.0))
        return k;
    }
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace xpcs
