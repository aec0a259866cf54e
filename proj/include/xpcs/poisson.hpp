#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "xpcs/expander.hpp"
#include "xpcs/rng.hpp"

namespace xpcs {

// Nonnegative signal theta or rate vector lambda with cached l1 mass.
struct IntensityVector {
  std::vector<double> values;
  double l1_mass = 0.0;

  static IntensityVector from(std::vector<double> v);
  int size() const { return static_cast<int>(values.size()); }
};

enum class CounterScheme { none, direct, staggered };

struct ExposureMeta {
  CounterScheme scheme = CounterScheme::none;
  double nu_rho = 0.0;  // total exposure (nu updates of period rho)
  int m = 0;
};

// Nonnegative integer count vector with provenance.
struct Observation {
  std::vector<std::int64_t> counts;
  ExposureMeta meta;

  static Observation from(std::vector<std::int64_t> c, ExposureMeta meta = {});
  int size() const { return static_cast<int>(counts.size()); }
  std::int64_t total() const;
};

struct L1Estimate {
  double lower = 0.0;
  double upper = 0.0;
  double t = 0.0;
  double eps = 0.0;
  double confidence = 0.0;  // approximate, Mill's-ratio tail
};

// Per-edge event counts aligned with a graph's adjacency lists:
// counts[i][e] is the number of events from left node i landing on its
// e-th neighbor. Sparse stand-in for the m x n event matrix z.
struct EdgeCountMatrix {
  const ExpanderGraph* graph = nullptr;
  std::vector<std::vector<std::int64_t>> counts;  // n rows of d entries

  std::vector<std::int64_t> row_sums() const;  // y_j, length m
  std::vector<std::int64_t> col_sums() const;  // w_i, length n
};

// lambda^z e^{-lambda} / z!, with the lambda = 0 boundary: 1 iff z = 0.
double poisson_pmf(double lambda, std::int64_t z);

std::vector<std::int64_t> sample_poisson(std::span<const double> mean, Rng& rng);

// sum_j [mean_j - y_j log mean_j]; the log(y_j!) constant is dropped, so
// values are comparable only within a fixed y. +inf when mean_j = 0 < y_j.
double neg_log_likelihood(const Observation& y, std::span<const double> mean);
double neg_log_likelihood(std::span<const std::int64_t> counts, std::span<const double> mean);

// Product-Poisson KL divergence sum_j [g_j log(g_j/h_j) - g_j + h_j].
double kl_poisson(std::span<const double> g, std::span<const double> h);

// sum_j (sqrt(g_j) - sqrt(h_j))^2 == -2 log of the Hellinger affinity.
double hellinger_sq(std::span<const double> g, std::span<const double> h);

// Returns (lhs, rhs) of the l1-vs-Hellinger bound
//   ||Phi~(theta*-theta)||_1^2  <=  4 L * hellinger_sq(Phi~theta*, Phi~theta).
std::pair<double, double> hellinger_l1_bound_check(const SensingOperator& op,
                                                   std::span<const double> theta_star,
                                                   std::span<const double> theta, double l_mass);

// Per-edge sampling: z_{j,i} ~ Poisson(Phi_{j,i} theta_i) independently.
EdgeCountMatrix sample_model_a(const IntensityVector& theta, const SensingOperator& op, Rng& rng);

// Source-first sampling: w_i ~ Poisson(theta_i), then w_i events routed
// multinomially along column i of Phi. Same z-distribution as model A.
EdgeCountMatrix sample_model_b(const IntensityVector& theta, const SensingOperator& op, Rng& rng);

// Interval for ||theta*||_1 from total counts via the square-root
// variance-stabilizing transform and RIP-1 slack eps.
L1Estimate estimate_l1_mass(const Observation& y, double t, double eps);

}  // namespace xpcs
