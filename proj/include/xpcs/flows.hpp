#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "xpcs/poisson.hpp"
#include "xpcs/recovery.hpp"
#include "xpcs/rng.hpp"

namespace xpcs {

enum class WhaleMagnitudeMode {
  rank_profile,  // deterministic i^{-alpha} profile over ranks 1..k
  pareto,        // i.i.d. Pareto(alpha) draws, sorted descending
};

struct PowerLawConfig {
  int n = 0;
  int k = 0;
  double alpha = 1.0;
  double l0 = 0.0;               // total rate mass target
  double minnow_sigma = 1e-3;    // N(0, sigma^2) background, absolute values
  std::uint64_t seed = 0;
  WhaleMagnitudeMode mode = WhaleMagnitudeMode::rank_profile;
};

enum class SpikeMode {
  per_spike,   // every spike carries intensity I
  total_mass,  // the k spikes share intensity I equally
};

struct CounterSchedule {
  double rho = 1.0;
  std::int64_t nu = 1;
  CounterScheme scheme = CounterScheme::direct;

  double exposure() const { return static_cast<double>(nu) * rho; }
};

struct FlowMetrics {
  double rel_l1_error = 0.0;
  bool support_success = false;
  double seconds = 0.0;
};

// k whales placed uniformly at random, magnitudes from the power-law
// profile, half-normal minnows everywhere else; whale mass is scaled so
// total mass sits at l0 once the expected minnow mass is accounted for.
IntensityVector gen_power_law_rates(const PowerLawConfig& cfg);

IntensityVector gen_sparse_signal(int n, int k, double intensity, std::uint64_t seed,
                                  SpikeMode mode = SpikeMode::per_spike);

// Cumulative counts at time nu*rho and their exact linear measurements.
std::pair<std::vector<std::int64_t>, std::vector<std::int64_t>> simulate_direct_counters(
    const IntensityVector& lambda, const ExpanderGraph& graph, const CounterSchedule& sched,
    Rng& rng);

// Staggered sub-window counters: y_j ~ Poisson((nu rho / m) (A lambda)_j).
Observation simulate_staggered_counters(const IntensityVector& lambda, const ExpanderGraph& graph,
                                        const CounterSchedule& sched, Rng& rng);

// Pure scaling map from the theta estimate back to rates.
IntensityVector rates_from_theta(const IntensityVector& theta, const CounterSchedule& sched,
                                 int m, int d);

// pMLE rate estimator: optional whale isolation (k hint), SPIRAL solve,
// then the theta -> lambda rescaling.
IntensityVector estimate_rates_pmle(const Observation& y, const SensingOperator& op,
                                    const PenaltyModel& penalty, const SolverConfig& cfg,
                                    const CounterSchedule& sched,
                                    std::optional<int> whale_hint = std::nullopt);

FlowMetrics evaluate(const IntensityVector& lambda_true, const IntensityVector& lambda_hat, int k);

// Index set of the k largest entries, ties broken toward the lower index.
std::vector<std::int32_t> top_k_support(std::span<const double> values, int k);

}  // namespace xpcs
