#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "xpcs/expander.hpp"
#include "xpcs/poisson.hpp"

namespace xpcs {

struct InfeasibleLikelihood : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SolverFailure : std::runtime_error {
  SolverFailure(const std::string& what, double resid)
      : std::runtime_error(what), residual(resid) {}
  double residual = 0.0;
};

enum class PenaltyKind { l1_weighted, quantized_l0 };

struct PenaltyModel {
  PenaltyKind kind = PenaltyKind::l1_weighted;
  double tau = 0.0;      // l1 weight
  double delta = 0.0;    // quantizer step
  double l0_mass = 0.0;  // mass bound L0 for the quantized family
  std::optional<double> c_floor;  // positivity floor for verification

  static PenaltyModel l1(double tau_weight);
  static PenaltyModel quantized(double delta_step, double l0);
};

// pen(theta) under the model: tau*||theta||_1 or ||theta||_0 * log(1/delta).
double penalty_value(const PenaltyModel& pen, std::span<const double> theta);

// r * log(1/delta): code length of a support-r quantized candidate.
double quantized_penalty(std::int64_t support_size, double delta);

// Kraft compliance of the quantized family: delta <= (2 n L0)^-2.
bool kraft_ok(double delta, std::int64_t n, double l0);

struct SolverConfig {
  int max_iters = 500;
  double rel_obj_tol = 1e-9;
  double step_min = 1e-8;
  double step_max = 1e8;
  std::optional<double> l1_budget;  // enforce ||theta||_1 <= budget
};

struct RecoveryResult {
  IntensityVector estimate;
  std::vector<double> objective_trace;  // accepted objective values
  int iterations = 0;
  bool converged = false;
};

// SPIRAL-l1: minimize  nll(y, Phi~ theta) + tau ||theta||_1  over theta >= 0
// by quadratic separable surrogates with Barzilai-Borwein steps and
// monotone backtracking; each subproblem is a soft-threshold + clip.
RecoveryResult pmle_spiral_l1(const Observation& y, const SensingOperator& op,
                              const PenaltyModel& penalty, const SolverConfig& cfg);

// Same solver with coordinates outside v1 frozen at zero.
RecoveryResult restricted_pmle(const Observation& y, const SensingOperator& op,
                               std::span<const std::int32_t> v1, const PenaltyModel& penalty,
                               const SolverConfig& cfg);

// Basis pursuit  min ||u||_1 s.t. A u = y  via ADMM (projection onto the
// affine constraint uses a dense Cholesky of A A^T). Negative entries are
// allowed; callers clip afterwards.
std::vector<double> direct_bp(std::span<const std::int64_t> y_counts, const ExpanderGraph& graph,
                              const SolverConfig& cfg);

// Eq-style rate read-out: clip negatives, divide by exposure nu*rho.
IntensityVector direct_rate_estimate(std::span<const double> x_hat, std::int64_t nu, double rho);

struct WhaleIsolationResult {
  std::vector<std::int32_t> v1;  // candidate whale support, ascending
  std::vector<std::int32_t> b1;  // kd largest-count right nodes, ascending
  bool passed_size_bound = false;  // |V1| <= kd
  double elapsed_seconds = 0.0;
};

// Algorithm-1 preprocessing: B1 = kd largest counts (ties to lower index),
// V1 = left nodes with no neighbor outside B1. O(m log m + n d).
WhaleIsolationResult whale_isolation(const Observation& y, const ExpanderGraph& graph, int k);

// Brute-force discrete pMLE: argmin over candidates of
// nll(y, means[c]) + 2 pen[c]; means[c] is the precomputed Phi~ theta_c.
std::size_t pmle_discrete(const Observation& y, std::span<const std::vector<double>> means,
                          std::span<const double> penalties);

// RHS of the oracle inequality:
//   4 sigma_k(theta*) + 8 sqrt(L * min_c [KL(P_{Phi~theta*} || P_{Phi~theta_c}) + 2 pen_c]).
double bound_theorem1(const SensingOperator& op, const IntensityVector& theta_star,
                      std::span<const IntensityVector> candidates,
                      std::span<const double> penalties, int k);

// Direct-method risk bound: 4 sigma_k(lambda*) + ||sqrt(lambda*)||_1 / sqrt(nu rho).
double bound_theorem3(const IntensityVector& lambda_star, int k, std::int64_t nu, double rho);

}  // namespace xpcs
