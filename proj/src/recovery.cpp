#include "xpcs/recovery.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

namespace xpcs {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kGradFloor = 1e-30;  // log guard inside the gradient only

double l1_norm(std::span<const double> v) {
  double acc = 0.0;
  for (const double x : v) acc += std::fabs(x);
  return acc;
}

double sum(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0);
}

// Shared SPIRAL core. mask == nullptr means unrestricted; otherwise
// coordinates with mask[i] == 0 stay at exactly zero.
RecoveryResult spiral_core(const Observation& y, const SensingOperator& op, double tau,
                           const SolverConfig& cfg, const std::vector<std::uint8_t>* mask) {
  const int n = op.cols();
  const int m = op.rows();
  if (y.size() != m) throw std::invalid_argument("pmle_spiral_l1: observation length mismatch");
  if (!op.normalized) throw std::invalid_argument("pmle_spiral_l1: operator must be normalized");
  if (tau < 0.0) throw std::invalid_argument("pmle_spiral_l1: tau must be nonnegative");
  if (cfg.step_min > cfg.step_max || cfg.rel_obj_tol <= 0.0)
    throw std::invalid_argument("pmle_spiral_l1: bad solver config");

  const auto mask_in = [&](int i) {
    return mask == nullptr || (*mask)[static_cast<std::size_t>(i)] != 0;
  };

  int free_coords = n;
  if (mask != nullptr)
    free_coords = static_cast<int>(std::count(mask->begin(), mask->end(), std::uint8_t{1}));

  const auto project_budget = [&](std::vector<double>& theta) {
    if (!cfg.l1_budget) return;
    const double mass = sum(theta);
    if (mass > *cfg.l1_budget && mass > 0.0) {
      const double scale = *cfg.l1_budget / mass;
      for (double& v : theta) v *= scale;
    }
  };

  const auto objective = [&](const std::vector<double>& theta, const std::vector<double>& mu) {
    const double nll = neg_log_likelihood(y, mu);
    return nll + tau * sum(theta);  // theta >= 0, so sum == l1
  };

  RecoveryResult result;

  // Degenerate restriction: the feasible set is the single point zero.
  if (free_coords == 0) {
    std::vector<double> zero(static_cast<std::size_t>(n), 0.0);
    const auto mu = apply(op, zero);
    result.estimate = IntensityVector::from(std::move(zero));
    result.objective_trace.push_back(objective(result.estimate.values, mu));
    result.converged = true;
    return result;
  }

  // theta0 = Phi~^T y, masked; strictly positive on every row that has data
  std::vector<double> y_real(y.counts.begin(), y.counts.end());
  std::vector<double> theta = apply_transpose(op, y_real);
  for (int i = 0; i < n; ++i)
    if (!mask_in(i)) theta[static_cast<std::size_t>(i)] = 0.0;
  project_budget(theta);

  std::vector<double> mu = apply(op, theta);
  double obj = objective(theta, mu);
  if (std::isinf(obj)) {
    // Some observed count sits on a row no in-mask coordinate reaches;
    // no iterate can ever have finite likelihood.
    throw InfeasibleLikelihood("pmle_spiral_l1: observed counts unreachable from the feasible support");
  }
  result.objective_trace.push_back(obj);

  const auto gradient = [&](const std::vector<double>& means) {
    std::vector<double> resid(static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j) {
      const double mj = std::max(means[static_cast<std::size_t>(j)], kGradFloor);
      resid[static_cast<std::size_t>(j)] =
          1.0 - static_cast<double>(y.counts[static_cast<std::size_t>(j)]) / mj;
    }
    return apply_transpose(op, resid);
  };

  std::vector<double> grad = gradient(mu);
  std::vector<double> trial(static_cast<std::size_t>(n));
  std::vector<double> prev_theta;
  std::vector<double> prev_grad;
  double alpha = 1.0;

  int iter = 0;
  for (; iter < cfg.max_iters; ++iter) {
    // Barzilai-Borwein curvature estimate from the previous accepted move
    if (!prev_theta.empty()) {
      double sty = 0.0, sts = 0.0;
      for (int i = 0; i < n; ++i) {
        const double s = theta[static_cast<std::size_t>(i)] - prev_theta[static_cast<std::size_t>(i)];
        const double dg = grad[static_cast<std::size_t>(i)] - prev_grad[static_cast<std::size_t>(i)];
        sty += s * dg;
        sts += s * s;
      }
      if (sts > 0.0 && std::isfinite(sty) && sty > 0.0) alpha = sty / sts;
    }
    alpha = std::clamp(alpha, cfg.step_min, cfg.step_max);

    // Monotone backtracking on the separable surrogate step
    double new_obj = kInf;
    std::vector<double> new_mu;
    double a = alpha;
    for (;;) {
      const double shrink = tau / a;
      for (int i = 0; i < n; ++i) {
        double v = 0.0;
        if (mask_in(i))
          v = std::max(0.0, theta[static_cast<std::size_t>(i)] -
                                grad[static_cast<std::size_t>(i)] / a - shrink);
        trial[static_cast<std::size_t>(i)] = v;
      }
      project_budget(trial);
      new_mu = apply(op, trial);
      new_obj = objective(trial, new_mu);
      if (new_obj <= obj) break;
      if (a >= cfg.step_max) {  // no descent direction left at the stiffest step
        new_obj = obj;
        trial = theta;
        new_mu = mu;
        break;
      }
      a = std::min(a * 2.0, cfg.step_max);
    }
    alpha = a;

    prev_theta = theta;
    prev_grad = grad;
    theta.swap(trial);
    mu.swap(new_mu);
    const double old_obj = obj;
    obj = new_obj;
    result.objective_trace.push_back(obj);
    grad = gradient(mu);

    const double change = old_obj - obj;
    if (change <= cfg.rel_obj_tol * std::max(1.0, std::fabs(old_obj))) {
      ++iter;
      result.converged = true;
      break;
    }
  }

  result.iterations = iter;
  result.estimate = IntensityVector::from(std::move(theta));
  return result;
}

}  // namespace

PenaltyModel PenaltyModel::l1(double tau_weight) {
  if (tau_weight < 0.0) throw std::invalid_argument("PenaltyModel::l1: tau must be >= 0");
  PenaltyModel p;
  p.kind = PenaltyKind::l1_weighted;
  p.tau = tau_weight;
  return p;
}

PenaltyModel PenaltyModel::quantized(double delta_step, double l0) {
  if (delta_step <= 0.0 || delta_step >= 1.0)
    throw std::domain_error("PenaltyModel::quantized: delta must lie in (0,1)");
  if (l0 <= 0.0) throw std::domain_error("PenaltyModel::quantized: L0 must be positive");
  PenaltyModel p;
  p.kind = PenaltyKind::quantized_l0;
  p.delta = delta_step;
  p.l0_mass = l0;
  return p;
}

double penalty_value(const PenaltyModel& pen, std::span<const double> theta) {
  if (pen.kind == PenaltyKind::l1_weighted) return pen.tau * l1_norm(theta);
  std::int64_t r = 0;
  for (const double v : theta)
    if (v != 0.0) ++r;
  return quantized_penalty(r, pen.delta);
}

double quantized_penalty(std::int64_t support_size, double delta) {
  if (support_size < 0) throw std::domain_error("quantized_penalty: negative support size");
  if (delta <= 0.0 || delta >= 1.0)
    throw std::domain_error("quantized_penalty: delta must lie in (0,1)");
  return static_cast<double>(support_size) * std::log(1.0 / delta);
}

bool kraft_ok(double delta, std::int64_t n, double l0) {
  if (delta <= 0.0 || delta >= 1.0) throw std::domain_error("kraft_ok: delta must lie in (0,1)");
  if (n < 1 || l0 <= 0.0) throw std::domain_error("kraft_ok: need n >= 1 and L0 > 0");
  const double limit = 1.0 / (4.0 * static_cast<double>(n) * static_cast<double>(n) * l0 * l0);
  return delta <= limit;
}

RecoveryResult pmle_spiral_l1(const Observation& y, const SensingOperator& op,
                              const PenaltyModel& penalty, const SolverConfig& cfg) {
  if (penalty.kind != PenaltyKind::l1_weighted)
    throw std::invalid_argument("pmle_spiral_l1: expects the l1_weighted penalty");
  return spiral_core(y, op, penalty.tau, cfg, nullptr);
}

RecoveryResult restricted_pmle(const Observation& y, const SensingOperator& op,
                               std::span<const std::int32_t> v1, const PenaltyModel& penalty,
                               const SolverConfig& cfg) {
  if (penalty.kind != PenaltyKind::l1_weighted)
    throw std::invalid_argument("restricted_pmle: expects the l1_weighted penalty");
  const int n = op.cols();
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(n), 0);
  for (const std::int32_t i : v1) {
    if (i < 0 || i >= n) throw std::invalid_argument("restricted_pmle: index out of range");
    mask[static_cast<std::size_t>(i)] = 1;
  }
  return spiral_core(y, op, penalty.tau, cfg, &mask);
}

std::vector<double> direct_bp(std::span<const std::int64_t> y_counts, const ExpanderGraph& graph,
                              const SolverConfig& cfg) {
  const int n = graph.n;
  const int m = graph.m;
  if (static_cast<int>(y_counts.size()) != m)
    throw std::invalid_argument("direct_bp: observation length mismatch");

  std::vector<double> b(y_counts.begin(), y_counts.end());
  const double b_l1 = l1_norm(b);
  if (b_l1 == 0.0) return std::vector<double>(static_cast<std::size_t>(n), 0.0);

  // work on b/s for scale-free tolerances, multiply back at the end
  const double s = *std::max_element(b.begin(), b.end(),
                                     [](double p, double q) { return std::fabs(p) < std::fabs(q); });
  const double scale = std::fabs(s) > 0.0 ? std::fabs(s) : 1.0;
  Eigen::VectorXd bs(m);
  for (int j = 0; j < m; ++j) bs[j] = b[static_cast<std::size_t>(j)] / scale;

  // Gram matrix A A^T: every left node contributes a d x d clique
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(m, m);
  for (int i = 0; i < n; ++i) {
    const auto nb = graph.neighbors(i);
    for (int e1 = 0; e1 < graph.d; ++e1)
      for (int e2 = 0; e2 < graph.d; ++e2)
        gram(nb[static_cast<std::size_t>(e1)], nb[static_cast<std::size_t>(e2)]) += 1.0;
  }
  // tiny ridge keeps the factorization valid when a right node has no edges
  const double ridge = 1e-10 * static_cast<double>(graph.d);
  for (int j = 0; j < m; ++j) gram(j, j) += ridge;
  const Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success)
    throw SolverFailure("direct_bp: Cholesky factorization of A A^T failed", kInf);

  const SensingOperator op(graph, false);
  const auto apply_a = [&](const Eigen::VectorXd& v) {
    std::span<const double> vs(v.data(), static_cast<std::size_t>(v.size()));
    const auto out = apply(op, vs);
    return Eigen::Map<const Eigen::VectorXd>(out.data(), m).eval();
  };
  const auto apply_at = [&](const Eigen::VectorXd& w) {
    std::span<const double> ws(w.data(), static_cast<std::size_t>(w.size()));
    const auto out = apply_transpose(op, ws);
    return Eigen::Map<const Eigen::VectorXd>(out.data(), n).eval();
  };
  // projection onto {v : A v = bs}
  const auto project = [&](const Eigen::VectorXd& v) {
    const Eigen::VectorXd resid = apply_a(v) - bs;
    return (v - apply_at(llt.solve(resid))).eval();
  };

  constexpr double feas_tol = 1e-7;
  constexpr double opt_tol = 1e-7;
  constexpr double relax = 1.6;

  Eigen::VectorXd x = apply_at(llt.solve(bs));  // minimum-norm feasible start
  Eigen::VectorXd z = x;
  Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
  double rho = 1.0;

  const auto soft = [](double v, double t) {
    if (v > t) return v - t;
    if (v < -t) return v + t;
    return 0.0;
  };

  const int budget = std::max(cfg.max_iters, 1);
  for (int iter = 0; iter < budget; ++iter) {
    x = project(z - u);
    const Eigen::VectorXd x_hat = relax * x + (1.0 - relax) * z;
    const Eigen::VectorXd z_old = z;
    const double thresh = 1.0 / rho;
    for (int i = 0; i < n; ++i) z[i] = soft(x_hat[i] + u[i], thresh);
    u += x_hat - z;

    const double primal = (x - z).lpNorm<1>();
    const double dual = rho * (z - z_old).lpNorm<1>();
    const double z_l1 = z.lpNorm<1>();
    if (primal <= opt_tol * (1.0 + z_l1) && dual <= opt_tol * (1.0 + z_l1)) {
      const Eigen::VectorXd final_x = project(z);
      const double feas = (apply_a(final_x) - bs).lpNorm<1>();
      if (feas <= feas_tol * (1.0 + bs.lpNorm<1>())) {
        std::vector<double> out(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = final_x[i] * scale;
        return out;
      }
    }

    if (primal > 10.0 * dual && rho < 1e4) {
      rho *= 2.0;
      u *= 0.5;
    } else if (dual > 10.0 * primal && rho > 1e-4) {
      rho *= 0.5;
      u *= 2.0;
    }
  }

  const double resid = (x - z).lpNorm<1>();
  throw SolverFailure("direct_bp: no convergence within the iteration budget", resid);
}

IntensityVector direct_rate_estimate(std::span<const double> x_hat, std::int64_t nu, double rho) {
  const double exposure = static_cast<double>(nu) * rho;
  if (exposure <= 0.0) throw std::invalid_argument("direct_rate_estimate: nu*rho must be positive");
  std::vector<double> rates(x_hat.size());
  for (std::size_t i = 0; i < x_hat.size(); ++i)
    rates[i] = std::max(0.0, x_hat[i]) / exposure;
  return IntensityVector::from(std::move(rates));
}

WhaleIsolationResult whale_isolation(const Observation& y, const ExpanderGraph& graph, int k) {
  if (y.size() != graph.m) throw std::invalid_argument("whale_isolation: observation length mismatch");
  if (k < 0) throw std::invalid_argument("whale_isolation: k must be nonnegative");
  const auto start = std::chrono::steady_clock::now();

  const int m = graph.m;
  const int kd = static_cast<int>(
      std::min<std::int64_t>(static_cast<std::int64_t>(k) * graph.d, m));

  std::vector<std::int32_t> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::int32_t a, std::int32_t b) {
    const std::int64_t ca = y.counts[static_cast<std::size_t>(a)];
    const std::int64_t cb = y.counts[static_cast<std::size_t>(b)];
    if (ca != cb) return ca > cb;
    return a < b;  // ties to the lower index
  });

  std::vector<std::uint8_t> in_b1(static_cast<std::size_t>(m), 0);
  WhaleIsolationResult result;
  result.b1.assign(order.begin(), order.begin() + kd);
  std::sort(result.b1.begin(), result.b1.end());
  for (const std::int32_t j : result.b1) in_b1[static_cast<std::size_t>(j)] = 1;

  for (int i = 0; i < graph.n; ++i) {
    bool all_in_b1 = true;
    for (const std::int32_t j : graph.neighbors(i)) {
      if (!in_b1[static_cast<std::size_t>(j)]) {
        all_in_b1 = false;
        break;
      }
    }
    if (all_in_b1) result.v1.push_back(i);
  }

  result.passed_size_bound =
      static_cast<std::int64_t>(result.v1.size()) <= static_cast<std::int64_t>(k) * graph.d;
  result.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

std::size_t pmle_discrete(const Observation& y, std::span<const std::vector<double>> means,
                          std::span<const double> penalties) {
  if (means.empty()) throw std::invalid_argument("pmle_discrete: empty candidate set");
  if (means.size() != penalties.size())
    throw std::invalid_argument("pmle_discrete: candidate/penalty size mismatch");
  std::size_t best = 0;
  double best_obj = kInf;
  for (std::size_t c = 0; c < means.size(); ++c) {
    const double obj = neg_log_likelihood(y, means[c]) + 2.0 * penalties[c];
    if (obj < best_obj) {
      best_obj = obj;
      best = c;
    }
  }
  if (std::isinf(best_obj))
    throw InfeasibleLikelihood("pmle_discrete: every candidate has infinite likelihood");
  return best;
}

double bound_theorem1(const SensingOperator& op, const IntensityVector& theta_star,
                      std::span<const IntensityVector> candidates,
                      std::span<const double> penalties, int k) {
  if (candidates.empty()) throw std::invalid_argument("bound_theorem1: empty candidate set");
  if (candidates.size() != penalties.size())
    throw std::invalid_argument("bound_theorem1: candidate/penalty size mismatch");
  SensingOperator norm_op(*op.graph, true);
  const auto mean_star = apply(norm_op, theta_star.values);
  double best = kInf;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    const auto mean_c = apply(norm_op, candidates[c].values);
    const double kl = kl_poisson(mean_star, mean_c);
    if (std::isinf(kl)) continue;
    best = std::min(best, kl + 2.0 * penalties[c]);
  }
  const double sigma_k = k_term_error(theta_star.values, k);
  if (std::isinf(best)) return kInf;
  return 4.0 * sigma_k + 8.0 * std::sqrt(theta_star.l1_mass * best);
}

double bound_theorem3(const IntensityVector& lambda_star, int k, std::int64_t nu, double rho) {
  const double exposure = static_cast<double>(nu) * rho;
  if (exposure <= 0.0) throw std::invalid_argument("bound_theorem3: nu*rho must be positive");
  double sqrt_l1 = 0.0;
  for (const double v : lambda_star.values) sqrt_l1 += std::sqrt(v);
  return 4.0 * k_term_error(lambda_star.values, k) + sqrt_l1 / std::sqrt(exposure);
}

}  // namespace xpcs
