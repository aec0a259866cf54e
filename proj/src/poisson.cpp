#include "xpcs/poisson.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace xpcs {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

void check_same_length(std::size_t a, std::size_t b, const char* who) {
  if (a != b) throw std::invalid_argument(std::string(who) + ": length mismatch");
}
}  // namespace

IntensityVector IntensityVector::from(std::vector<double> v) {
  double mass = 0.0;
  for (const double x : v) {
    if (x < 0.0 || !std::isfinite(x))
      throw std::domain_error("IntensityVector: entries must be finite and nonnegative");
    mass += x;
  }
  IntensityVector out;
  out.values = std::move(v);
  out.l1_mass = mass;
  return out;
}

Observation Observation::from(std::vector<std::int64_t> c, ExposureMeta meta) {
  for (const std::int64_t v : c)
    if (v < 0) throw std::domain_error("Observation: counts must be nonnegative");
  Observation out;
  out.counts = std::move(c);
  out.meta = meta;
  return out;
}

std::int64_t Observation::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
}

std::vector<std::int64_t> EdgeCountMatrix::row_sums() const {
  std::vector<std::int64_t> y(static_cast<std::size_t>(graph->m), 0);
  for (int i = 0; i < graph->n; ++i) {
    const auto nb = graph->neighbors(i);
    for (int e = 0; e < graph->d; ++e)
      y[static_cast<std::size_t>(nb[static_cast<std::size_t>(e)])] +=
          counts[static_cast<std::size_t>(i)][static_cast<std::size_t>(e)];
  }
  return y;
}

std::vector<std::int64_t> EdgeCountMatrix::col_sums() const {
  std::vector<std::int64_t> w(static_cast<std::size_t>(graph->n), 0);
  for (int i = 0; i < graph->n; ++i)
    for (const std::int64_t c : counts[static_cast<std::size_t>(i)])
      w[static_cast<std::size_t>(i)] += c;
  return w;
}

double poisson_pmf(double lambda, std::int64_t z) {
  if (lambda < 0.0 || !std::isfinite(lambda))
    throw std::domain_error("poisson_pmf: lambda must be finite and nonnegative");
  if (z < 0) throw std::domain_error("poisson_pmf: z must be nonnegative");
  if (lambda == 0.0) return z == 0 ? 1.0 : 0.0;
  const double zd = static_cast<double>(z);
  return std::exp(zd * std::log(lambda) - lambda - std::lgamma(zd + 1.0));
}

std::vector<std::int64_t> sample_poisson(std::span<const double> mean, Rng& rng) {
  std::vector<std::int64_t> out(mean.size());
  for (std::size_t j = 0; j < mean.size(); ++j) out[j] = rng.poisson(mean[j]);
  return out;
}

double neg_log_likelihood(std::span<const std::int64_t> counts, std::span<const double> mean) {
  check_same_length(counts.size(), mean.size(), "neg_log_likelihood");
  double nll = 0.0;
  for (std::size_t j = 0; j < counts.size(); ++j) {
    const double mu = mean[j];
    const std::int64_t y = counts[j];
    if (mu < 0.0) throw std::domain_error("neg_log_likelihood: negative mean");
    if (mu == 0.0) {
      if (y > 0) return kInf;
      continue;  // 0*log 0 := 0
    }
    nll += mu - static_cast<double>(y) * std::log(mu);
  }
  return nll;
}

double neg_log_likelihood(const Observation& y, std::span<const double> mean) {
  return neg_log_likelihood(std::span<const std::int64_t>(y.counts), mean);
}

double kl_poisson(std::span<const double> g, std::span<const double> h) {
  check_same_length(g.size(), h.size(), "kl_poisson");
  double kl = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) {
    if (g[j] < 0.0 || h[j] < 0.0) throw std::domain_error("kl_poisson: negative mean");
    if (g[j] == 0.0) {
      kl += h[j];
      continue;
    }
    if (h[j] == 0.0) return kInf;
    kl += g[j] * std::log(g[j] / h[j]) - g[j] + h[j];
  }
  return kl;
}

double hellinger_sq(std::span<const double> g, std::span<const double> h) {
  check_same_length(g.size(), h.size(), "hellinger_sq");
  double acc = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) {
    if (g[j] < 0.0 || h[j] < 0.0) throw std::domain_error("hellinger_sq: negative mean");
    const double diff = std::sqrt(g[j]) - std::sqrt(h[j]);
    acc += diff * diff;
  }
  return acc;
}

std::pair<double, double> hellinger_l1_bound_check(const SensingOperator& op,
                                                   std::span<const double> theta_star,
                                                   std::span<const double> theta, double l_mass) {
  check_same_length(theta_star.size(), theta.size(), "hellinger_l1_bound_check");
  SensingOperator norm_op(*op.graph, true);
  const auto a = apply(norm_op, theta_star);
  const auto b = apply(norm_op, theta);
  double lhs = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) lhs += std::fabs(a[j] - b[j]);
  lhs *= lhs;
  const double rhs = 4.0 * l_mass * hellinger_sq(a, b);
  return {lhs, rhs};
}

EdgeCountMatrix sample_model_a(const IntensityVector& theta, const SensingOperator& op, Rng& rng) {
  const ExpanderGraph& g = *op.graph;
  check_same_length(theta.values.size(), static_cast<std::size_t>(g.n), "sample_model_a");
  if (!op.normalized)
    throw std::invalid_argument("sample_model_a: operator must be column-stochastic (normalized)");
  EdgeCountMatrix z;
  z.graph = &g;
  z.counts.assign(static_cast<std::size_t>(g.n),
                  std::vector<std::int64_t>(static_cast<std::size_t>(g.d), 0));
  const double inv_d = 1.0 / g.d;
  for (int i = 0; i < g.n; ++i) {
    const double cell_mean = theta.values[static_cast<std::size_t>(i)] * inv_d;
    for (int e = 0; e < g.d; ++e)
      z.counts[static_cast<std::size_t>(i)][static_cast<std::size_t>(e)] = rng.poisson(cell_mean);
  }
  return z;
}

EdgeCountMatrix sample_model_b(const IntensityVector& theta, const SensingOperator& op, Rng& rng) {
  const ExpanderGraph& g = *op.graph;
  check_same_length(theta.values.size(), static_cast<std::size_t>(g.n), "sample_model_b");
  // column sums of Phi must be 1; for Phi~ = A/d that is d * (1/d)
  const double col_sum = op.normalized ? 1.0 : static_cast<double>(g.d);
  if (std::fabs(col_sum - 1.0) > 1e-9)
    throw std::invalid_argument("sample_model_b: column probabilities must sum to 1");
  EdgeCountMatrix z;
  z.graph = &g;
  z.counts.assign(static_cast<std::size_t>(g.n),
                  std::vector<std::int64_t>(static_cast<std::size_t>(g.d), 0));
  for (int i = 0; i < g.n; ++i) {
    const std::int64_t w = rng.poisson(theta.values[static_cast<std::size_t>(i)]);
    // route w events uniformly among the d edges of column i
    for (std::int64_t ev = 0; ev < w; ++ev) {
      const auto e = static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(g.d)));
      ++z.counts[static_cast<std::size_t>(i)][e];
    }
  }
  return z;
}

L1Estimate estimate_l1_mass(const Observation& y, double t, double eps) {
  if (t <= 0.0) throw std::invalid_argument("estimate_l1_mass: t must be positive");
  if (eps <= 0.0 || eps >= 0.5)
    throw std::invalid_argument("estimate_l1_mass: eps must lie in (0, 1/2)");
  const double root = std::sqrt(static_cast<double>(y.total()));
  L1Estimate est;
  est.t = t;
  est.eps = eps;
  const double lo = std::max(0.0, root - t);
  est.lower = lo * lo;
  est.upper = (root + t) * (root + t) / (1.0 - 2.0 * eps);
  est.confidence = 1.0 - std::exp(-2.0 * t * t) / (std::sqrt(2.0 * 3.141592653589793) * t);
  return est;
}

}  // namespace xpcs
