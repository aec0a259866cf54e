#include "xpcs/expander.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace xpcs {

ExpanderGraph generate_expander(int n, int m, int d, std::uint64_t seed) {
  if (n < 1 || m < 1) throw std::invalid_argument("generate_expander: n and m must be positive");
  if (d < 1 || d > m) throw std::invalid_argument("generate_expander: need 1 <= d <= m");

  ExpanderGraph g;
  g.n = n;
  g.m = m;
  g.d = d;
  g.seed = seed;
  g.adjacency.resize(static_cast<std::size_t>(n) * d);

  const Rng root(seed);
  std::vector<std::int32_t> picked(d);
  for (int i = 0; i < n; ++i) {
    Rng rng = root.split(static_cast<std::uint64_t>(i));
    // d distinct right nodes by rejection; expected O(d) draws for d << m
    int got = 0;
    while (got < d) {
      const auto cand = static_cast<std::int32_t>(rng.below(static_cast<std::uint64_t>(m)));
      bool dup = false;
      for (int j = 0; j < got; ++j)
        if (picked[j] == cand) { dup = true; break; }
      if (!dup) picked[got++] = cand;
    }
    std::sort(picked.begin(), picked.end());
    std::copy(picked.begin(), picked.end(),
              g.adjacency.begin() + static_cast<std::size_t>(i) * d);
  }
  return g;
}

std::vector<double> apply(const SensingOperator& op, std::span<const double> x) {
  const ExpanderGraph& g = *op.graph;
  if (static_cast<int>(x.size()) != g.n)
    throw std::invalid_argument("apply: vector length does not match graph n");
  std::vector<double> out(static_cast<std::size_t>(g.m), 0.0);
  const std::int32_t* adj = g.adjacency.data();
  for (int i = 0; i < g.n; ++i) {
    const double xi = x[static_cast<std::size_t>(i)];
    if (xi == 0.0) { adj += g.d; continue; }
    for (int e = 0; e < g.d; ++e) out[static_cast<std::size_t>(adj[e])] += xi;
    adj += g.d;
  }
  if (op.normalized) {
    const double inv_d = 1.0 / g.d;
    for (double& v : out) v *= inv_d;
  }
  return out;
}

std::vector<double> apply_transpose(const SensingOperator& op, std::span<const double> v) {
  const ExpanderGraph& g = *op.graph;
  if (static_cast<int>(v.size()) != g.m)
    throw std::invalid_argument("apply_transpose: vector length does not match graph m");
  std::vector<double> out(static_cast<std::size_t>(g.n), 0.0);
  const std::int32_t* adj = g.adjacency.data();
  for (int i = 0; i < g.n; ++i) {
    double acc = 0.0;
    for (int e = 0; e < g.d; ++e) acc += v[static_cast<std::size_t>(adj[e])];
    adj += g.d;
    out[static_cast<std::size_t>(i)] = acc;
  }
  if (op.normalized) {
    const double inv_d = 1.0 / g.d;
    for (double& w : out) w *= inv_d;
  }
  return out;
}

std::vector<int> right_degrees(const ExpanderGraph& g) {
  std::vector<int> deg(static_cast<std::size_t>(g.m), 0);
  for (const std::int32_t j : g.adjacency) ++deg[static_cast<std::size_t>(j)];
  return deg;
}

ExpansionReport sample_expansion(const ExpanderGraph& g, const ExpansionParams& params,
                                 int trials, std::uint64_t seed) {
  if (params.k < 1 || params.k > g.n / 2)
    throw std::invalid_argument("sample_expansion: need 1 <= k <= n/2");
  if (params.eps <= 0.0 || params.eps >= 1.0)
    throw std::invalid_argument("sample_expansion: eps must lie in (0,1)");
  if (trials < 1) throw std::invalid_argument("sample_expansion: trials must be >= 1");

  ExpansionReport report;
  report.trials = trials;
  {
    const auto deg = right_degrees(g);
    report.max_right_degree = *std::max_element(deg.begin(), deg.end());
  }

  const Rng root = Rng(seed);
  std::vector<std::int32_t> support(static_cast<std::size_t>(params.k));
  std::vector<std::uint8_t> seen(static_cast<std::size_t>(g.m), 0);
  std::vector<double> accum(static_cast<std::size_t>(g.m), 0.0);
  std::vector<std::int32_t> touched;
  touched.reserve(static_cast<std::size_t>(params.k) * g.d);

  for (int t = 0; t < trials; ++t) {
    Rng rng = root.split(static_cast<std::uint64_t>(t));

    // subset expansion ratio
    const int s = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(params.k)));
    int got = 0;
    while (got < s) {
      const auto cand = static_cast<std::int32_t>(rng.below(static_cast<std::uint64_t>(g.n)));
      bool dup = false;
      for (int j = 0; j < got; ++j)
        if (support[static_cast<std::size_t>(j)] == cand) { dup = true; break; }
      if (!dup) support[static_cast<std::size_t>(got++)] = cand;
    }
    int nbhd = 0;
    touched.clear();
    for (int j = 0; j < s; ++j) {
      for (const std::int32_t r : g.neighbors(support[static_cast<std::size_t>(j)])) {
        if (!seen[static_cast<std::size_t>(r)]) {
          seen[static_cast<std::size_t>(r)] = 1;
          touched.push_back(r);
          ++nbhd;
        }
      }
    }
    for (const std::int32_t r : touched) seen[static_cast<std::size_t>(r)] = 0;
    const double expansion = static_cast<double>(nbhd) / (static_cast<double>(g.d) * s);
    report.min_expansion_ratio = std::min(report.min_expansion_ratio, expansion);

    // signed k-sparse RIP-1 ratio on a fresh support
    got = 0;
    while (got < params.k) {
      const auto cand = static_cast<std::int32_t>(rng.below(static_cast<std::uint64_t>(g.n)));
      bool dup = false;
      for (int j = 0; j < got; ++j)
        if (support[static_cast<std::size_t>(j)] == cand) { dup = true; break; }
      if (!dup) support[static_cast<std::size_t>(got++)] = cand;
    }
    touched.clear();
    double x_l1 = 0.0;
    for (int j = 0; j < params.k; ++j) {
      const std::int32_t i = support[static_cast<std::size_t>(j)];
      const double xi = rng.normal();
      x_l1 += std::fabs(xi);
      for (const std::int32_t r : g.neighbors(i)) {
        if (!seen[static_cast<std::size_t>(r)]) {
          seen[static_cast<std::size_t>(r)] = 1;
          touched.push_back(r);
        }
        accum[static_cast<std::size_t>(r)] += xi;
      }
    }
    double ax_l1 = 0.0;
    for (const std::int32_t r : touched) {
      ax_l1 += std::fabs(accum[static_cast<std::size_t>(r)]);
      accum[static_cast<std::size_t>(r)] = 0.0;
      seen[static_cast<std::size_t>(r)] = 0;
    }
    if (x_l1 > 0.0) {
      const double ratio = ax_l1 / (static_cast<double>(g.d) * x_l1);
      if (ratio > 1.0 + 1e-12)
        throw std::logic_error("sample_expansion: RIP-1 upper bound violated");
      report.min_rip1_ratio = std::min(report.min_rip1_ratio, ratio);
    }
  }
  return report;
}

double k_term_error(std::span<const double> u, int k) {
  const int n = static_cast<int>(u.size());
  if (k < 0 || k > n) throw std::invalid_argument("k_term_error: need 0 <= k <= len(u)");
  if (k == n) return 0.0;
  if (k == 0) {
    double total = 0.0;
    for (const double v : u) total += std::fabs(v);
    return total;
  }
  std::vector<int> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  std::nth_element(idx.begin(), idx.begin() + k, idx.end(), [&](int a, int b) {
    const double fa = std::fabs(u[static_cast<std::size_t>(a)]);
    const double fb = std::fabs(u[static_cast<std::size_t>(b)]);
    if (fa != fb) return fa > fb;
    return a < b;  // keep lower index on ties
  });
  double tail = 0.0;
  for (int j = k; j < n; ++j) tail += std::fabs(u[static_cast<std::size_t>(idx[static_cast<std::size_t>(j)])]);
  return tail;
}

void write_graph(const std::string& path, const ExpanderGraph& g) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_graph: cannot open " + path);
  out << g.n << ' ' << g.m << ' ' << g.d << ' ' << g.seed << '\n';
  for (int i = 0; i < g.n; ++i) {
    const auto nb = g.neighbors(i);
    for (int e = 0; e < g.d; ++e) {
      if (e) out << ' ';
      out << nb[static_cast<std::size_t>(e)];
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("write_graph: write failed for " + path);
}

ExpanderGraph read_graph(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_graph: cannot open " + path);
  ExpanderGraph g;
  if (!(in >> g.n >> g.m >> g.d >> g.seed))
    throw std::runtime_error("read_graph: malformed header in " + path);
  if (g.n < 1 || g.m < 1 || g.d < 1 || g.d > g.m)
    throw std::runtime_error("read_graph: invalid dimensions in " + path);
  g.adjacency.resize(static_cast<std::size_t>(g.n) * g.d);
  for (std::size_t e = 0; e < g.adjacency.size(); ++e) {
    std::int64_t v = 0;
    if (!(in >> v) || v < 0 || v >= g.m)
      throw std::runtime_error("read_graph: bad adjacency entry in " + path);
    g.adjacency[e] = static_cast<std::int32_t>(v);
  }
  return g;
}

}  // namespace xpcs
