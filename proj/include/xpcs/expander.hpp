#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "xpcs/rng.hpp"

namespace xpcs {

// Left-regular bipartite graph in adjacency-list form: n left (variable)
// nodes, m right (measurement) nodes, every left node has exactly d
// distinct right neighbors. This is the sensing structure A.
struct ExpanderGraph {
  int n = 0;
  int m = 0;
  int d = 0;
  std::uint64_t seed = 0;
  // n*d entries; neighbors of left node i at [i*d, (i+1)*d), sorted ascending
  std::vector<std::int32_t> adjacency;

  std::span<const std::int32_t> neighbors(int i) const {
    return {adjacency.data() + static_cast<std::size_t>(i) * d,
            static_cast<std::size_t>(d)};
  }
  std::size_t edge_count() const { return adjacency.size(); }
};

struct ExpansionParams {
  int k = 1;            // sparsity level: subsets up to size k are sampled
  double eps = 1.0 / 16.0;
};

// Applies A (or A/d when normalized) as a sparse operator. Immutable,
// shares the graph by pointer; safe to use from many threads.
struct SensingOperator {
  const ExpanderGraph* graph = nullptr;
  bool normalized = false;

  SensingOperator() = default;
  SensingOperator(const ExpanderGraph& g, bool norm) : graph(&g), normalized(norm) {}

  int rows() const { return graph->m; }
  int cols() const { return graph->n; }
};

struct ExpansionReport {
  int trials = 0;
  double min_expansion_ratio = 1.0;  // min |N(S)| / (d|S|) over sampled S
  double min_rip1_ratio = 1.0;       // min ||Ax||_1 / (d||x||_1), signed sparse x
  int max_right_degree = 0;          // observed D
};

ExpanderGraph generate_expander(int n, int m, int d, std::uint64_t seed);

std::vector<double> apply(const SensingOperator& op, std::span<const double> x);
std::vector<double> apply_transpose(const SensingOperator& op, std::span<const double> v);

std::vector<int> right_degrees(const ExpanderGraph& g);

ExpansionReport sample_expansion(const ExpanderGraph& g, const ExpansionParams& params,
                                 int trials, std::uint64_t seed);

inline bool expansion_check_passed(const ExpansionReport& r, const ExpansionParams& p) {
  return r.min_expansion_ratio > 1.0 - p.eps;
}

// sigma_k(u): l1 mass outside the k largest-magnitude coordinates,
// ties broken by keeping the lower index.
double k_term_error(std::span<const double> u, int k);

// Text graph format: line 1 "n m d seed", then one line of d sorted
// neighbor indices per left node.
void write_graph(const std::string& path, const ExpanderGraph& g);
ExpanderGraph read_graph(const std::string& path);

}  // namespace xpcs
