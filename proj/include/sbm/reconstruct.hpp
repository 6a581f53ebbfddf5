#pragma once

#include <optional>
#include <span>
#include <vector>

#include "sbm/sampler.hpp"

namespace sbm {

inline constexpr int kMaxOverlapClasses = 8;
inline constexpr double kMaxPartitions = 1e6;

struct OverlapScore {
  double value = 0.0;
  // rho with class i of sigma matched to class rho[i] of tau.
  std::vector<int> best_permutation;
};

// (1/n) max_rho sum_i (N_{i rho(i)} - N_i N'_{rho(i)} / n) over all
// permutations; the lexicographically first maximizer wins ties.
// s defaults to one more than the largest label seen.
OverlapScore overlap(std::span<const int> sigma, std::span<const int> tau, int s = 0);

struct OverlapCorrelation {
  double p1 = 0.0;       // |{sigma = tau = 0}| / (q n)
  double overlap = 0.0;
  bool premise = false;     // overlap < 2 q eps
  bool conclusion = false;  // |p1 - p| < eps
  bool holds = true;        // premise implies conclusion
};

// Class 0 is the small block in both labelings: sigma has p n zeros and tau
// has q n zeros. Throws NotAPartition otherwise.
OverlapCorrelation overlap_correlation_check(std::span<const int> sigma, std::span<const int> tau,
                                             double p, double q, double eps);

// Natural-log binary entropy with H(0) = H(1) = 0.
double entropy(double p);

struct BernsteinCondition {
  double lhs = 0.0;  // d lambda_2^2
  double rhs = 0.0;  // 4 (a + 3) H(p) / (3 (1 - p)^2)
  bool satisfied = false;
};

// For two_cluster_model(p, a, d); throws BadParametrization when that model
// does not exist.
BernsteinCondition bernstein_condition(double p, double a, double d);

struct AcceptedPartition {
  std::vector<int> members;  // the small block, ascending
  int inblock_edges = 0;
  std::optional<double> overlap;  // against the graph's labels, when present
};

struct ReconstructResult {
  int block_size = 0;
  double delta = 0.0;
  double window_lo = 0.0;
  double window_hi = 0.0;
  long long partitions_checked = 0;
  std::vector<AcceptedPartition> accepted;  // lexicographic order
};

// Standard-deviation based default: 3 sd(Binomial(C(pn,2), da/n)) / n.
double default_delta(int n, double p, double d, double a);

// Every pn-subset whose internal edge count lies in
// [(d a p^2/2 - delta) n, (d a p^2/2 + delta) n]. With `first_only` the
// lexicographically first accepted subset alone is returned.
// Throws BadParametrization unless pn is an integer and
// CombinatorialBlowup when C(n, pn) > 1e6.
ReconstructResult exhaustive_reconstruct(const LabeledGraph& graph, double p, double d, double a,
                                         std::optional<double> delta = std::nullopt,
                                         bool first_only = false, int threads = 1);

}  // namespace sbm
