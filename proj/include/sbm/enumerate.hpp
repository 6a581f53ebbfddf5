#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "sbm/model.hpp"

namespace sbm {

inline constexpr int kTinyMaxVertices = 6;
inline constexpr int kTinyMaxClasses = 3;
inline constexpr double kTinyMaxTerms = 1e8;

// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x);
  double value() const { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

// Vertex pairs (u, v), u < v, in lexicographic order; bit e of a graph mask
// is the e-th pair.
std::vector<std::pair<int, int>> vertex_pairs(int n);

// Throws TooLarge unless n <= 6, s <= 3 and s^n 2^C(n,2) <= 1e8, and
// ProbabilityOverflow unless every M_ij <= n and d < n.
void check_tiny(const BlockModel& model, int n);

// Visits every labeling of n vertices over [s] in mixed-radix order
// (vertex 0 is the least significant digit).
void for_each_labeling(int n, int s, const std::function<void(std::span<const int>)>& visit);

// P(sigma) = prod_v pi_{sigma_v}.
double labeling_probability(const BlockModel& model, std::span<const int> sigma);

// P(G | sigma) for every graph mask.
std::vector<double> conditional_graph_law(const BlockModel& model, std::span<const int> sigma);

// sum_sigma weight(sigma) P(G | sigma) for every graph mask; labelings with
// zero weight are skipped.
std::vector<double> mixed_graph_law(const BlockModel& model, int n,
                                    const std::function<double(std::span<const int>)>& weight);

// Q(G) under G(n, d/n) for every graph mask.
std::vector<double> erdos_renyi_law(int n, double d);

}  // namespace sbm
