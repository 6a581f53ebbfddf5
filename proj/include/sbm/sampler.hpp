#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "sbm/model.hpp"

namespace sbm {

struct LabeledGraph {
  int n = 0;
  // Number of classes behind `labels`; 0 for an unlabeled graph.
  int s = 0;
  // Sorted, each pair stored once with u < v.
  std::vector<std::pair<int, int>> edges;
  std::vector<int> labels;

  bool has_labels() const { return !labels.empty(); }
};

// Labels iid from pi (stream "labels"), then each pair independently with
// probability M(sigma_u, sigma_v) / n (stream "edges").
// Throws ProbabilityOverflow when some M_ij > n.
LabeledGraph sample_sbm(const BlockModel& model, int n, std::uint64_t seed);

// Same edge law with the labels fixed by the caller.
LabeledGraph sample_sbm_with_labels(const BlockModel& model, std::vector<int> labels,
                                    std::uint64_t seed);

// G(n, d/n). Throws BadDegree unless 0 <= d <= n.
LabeledGraph sample_er(int n, double d, std::uint64_t seed);

// A uniformly shuffled labeling with exactly counts[i] vertices of class i.
std::vector<int> shuffled_labels(std::span<const int> counts, std::uint64_t seed);

std::vector<std::vector<int>> adjacency_lists(const LabeledGraph& graph);

struct GraphStats {
  std::vector<int> component_sizes;  // descending
  int max_component = 0;
  // degree_histogram[k] = number of vertices of degree k.
  std::vector<int> degree_histogram;
};

GraphStats graph_stats(const LabeledGraph& graph);

}  // namespace sbm
