#include "sbm/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "sbm/error.hpp"
#include "sbm/rng.hpp"

namespace sbm {

namespace {

constexpr int kDensePairLimit = 50000;

// Pair (u, v), u < v, is kept with probability prob[label[u]][label[v]].
std::vector<std::pair<int, int>> dense_pairs(int n, const std::vector<int>& labels,
                                             const Eigen::MatrixXd& prob, Rng& rng) {
  std::vector<std::pair<int, int>> edges;
  std::vector<double> row(prob.cols());
  for (int u = 0; u < n; ++u) {
    const int a = labels[u];
    for (Eigen::Index b = 0; b < prob.cols(); ++b) row[b] = prob(a, b);
    for (int v = u + 1; v < n; ++v) {
      if (rng.uniform() < row[labels[v]]) edges.emplace_back(u, v);
    }
  }
  return edges;
}

// Geometric skipping inside each block pair; the survivors are the same law
// as dense_pairs but cost O(n + m) per block pair.
std::vector<std::pair<int, int>> skipped_pairs(int n, const std::vector<int>& labels,
                                               const Eigen::MatrixXd& prob, Rng& rng) {
  const int s = static_cast<int>(prob.rows());
  std::vector<std::vector<int>> members(s);
  for (int v = 0; v < n; ++v) members[labels[v]].push_back(v);
  std::vector<std::pair<int, int>> edges;
  for (int a = 0; a < s; ++a) {
    for (int b = a; b < s; ++b) {
      const double q = prob(a, b);
      if (q <= 0.0) continue;
      const auto& A = members[a];
      const auto& B = members[b];
      const std::int64_t total = a == b ? static_cast<std::int64_t>(A.size()) * (A.size() - 1) / 2
                                        : static_cast<std::int64_t>(A.size()) * B.size();
      const double log_miss = std::log1p(-q);
      std::int64_t k = -1;
      while (true) {
        if (q >= 1.0) {
          ++k;
        } else {
          k += 1 + static_cast<std::int64_t>(std::floor(std::log(rng.uniform_open0()) / log_miss));
        }
        if (k >= total) break;
        int u = 0;
        int v = 0;
        if (a == b) {
          // Row i of the strict upper triangle holds pairs (i, j > i).
          std::int64_t i = static_cast<std::int64_t>(
              (std::sqrt(8.0 * static_cast<double>(k) + 1.0) - 1.0) / 2.0);
          while (i * (i + 1) / 2 > k) --i;
          while ((i + 1) * (i + 2) / 2 <= k) ++i;
          const std::int64_t j = k - i * (i + 1) / 2;
          u = A[j];
          v = A[i + 1];
        } else {
          u = A[k / static_cast<std::int64_t>(B.size())];
          v = B[k % static_cast<std::int64_t>(B.size())];
        }
        edges.emplace_back(std::min(u, v), std::max(u, v));
      }
    }
  }
  std::sort(edges.begin(), edges.end());
  return edges;
}

LabeledGraph sample_with(const Eigen::MatrixXd& rates, int n, std::vector<int> labels, int s,
                         std::uint64_t seed) {
  if (n < 2) throw Error(ErrorCode::DomainError, "n must be at least 2");
  if (rates.maxCoeff() > n) {
    throw Error(ErrorCode::ProbabilityOverflow,
                "max M_ij = " + std::to_string(rates.maxCoeff()) + " exceeds n = " + std::to_string(n));
  }
  const Eigen::MatrixXd prob = rates / static_cast<double>(n);
  Rng rng(derive_stream(seed, "edges"));
  LabeledGraph g;
  g.n = n;
  g.s = s;
  g.edges = n <= kDensePairLimit ? dense_pairs(n, labels, prob, rng) : skipped_pairs(n, labels, prob, rng);
  if (s > 0) g.labels = std::move(labels);
  return g;
}

}  // namespace

LabeledGraph sample_sbm(const BlockModel& model, int n, std::uint64_t seed) {
  if (n < 2) throw Error(ErrorCode::DomainError, "n must be at least 2");
  std::vector<double> cumulative(model.s());
  std::partial_sum(model.pi().begin(), model.pi().end(), cumulative.begin());
  Rng rng(derive_stream(seed, "labels"));
  std::vector<int> labels(n);
  for (auto& l : labels) l = rng.categorical(cumulative);
  return sample_with(model.M(), n, std::move(labels), model.s(), seed);
}

LabeledGraph sample_sbm_with_labels(const BlockModel& model, std::vector<int> labels,
                                    std::uint64_t seed) {
  for (int l : labels) {
    if (l < 0 || l >= model.s()) throw Error(ErrorCode::DomainError, "label outside [0, s)");
  }
  const int n = static_cast<int>(labels.size());
  return sample_with(model.M(), n, std::move(labels), model.s(), seed);
}

LabeledGraph sample_er(int n, double d, std::uint64_t seed) {
  if (!(d >= 0.0) || d > n) {
    throw Error(ErrorCode::BadDegree, "need 0 <= d <= n, got d = " + std::to_string(d));
  }
  return sample_with(Eigen::MatrixXd::Constant(1, 1, d), n, std::vector<int>(n, 0), 0, seed);
}

std::vector<int> shuffled_labels(std::span<const int> counts, std::uint64_t seed) {
  std::vector<int> labels;
  for (std::size_t c = 0; c < counts.size(); ++c) labels.insert(labels.end(), counts[c], static_cast<int>(c));
  Rng rng(derive_stream(seed, "shuffled-labels"));
  shuffle(std::span<int>(labels), rng);
  return labels;
}

std::vector<std::vector<int>> adjacency_lists(const LabeledGraph& graph) {
  std::vector<std::vector<int>> adj(graph.n);
  for (const auto& [u, v] : graph.edges) {
    adj[u].push_back(v);
    adj[v].push_back(u);
  }
  for (auto& list : adj) std::sort(list.begin(), list.end());
  return adj;
}

GraphStats graph_stats(const LabeledGraph& graph) {
  const auto adj = adjacency_lists(graph);
  GraphStats stats;
  std::vector<char> seen(graph.n, 0);
  std::vector<int> queue;
  for (int root = 0; root < graph.n; ++root) {
    if (seen[root]) continue;
    seen[root] = 1;
    queue.assign(1, root);
    for (std::size_t head = 0; head < queue.size(); ++head) {
      for (int w : adj[queue[head]]) {
        if (!seen[w]) {
          seen[w] = 1;
          queue.push_back(w);
        }
      }
    }
    stats.component_sizes.push_back(static_cast<int>(queue.size()));
  }
  std::sort(stats.component_sizes.begin(), stats.component_sizes.end(), std::greater<>());
  stats.max_component = stats.component_sizes.empty() ? 0 : stats.component_sizes.front();
  for (const auto& list : adj) {
    const std::size_t deg = list.size();
    if (stats.degree_histogram.size() <= deg) stats.degree_histogram.resize(deg + 1, 0);
    ++stats.degree_histogram[deg];
  }
  return stats;
}

}  // namespace sbm
