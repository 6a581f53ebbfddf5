#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sbm/cycles.hpp"
#include "sbm/error.hpp"
#include "sbm/rng.hpp"
#include "sbm/sampler.hpp"

using namespace sbm;

namespace {

LabeledGraph cycle_graph(int n) {
  LabeledGraph g;
  g.n = n;
  for (int i = 0; i < n; ++i) g.edges.emplace_back(std::min(i, (i + 1) % n), std::max(i, (i + 1) % n));
  std::sort(g.edges.begin(), g.edges.end());
  return g;
}

LabeledGraph random_graph(Rng& rng, int n, double density) {
  LabeledGraph g;
  g.n = n;
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v)
      if (rng.uniform() < density) g.edges.emplace_back(u, v);
  return g;
}

// Every k-subset, every cyclic order with the smallest vertex first, halved
// for direction.
std::int64_t brute_force_cycles(const LabeledGraph& g, int k) {
  std::vector<std::vector<char>> adj(g.n, std::vector<char>(g.n, 0));
  for (const auto& [u, v] : g.edges) adj[u][v] = adj[v][u] = 1;
  std::int64_t total = 0;
  std::vector<char> pick(g.n, 0);
  std::fill(pick.end() - k, pick.end(), 1);
  do {
    std::vector<int> subset;
    for (int i = 0; i < g.n; ++i)
      if (pick[i]) subset.push_back(i);
    std::int64_t directed = 0;
    do {
      bool ok = true;
      for (int i = 0; i < k && ok; ++i) ok = adj[subset[i]][subset[(i + 1) % k]];
      directed += ok;
    } while (std::next_permutation(subset.begin() + 1, subset.end()));
    total += directed / 2;
  } while (std::next_permutation(pick.begin(), pick.end()));
  return total;
}

}  // namespace

TEST_CASE("small fixed graphs") {
  CHECK(count_k_cycles(cycle_graph(3), 3) == 1);
  const LabeledGraph c5 = cycle_graph(5);
  CHECK(count_k_cycles(c5, 3) == 0);
  CHECK(count_k_cycles(c5, 4) == 0);
  CHECK(count_k_cycles(c5, 5) == 1);
  LabeledGraph k4;
  k4.n = 4;
  k4.edges = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
  CHECK(count_k_cycles(k4, 3) == 4);
  CHECK(count_k_cycles(k4, 4) == 3);
}

TEST_CASE("k outside [3, 12] is rejected") {
  CHECK_THROWS_AS(count_k_cycles(cycle_graph(5), 2), Error);
  CHECK_THROWS_AS(count_k_cycles(cycle_graph(5), 13), Error);
}

TEST_CASE("counter matches brute force on random graphs") {
  Rng rng(derive_stream(21, "cycles-test"));
  for (int trial = 0; trial < 25; ++trial) {
    const int n = 6 + static_cast<int>(rng.below(4));
    const LabeledGraph g = random_graph(rng, n, 0.3 + 0.4 * rng.uniform());
    for (int k = 3; k <= n; ++k) CHECK(count_k_cycles(g, k) == brute_force_cycles(g, k));
  }
  const LabeledGraph g12 = random_graph(rng, 12, 0.35);
  for (int k = 3; k <= 6; ++k) CHECK(count_k_cycles(g12, k) == brute_force_cycles(g12, k));
}

TEST_CASE("relabeling and threading leave counts unchanged") {
  const LabeledGraph g = sample_er(400, 4.0, 5);
  std::vector<int> perm(g.n);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(9);
  shuffle(std::span<int>(perm), rng);
  LabeledGraph h;
  h.n = g.n;
  for (const auto& [u, v] : g.edges) h.edges.emplace_back(std::min(perm[u], perm[v]), std::max(perm[u], perm[v]));
  std::sort(h.edges.begin(), h.edges.end());
  for (int k = 3; k <= 7; ++k) {
    const auto base = count_k_cycles(g, k);
    CHECK(count_k_cycles(h, k) == base);
    CHECK(count_k_cycles(g, k, 4) == base);
  }
}

TEST_CASE("trace_power for the balanced family") {
  const BlockModel m = two_cluster_model(0.5, 1.6, 3.0);
  const auto spec = spectral_summary(m);
  const double l2 = spec.lambda2().real();
  for (int k = 3; k <= 9; ++k) CHECK(trace_power(spec, k) == doctest::Approx(1.0 + std::pow(l2, k)).epsilon(1e-12));
}

TEST_CASE("flat model is inconclusive") {
  const BlockModel flat = erdos_renyi_model(Eigen::Vector2d(0.5, 0.5), 3.0);
  CHECK(select_test_k(flat, 9) == 0);
  const auto r = cycle_test(sample_er(500, 3.0, 1), flat, 9);
  CHECK(r.decision == CycleDecision::Inconclusive);
  CHECK(to_string(r.decision) == "INCONCLUSIVE");
}

TEST_CASE("null cycle counts are roughly Poisson") {
  for (int k = 3; k <= 4; ++k) {
    double sum = 0.0;
    double sq = 0.0;
    const int seeds = 500;
    for (int i = 0; i < seeds; ++i) {
      const double x = static_cast<double>(count_k_cycles(sample_er(2000, 3.0, 40000 + i), k));
      sum += x;
      sq += x * x;
    }
    const double mean = sum / seeds;
    const double var = (sq - seeds * mean * mean) / (seeds - 1);
    const double ratio = var / mean;
    CHECK(ratio >= 0.7);
    CHECK(ratio <= 1.4);
  }
}
