#include <doctest.h>

#include <cmath>
#include <sstream>

#include "sbm/error.hpp"
#include "sbm/graph_io.hpp"
#include "sbm/rng.hpp"
#include "sbm/sampler.hpp"

using namespace sbm;

namespace {

double mean_edges(auto&& draw, int seeds) {
  double total = 0.0;
  for (int i = 0; i < seeds; ++i) total += static_cast<double>(draw(static_cast<std::uint64_t>(i)).edges.size());
  return total / seeds;
}

}  // namespace

TEST_CASE("rng streams are reproducible and distinct") {
  Rng a(derive_stream(7, "x"));
  Rng b(derive_stream(7, "x"));
  Rng c(derive_stream(7, "y"));
  for (int i = 0; i < 10; ++i) CHECK(a() == b());
  CHECK(Rng(derive_stream(7, "x"))() != c());
  CHECK(substream(5, 0) != substream(5, 1));
  Rng r(1);
  for (int i = 0; i < 1000; ++i) {
    const double u = r.uniform();
    CHECK((u >= 0.0 && u < 1.0));
    CHECK(r.below(7) < 7);
  }
}

TEST_CASE("sample_er examples") {
  CHECK(sample_er(50, 0.0, 1).edges.empty());
  const double mean = mean_edges([](std::uint64_t s) { return sample_er(1000, 2.0, s); }, 200);
  CHECK(std::abs(mean / 999.0 - 1.0) < 0.03);
  CHECK(sample_er(300, 3.0, 9).edges == sample_er(300, 3.0, 9).edges);
  CHECK(sample_er(300, 3.0, 9).edges != sample_er(300, 3.0, 10).edges);
  CHECK_THROWS_AS(sample_er(10, 11.0, 1), Error);
  CHECK_THROWS_AS(sample_er(10, -1.0, 1), Error);
}

TEST_CASE("sample_sbm examples") {
  const BlockModel model = two_cluster_model(0.3, 2.0, 3.0);
  const double mean = mean_edges([&](std::uint64_t s) { return sample_sbm(model, 2000, s); }, 200);
  CHECK(std::abs(mean / (2000 * 3.0 / 2) - 1.0) < 0.02);

  // Flat model: same edge-count law as Erdos-Renyi.
  const BlockModel flat = erdos_renyi_model(Eigen::Vector2d(0.4, 0.6), 3.0);
  const double flat_mean = mean_edges([&](std::uint64_t s) { return sample_sbm(flat, 1000, s); }, 200);
  const double er_mean = mean_edges([](std::uint64_t s) { return sample_er(1000, 3.0, s + 1000); }, 200);
  // Both are Binomial(499500, 0.003); std of a 200-seed mean is about 2.7.
  CHECK(std::abs(flat_mean - er_mean) < 15.0);

  Eigen::MatrixXd big(2, 2);
  big << 4, 2, 2, 4;
  try {
    sample_sbm(build_model(Eigen::Vector2d(0.5, 0.5), big), 3, 1);
    FAIL("expected ProbabilityOverflow");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ProbabilityOverflow);
  }
}

TEST_CASE("block-pair edge rates match M / n") {
  const BlockModel model = two_cluster_model(0.3, 2.5, 4.0);
  const int n = 1500;
  Eigen::MatrixXd edges = Eigen::MatrixXd::Zero(2, 2);
  Eigen::MatrixXd pairs = Eigen::MatrixXd::Zero(2, 2);
  for (int seed = 0; seed < 40; ++seed) {
    const LabeledGraph g = sample_sbm(model, n, seed);
    REQUIRE(g.has_labels());
    std::array<double, 2> c{0, 0};
    for (int l : g.labels) c[l] += 1;
    pairs(0, 0) += c[0] * (c[0] - 1) / 2;
    pairs(1, 1) += c[1] * (c[1] - 1) / 2;
    pairs(0, 1) += c[0] * c[1];
    for (const auto& [u, v] : g.edges) {
      const int a = std::min(g.labels[u], g.labels[v]);
      const int b = std::max(g.labels[u], g.labels[v]);
      edges(a, b) += 1;
    }
  }
  for (auto [a, b] : {std::pair{0, 0}, std::pair{0, 1}, std::pair{1, 1}}) {
    const double expected = pairs(a, b) * model.M()(a, b) / n;
    CHECK(std::abs(edges(a, b) - expected) < 5.0 * std::sqrt(expected));
  }
}

TEST_CASE("sparse sampler path agrees in law with the dense path") {
  // n above the dense limit: check the total edge count.
  const BlockModel model = two_cluster_model(0.5, 1.5, 2.0);
  const int n = 60000;
  const double mean = mean_edges([&](std::uint64_t s) { return sample_sbm(model, n, s); }, 5);
  CHECK(std::abs(mean / (n * 1.0) - 1.0) < 0.01);
  const LabeledGraph g = sample_sbm(model, n, 3);
  for (std::size_t i = 1; i < g.edges.size(); ++i) CHECK(g.edges[i - 1] < g.edges[i]);
}

TEST_CASE("graph_stats examples") {
  LabeledGraph empty;
  empty.n = 5;
  CHECK(graph_stats(empty).component_sizes == std::vector<int>{1, 1, 1, 1, 1});
  LabeledGraph tri;
  tri.n = 4;
  tri.edges = {{0, 1}, {0, 2}, {1, 2}};
  const GraphStats st = graph_stats(tri);
  CHECK(st.component_sizes == std::vector<int>{3, 1});
  CHECK(st.degree_histogram == std::vector<int>{1, 0, 3});
  int small = 0;
  for (int seed = 0; seed < 50; ++seed) small += graph_stats(sample_er(5000, 0.5, seed)).max_component <= 30;
  CHECK(small >= 48);
}

TEST_CASE("edge list round trip and malformed input") {
  const LabeledGraph g = sample_sbm(two_cluster_model(0.3, 2.0, 3.0), 200, 4);
  std::istringstream in(edge_list_string(g));
  const LabeledGraph back = read_edge_list(in);
  CHECK(back.n == g.n);
  CHECK(back.edges == g.edges);
  CHECK(back.labels == g.labels);
  std::istringstream dup("3 2 0\n0 1\n1 0\n");
  CHECK_THROWS_AS(read_edge_list(dup), Error);
  std::istringstream loop("3 1 0\n1 1\n");
  try {
    read_edge_list(loop);
    FAIL("expected IoError");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("shuffled_labels keeps the counts") {
  const std::vector<int> counts = {3, 5, 2};
  const auto labels = shuffled_labels(counts, 11);
  CHECK(labels.size() == 10);
  for (int c = 0; c < 3; ++c) CHECK(std::count(labels.begin(), labels.end(), c) == counts[c]);
  CHECK(labels == shuffled_labels(counts, 11));
}
