#include "sbm/enumerate.hpp"

#include <cmath>
#include <string>

#include "sbm/error.hpp"

namespace sbm {

void CompensatedSum::add(double x) {
  const double t = sum_ + x;
  if (std::abs(sum_) >= std::abs(x)) {
    carry_ += (sum_ - t) + x;
  } else {
    carry_ += (x - t) + sum_;
  }
  sum_ = t;
}

std::vector<std::pair<int, int>> vertex_pairs(int n) {
  std::vector<std::pair<int, int>> pairs;
  for (int u = 0; u < n; ++u) {
    for (int v = u + 1; v < n; ++v) pairs.emplace_back(u, v);
  }
  return pairs;
}

void check_tiny(const BlockModel& model, int n) {
  if (n < 1 || n > kTinyMaxVertices || model.s() > kTinyMaxClasses) {
    throw Error(ErrorCode::TooLarge, "enumeration needs n <= 6 and s <= 3");
  }
  const double terms = std::pow(model.s(), n) * std::pow(2.0, n * (n - 1) / 2);
  if (terms > kTinyMaxTerms) {
    throw Error(ErrorCode::TooLarge, "s^n 2^C(n,2) = " + std::to_string(terms) + " exceeds 1e8");
  }
  if (model.M().maxCoeff() > n || model.d() >= n) {
    throw Error(ErrorCode::ProbabilityOverflow,
                "need M_ij <= n and d < n for n = " + std::to_string(n));
  }
}

void for_each_labeling(int n, int s, const std::function<void(std::span<const int>)>& visit) {
  std::vector<int> sigma(n, 0);
  while (true) {
    visit(sigma);
    int v = 0;
    while (v < n && ++sigma[v] == s) sigma[v++] = 0;
    if (v == n) return;
  }
}

double labeling_probability(const BlockModel& model, std::span<const int> sigma) {
  double p = 1.0;
  for (int l : sigma) p *= model.pi()[l];
  return p;
}

std::vector<double> conditional_graph_law(const BlockModel& model, std::span<const int> sigma) {
  const int n = static_cast<int>(sigma.size());
  const auto pairs = vertex_pairs(n);
  std::vector<double> law(std::size_t{1} << pairs.size());
  law[0] = 1.0;
  for (std::size_t e = 0; e < pairs.size(); ++e) {
    const double q = model.M()(sigma[pairs[e].first], sigma[pairs[e].second]) / n;
    const std::size_t half = std::size_t{1} << e;
    for (std::size_t mask = 0; mask < half; ++mask) {
      law[mask | half] = law[mask] * q;
      law[mask] *= 1.0 - q;
    }
  }
  return law;
}

std::vector<double> mixed_graph_law(const BlockModel& model, int n,
                                    const std::function<double(std::span<const int>)>& weight) {
  check_tiny(model, n);
  const std::size_t graphs = std::size_t{1} << (n * (n - 1) / 2);
  std::vector<CompensatedSum> acc(graphs);
  for_each_labeling(n, model.s(), [&](std::span<const int> sigma) {
    const double w = weight(sigma);
    if (w == 0.0) return;
    const auto law = conditional_graph_law(model, sigma);
    for (std::size_t g = 0; g < graphs; ++g) acc[g].add(w * law[g]);
  });
  std::vector<double> out(graphs);
  for (std::size_t g = 0; g < graphs; ++g) out[g] = acc[g].value();
  return out;
}

std::vector<double> erdos_renyi_law(int n, double d) {
  const int pairs = n * (n - 1) / 2;
  const double q = d / n;
  std::vector<double> law(std::size_t{1} << pairs);
  for (std::size_t mask = 0; mask < law.size(); ++mask) {
    const int edges = __builtin_popcountll(mask);
    law[mask] = std::pow(q, edges) * std::pow(1.0 - q, pairs - edges);
  }
  return law;
}

}  // namespace sbm
