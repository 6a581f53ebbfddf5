#include "sbm/reconstruct.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "sbm/error.hpp"
#include "sbm/model.hpp"
#include "sbm/parallel.hpp"

namespace sbm {

namespace {

int integral_block(int n, double fraction, const char* name) {
  const double size = fraction * n;
  const double rounded = std::round(size);
  if (std::abs(size - rounded) > 1e-9 || rounded < 0 || rounded > n) {
    throw Error(ErrorCode::BadParametrization,
                std::string(name) + " n = " + std::to_string(size) + " is not an integer block size");
  }
  return static_cast<int>(rounded);
}

double log_binomial(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

// Advances `comb` (ascending, values < n) to the next combination in
// lexicographic order; false after the last one.
bool next_combination(std::vector<int>& comb, int n) {
  const int k = static_cast<int>(comb.size());
  int i = k - 1;
  while (i >= 0 && comb[i] == n - k + i) --i;
  if (i < 0) return false;
  ++comb[i];
  for (int j = i + 1; j < k; ++j) comb[j] = comb[j - 1] + 1;
  return true;
}

}  // namespace

OverlapScore overlap(std::span<const int> sigma, std::span<const int> tau, int s) {
  if (sigma.size() != tau.size()) throw Error(ErrorCode::LengthMismatch, "labelings differ in length");
  const int n = static_cast<int>(sigma.size());
  if (s <= 0) {
    int top = 0;
    for (int l : sigma) top = std::max(top, l);
    for (int l : tau) top = std::max(top, l);
    s = top + 1;
  }
  if (s > kMaxOverlapClasses) throw Error(ErrorCode::DomainError, "overlap supports s <= 8");
  std::vector<double> joint(s * s, 0.0);
  std::vector<double> row(s, 0.0);
  std::vector<double> col(s, 0.0);
  for (int v = 0; v < n; ++v) {
    if (sigma[v] < 0 || sigma[v] >= s || tau[v] < 0 || tau[v] >= s) {
      throw Error(ErrorCode::DomainError, "label outside [0, s)");
    }
    joint[sigma[v] * s + tau[v]] += 1.0;
    row[sigma[v]] += 1.0;
    col[tau[v]] += 1.0;
  }
  OverlapScore best;
  best.value = -std::numeric_limits<double>::infinity();
  std::vector<int> rho(s);
  std::iota(rho.begin(), rho.end(), 0);
  do {
    double total = 0.0;
    for (int i = 0; i < s; ++i) total += joint[i * s + rho[i]] - row[i] * col[rho[i]] / n;
    total /= n;
    if (total > best.value) {
      best.value = total;
      best.best_permutation = rho;
    }
  } while (std::next_permutation(rho.begin(), rho.end()));
  return best;
}

OverlapCorrelation overlap_correlation_check(std::span<const int> sigma, std::span<const int> tau,
                                             double p, double q, double eps) {
  if (sigma.size() != tau.size()) throw Error(ErrorCode::LengthMismatch, "labelings differ in length");
  const int n = static_cast<int>(sigma.size());
  auto zeros = [&](std::span<const int> labels, double fraction, const char* name) {
    int count = 0;
    for (int l : labels) {
      if (l != 0 && l != 1) throw Error(ErrorCode::NotAPartition, std::string(name) + " has a label outside {0, 1}");
      count += l == 0;
    }
    const double expected = fraction * n;
    if (std::abs(count - expected) > 1e-9) {
      throw Error(ErrorCode::NotAPartition, std::string(name) + " small block has " + std::to_string(count) +
                                                " vertices, expected " + std::to_string(expected));
    }
    return count;
  };
  zeros(sigma, p, "sigma");
  const int q_count = zeros(tau, q, "tau");
  if (q_count == 0) throw Error(ErrorCode::NotAPartition, "tau has an empty small block");
  int both = 0;
  for (int v = 0; v < n; ++v) both += sigma[v] == 0 && tau[v] == 0;
  OverlapCorrelation out;
  out.p1 = static_cast<double>(both) / q_count;
  out.overlap = overlap(sigma, tau, 2).value;
  // The overlap equals 2q|p1 - p| exactly for two blocks; the slack absorbs
  // rounding on the boundary.
  out.premise = out.overlap < 2.0 * q * eps - 1e-12;
  out.conclusion = std::abs(out.p1 - p) < eps;
  out.holds = !out.premise || out.conclusion;
  return out;
}

double entropy(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::DomainError, "entropy needs p in [0, 1]");
  auto term = [](double x) { return x > 0.0 ? -x * std::log(x) : 0.0; };
  return term(p) + term(1.0 - p);
}

BernsteinCondition bernstein_condition(double p, double a, double d) {
  two_cluster_model(p, a, d);
  BernsteinCondition out;
  const double lambda2 = (a - 1.0) * p / (1.0 - p);
  out.lhs = d * lambda2 * lambda2;
  out.rhs = 4.0 * (a + 3.0) * entropy(p) / (3.0 * (1.0 - p) * (1.0 - p));
  out.satisfied = out.lhs > out.rhs;
  return out;
}

double default_delta(int n, double p, double d, double a) {
  const double k = std::round(p * n);
  const double pairs = k * (k - 1.0) / 2.0;
  const double q = d * a / n;
  return 3.0 * std::sqrt(pairs * q * (1.0 - q)) / n;
}

ReconstructResult exhaustive_reconstruct(const LabeledGraph& graph, double p, double d, double a,
                                         std::optional<double> delta, bool first_only, int threads) {
  const int n = graph.n;
  const int k = integral_block(n, p, "p");
  if (k < 1) throw Error(ErrorCode::BadParametrization, "small block is empty");
  if (log_binomial(n, k) > std::log(kMaxPartitions) + 1e-9) {
    throw Error(ErrorCode::CombinatorialBlowup,
                "C(" + std::to_string(n) + ", " + std::to_string(k) + ") exceeds 1e6 partitions");
  }
  ReconstructResult out;
  out.block_size = k;
  out.delta = delta.value_or(default_delta(n, p, d, a));
  const double center = d * a * p * p / 2.0;
  out.window_lo = (center - out.delta) * n;
  out.window_hi = (center + out.delta) * n;

  std::vector<std::vector<char>> adj(n, std::vector<char>(n, 0));
  for (const auto& [u, v] : graph.edges) adj[u][v] = adj[v][u] = 1;

  // Strata by the first member keep the merged output lexicographic.
  const int strata = n - k + 1;
  std::vector<std::vector<AcceptedPartition>> found(strata);
  std::vector<long long> checked(strata, 0);
  parallel_for(static_cast<std::size_t>(strata), threads, [&](std::size_t stratum) {
    const int head = static_cast<int>(stratum);
    const int tail_range = n - head - 1;
    std::vector<int> offsets(k - 1);
    std::iota(offsets.begin(), offsets.end(), 0);
    std::vector<int> members(k);
    do {
      members[0] = head;
      for (int j = 0; j < k - 1; ++j) members[j + 1] = head + 1 + offsets[j];
      int edges = 0;
      for (int x = 0; x < k; ++x) {
        for (int y = x + 1; y < k; ++y) edges += adj[members[x]][members[y]];
      }
      ++checked[stratum];
      if (edges >= out.window_lo && edges <= out.window_hi) {
        found[stratum].push_back({members, edges, std::nullopt});
        if (first_only) return;
      }
    } while (k > 1 && next_combination(offsets, tail_range));
  });

  for (int stratum = 0; stratum < strata; ++stratum) {
    out.partitions_checked += checked[stratum];
    for (auto& part : found[stratum]) {
      out.accepted.push_back(std::move(part));
      if (first_only) break;
    }
    if (first_only && !out.accepted.empty()) break;
  }
  if (graph.has_labels()) {
    std::vector<int> guess(n);
    for (auto& part : out.accepted) {
      std::fill(guess.begin(), guess.end(), 1);
      for (int v : part.members) guess[v] = 0;
      part.overlap = overlap(graph.labels, guess, std::max(2, graph.s)).value;
    }
  }
  return out;
}

}  // namespace sbm
