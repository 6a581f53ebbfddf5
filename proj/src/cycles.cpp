#include "sbm/cycles.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "sbm/error.hpp"
#include "sbm/parallel.hpp"

namespace sbm {

namespace {

void check_k(int k) {
  if (k < kMinCycleLength || k > kMaxCycleLength) {
    throw Error(ErrorCode::KOutOfRange, "k = " + std::to_string(k) + " outside [3, 12]");
  }
}

// Counts k-cycles whose minimum vertex is `root`, each once: paths leave the
// root through vertices larger than it and close back only when the second
// vertex is smaller than the last one.
class RootedCounter {
 public:
  RootedCounter(const std::vector<std::vector<int>>& adj, int k)
      : adj_(adj), k_(k), on_path_(adj.size(), 0), closes_(adj.size(), 0) {}

  std::int64_t count(int root) {
    root_ = root;
    std::int64_t total = 0;
    for (int w : adj_[root]) closes_[w] = 1;
    on_path_[root] = 1;
    for (int first : adj_[root]) {
      if (first <= root) continue;
      first_ = first;
      on_path_[first] = 1;
      total += extend(first, 2);
      on_path_[first] = 0;
    }
    on_path_[root] = 0;
    for (int w : adj_[root]) closes_[w] = 0;
    return total;
  }

 private:
  // `depth` vertices are on the path, ending at `tail`.
  std::int64_t extend(int tail, int depth) {
    if (depth == k_) return closes_[tail] && first_ < tail ? 1 : 0;
    std::int64_t total = 0;
    for (int w : adj_[tail]) {
      if (w <= root_ || on_path_[w]) continue;
      on_path_[w] = 1;
      total += extend(w, depth + 1);
      on_path_[w] = 0;
    }
    return total;
  }

  const std::vector<std::vector<int>>& adj_;
  int k_;
  int root_ = 0;
  int first_ = 0;
  std::vector<char> on_path_;
  std::vector<char> closes_;
};

}  // namespace

std::int64_t count_k_cycles(const LabeledGraph& graph, int k, int threads) {
  check_k(k);
  const auto adj = adjacency_lists(graph);
  const int workers = std::max(1, threads);
  std::vector<std::int64_t> partial(workers, 0);
  parallel_for(static_cast<std::size_t>(workers), workers, [&](std::size_t w) {
    RootedCounter counter(adj, k);
    for (int root = static_cast<int>(w); root < graph.n; root += workers) partial[w] += counter.count(root);
  });
  std::int64_t total = 0;
  for (auto c : partial) total += c;
  return total;
}

double trace_power(const SpectralSummary& spectrum, int k) {
  std::complex<double> total = 0.0;
  for (const auto& lambda : spectrum.eigenvalues) total += std::pow(lambda, k);
  return total.real();
}

CycleStats cycle_stats(const LabeledGraph& graph, const BlockModel& model, int K, int threads) {
  check_k(K);
  const SpectralSummary spectrum = spectral_summary(model);
  const double d = model.d();
  CycleStats stats;
  for (int k = kMinCycleLength; k <= K; ++k) {
    stats.counts[k] = count_k_cycles(graph, k, threads);
    const double null_mean = std::pow(d, k) / (2.0 * k);
    stats.null_means[k] = null_mean;
    stats.planted_means[k] = null_mean * trace_power(spectrum, k);
  }
  return stats;
}

std::string_view to_string(CycleDecision decision) {
  switch (decision) {
    case CycleDecision::Planted: return "PLANTED";
    case CycleDecision::Null: return "NULL";
    case CycleDecision::Inconclusive: return "INCONCLUSIVE";
  }
  return "?";
}

int select_test_k(const BlockModel& model, int K) {
  check_k(K);
  const SpectralSummary spectrum = spectral_summary(model);
  if (!(spectrum.ks_gap > 1.0)) return 0;
  for (int k = K; k >= kMinCycleLength; --k) {
    const double null_mean = std::pow(model.d(), k) / (2.0 * k);
    const double planted_mean = null_mean * trace_power(spectrum, k);
    if (std::abs(planted_mean - null_mean) >= kSeparationSigmas * std::sqrt(null_mean)) return k;
  }
  return 0;
}

CycleTestResult cycle_test(const LabeledGraph& graph, const BlockModel& model, int K, int threads) {
  CycleTestResult out;
  const int k = select_test_k(model, K);
  if (k == 0) return out;
  const SpectralSummary spectrum = spectral_summary(model);
  out.k = k;
  out.null_mean = std::pow(model.d(), k) / (2.0 * k);
  out.planted_mean = out.null_mean * trace_power(spectrum, k);
  out.statistic = count_k_cycles(graph, k, threads);
  const double midpoint = 0.5 * (out.null_mean + out.planted_mean);
  const bool planted_above = out.planted_mean > out.null_mean;
  const double x = static_cast<double>(out.statistic);
  out.decision = (planted_above ? x > midpoint : x < midpoint) ? CycleDecision::Planted : CycleDecision::Null;
  return out;
}

}  // namespace sbm
