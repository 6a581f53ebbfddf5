#pragma once

#include <cstdint>
#include <map>
#include <string_view>

#include "sbm/model.hpp"
#include "sbm/sampler.hpp"

namespace sbm {

inline constexpr int kMinCycleLength = 3;
inline constexpr int kMaxCycleLength = 12;
inline constexpr int kDefaultCycleK = 9;
// Poisson means must differ by this many null standard deviations.
inline constexpr double kSeparationSigmas = 6.0;

// Number of simple k-cycles, each counted once. Throws KOutOfRange unless
// 3 <= k <= 12.
std::int64_t count_k_cycles(const LabeledGraph& graph, int k, int threads = 1);

struct CycleStats {
  std::map<int, std::int64_t> counts;
  std::map<int, double> null_means;     // d^k / (2k)
  std::map<int, double> planted_means;  // d^k tr(T^k) / (2k)
};

CycleStats cycle_stats(const LabeledGraph& graph, const BlockModel& model, int K, int threads = 1);

// Re tr(T^k) = sum_i lambda_i^k.
double trace_power(const SpectralSummary& spectrum, int k);

enum class CycleDecision { Planted, Null, Inconclusive };
std::string_view to_string(CycleDecision decision);

struct CycleTestResult {
  CycleDecision decision = CycleDecision::Inconclusive;
  int k = 0;  // 0 when no k qualified
  std::int64_t statistic = 0;
  double null_mean = 0.0;
  double planted_mean = 0.0;
};

// Largest k <= K whose means are kSeparationSigmas * sqrt(null mean) apart;
// Planted when X_k is on the planted side of the midpoint. Inconclusive when
// ks_gap <= 1 or no k qualifies.
int select_test_k(const BlockModel& model, int K);
CycleTestResult cycle_test(const LabeledGraph& graph, const BlockModel& model, int K = kDefaultCycleK,
                           int threads = 1);

}  // namespace sbm
