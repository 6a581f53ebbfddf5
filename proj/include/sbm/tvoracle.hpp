#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sbm/model.hpp"

namespace sbm {

// Labels pinned on vertices 0..r-1 under two alternatives.
struct ConditionalSpec {
  std::vector<int> pins_a;
  std::vector<int> pins_b;
};

struct TvResult {
  double tv = 0.0;
  std::int64_t terms = 0;  // labelings times graphs enumerated
};

// (1/2) sum_G |P(G | pins_a) - P(G | pins_b)| by full enumeration.
// Throws TooLarge beyond n = 6, s = 3 or 1e8 terms.
TvResult exact_conditional_tv(const BlockModel& model, int n, const ConditionalSpec& spec);

// E over G ~ P(. | sigma_S) of TV(P(sigma_u | G, sigma_S), pi).
TvResult exact_posterior_tv(const BlockModel& model, int n, int u, std::span<const int> pinned,
                            std::span<const int> labels);

// Total mass of the enumerated planted law; 1 up to rounding.
double planted_law_mass(const BlockModel& model, int n);

}  // namespace sbm
