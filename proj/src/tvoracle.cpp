#include "sbm/tvoracle.hpp"

#include <cmath>
#include <string>

#include "sbm/enumerate.hpp"
#include "sbm/error.hpp"

namespace sbm {

namespace {

void check_labels(const BlockModel& model, std::span<const int> labels) {
  for (int l : labels) {
    if (l < 0 || l >= model.s()) throw Error(ErrorCode::DomainError, "pinned label outside [0, s)");
  }
}

std::int64_t term_count(const BlockModel& model, int n) {
  return static_cast<std::int64_t>(std::pow(model.s(), n)) << (n * (n - 1) / 2);
}

// P(G | sigma_v = fixed[v] wherever fixed[v] >= 0).
std::vector<double> pinned_law(const BlockModel& model, int n, const std::vector<int>& fixed) {
  return mixed_graph_law(model, n, [&](std::span<const int> sigma) {
    double w = 1.0;
    for (int v = 0; v < n; ++v) {
      if (fixed[v] >= 0) {
        if (sigma[v] != fixed[v]) return 0.0;
      } else {
        w *= model.pi()[sigma[v]];
      }
    }
    return w;
  });
}

double half_l1(const std::vector<double>& x, const std::vector<double>& y) {
  CompensatedSum total;
  for (std::size_t g = 0; g < x.size(); ++g) total.add(std::abs(x[g] - y[g]));
  return 0.5 * total.value();
}

}  // namespace

TvResult exact_conditional_tv(const BlockModel& model, int n, const ConditionalSpec& spec) {
  check_tiny(model, n);
  if (spec.pins_a.size() != spec.pins_b.size() || static_cast<int>(spec.pins_a.size()) > n) {
    throw Error(ErrorCode::LengthMismatch, "pin vectors must share a length r <= n");
  }
  check_labels(model, spec.pins_a);
  check_labels(model, spec.pins_b);
  std::vector<int> fixed_a(n, -1);
  std::vector<int> fixed_b(n, -1);
  for (std::size_t v = 0; v < spec.pins_a.size(); ++v) {
    fixed_a[v] = spec.pins_a[v];
    fixed_b[v] = spec.pins_b[v];
  }
  TvResult out;
  out.tv = half_l1(pinned_law(model, n, fixed_a), pinned_law(model, n, fixed_b));
  out.terms = 2 * term_count(model, n);
  return out;
}

TvResult exact_posterior_tv(const BlockModel& model, int n, int u, std::span<const int> pinned,
                            std::span<const int> labels) {
  check_tiny(model, n);
  if (pinned.size() != labels.size()) throw Error(ErrorCode::LengthMismatch, "pinned set and labels differ in length");
  check_labels(model, labels);
  if (u < 0 || u >= n) throw Error(ErrorCode::DomainError, "u outside [0, n)");
  std::vector<int> fixed(n, -1);
  for (std::size_t k = 0; k < pinned.size(); ++k) {
    if (pinned[k] < 0 || pinned[k] >= n) throw Error(ErrorCode::DomainError, "pinned vertex outside [0, n)");
    if (pinned[k] == u) throw Error(ErrorCode::DomainError, "u must not be pinned");
    fixed[pinned[k]] = labels[k];
  }
  const auto base = pinned_law(model, n, fixed);
  TvResult out;
  CompensatedSum total;
  for (int i = 0; i < model.s(); ++i) {
    std::vector<int> with_u = fixed;
    with_u[u] = i;
    total.add(model.pi()[i] * half_l1(pinned_law(model, n, with_u), base));
  }
  out.tv = total.value();
  out.terms = (model.s() + 1) * term_count(model, n);
  return out;
}

double planted_law_mass(const BlockModel& model, int n) {
  const auto law = pinned_law(model, n, std::vector<int>(n, -1));
  CompensatedSum total;
  for (double p : law) total.add(p);
  return total.value();
}

}  // namespace sbm
