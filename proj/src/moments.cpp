#include "sbm/moments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "sbm/enumerate.hpp"
#include "sbm/error.hpp"
#include "sbm/parallel.hpp"
#include "sbm/rng.hpp"

namespace sbm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kImagTol = 1e-8;
constexpr double kMinAcceptance = 0.01;
constexpr int kMinAttemptsForRate = 1000;
constexpr std::int64_t kMaxAttemptsPerSample = 100000;

std::vector<std::complex<double>> nontrivial(const SpectralSummary& spectrum) {
  return {spectrum.eigenvalues.begin() + 1, spectrum.eigenvalues.end()};
}

bool diverges(const SpectralSummary& spectrum) {
  const auto lambdas = nontrivial(spectrum);
  for (const auto& a : lambdas) {
    for (const auto& b : lambdas) {
      if (spectrum.d * std::abs(a * b) >= 1.0) return true;
    }
  }
  return false;
}

double real_or_throw(std::complex<double> log_value, const char* what) {
  if (std::abs(log_value.imag()) > kImagTol) {
    throw Error(ErrorCode::ComplexResidual, std::string(what) + " has imaginary log-part " +
                                                std::to_string(log_value.imag()));
  }
  return log_value.real() > kLogOverflow ? kInf : std::exp(log_value.real());
}

double exp_guarded(double log_value) { return log_value > kLogOverflow ? kInf : std::exp(log_value); }

// log f for the pair factor f = 1 + A_ik A_jl (1/(nd) + 1/(n(n-d))), indexed
// by the cell types (i, j) and (k, l) of the two endpoints.
Eigen::MatrixXd log_pair_factors(const BlockModel& model, int n) {
  const int s = model.s();
  const double d = model.d();
  const Eigen::MatrixXd A = model.M() - Eigen::MatrixXd::Constant(s, s, d);
  const double c = 1.0 / (n * d) + 1.0 / (n * (n - d));
  Eigen::MatrixXd out(s * s, s * s);
  for (int i = 0; i < s; ++i) {
    for (int j = 0; j < s; ++j) {
      for (int k = 0; k < s; ++k) {
        for (int l = 0; l < s; ++l) out(i * s + j, k * s + l) = std::log1p(A(i, k) * A(j, l) * c);
      }
    }
  }
  return out;
}

void check_pair_product(const BlockModel& model, int n) {
  if (n < 2) throw Error(ErrorCode::DomainError, "n must be at least 2");
  if (model.M().maxCoeff() > n || model.d() >= n) {
    throw Error(ErrorCode::ProbabilityOverflow,
                "need M_ij <= n and d < n for n = " + std::to_string(n));
  }
}

double log_pair_product_with(const Eigen::MatrixXd& log_f, const Eigen::MatrixXi& N) {
  const int s = static_cast<int>(N.rows());
  double total = 0.0;
  for (int a = 0; a < s * s; ++a) {
    const double na = N(a / s, a % s);
    if (na == 0.0) continue;
    double row = 0.0;
    for (int b = 0; b < s * s; ++b) row += N(b / s, b % s) * log_f(a, b);
    total += 0.5 * na * row - 0.5 * na * log_f(a, a);
  }
  return total;
}

std::vector<int> class_counts(std::span<const int> labels, int s) {
  std::vector<int> counts(s, 0);
  for (int l : labels) ++counts[l];
  return counts;
}

}  // namespace

double BalanceWindow::half_width(int n) const { return std::pow(static_cast<double>(n), gamma); }

bool BalanceWindow::contains(std::span<const int> counts, const Eigen::VectorXd& pi, int n) const {
  const double a = half_width(n);
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (std::abs(counts[i] - n * pi[i]) > a) return false;
  }
  return true;
}

BalanceWindow make_window(double gamma) {
  if (!(gamma > 0.5 && gamma <= 1.0)) {
    throw Error(ErrorCode::DomainError, "window exponent must lie in (1/2, 1], got " + std::to_string(gamma));
  }
  return BalanceWindow{gamma};
}

double psi(double x) {
  if (!(x < 1.0)) throw Error(ErrorCode::DomainError, "psi needs x < 1, got " + std::to_string(x));
  return std::exp(-0.5 * std::log1p(-x) - x / 2.0 - x * x / 4.0);
}

double second_moment_limit(const SpectralSummary& spectrum) {
  if (diverges(spectrum)) return kInf;
  std::complex<double> log_total = 0.0;
  for (const auto& a : nontrivial(spectrum)) {
    for (const auto& b : nontrivial(spectrum)) {
      const std::complex<double> x = spectrum.d * a * b;
      log_total += -0.5 * std::log(1.0 - x) - x / 2.0 - x * x / 4.0;
    }
  }
  return real_or_throw(log_total, "second-moment product");
}

NuTerms nu_terms(const SpectralSummary& spectrum) {
  const double d = spectrum.d;
  NuTerms out;
  const double tr_b = spectrum.B.trace();
  const double tr_b2 = (spectrum.B * spectrum.B).trace();
  out.nu1 = -(d / 2.0) * tr_b * tr_b;
  out.nu2 = -(d * d / 4.0) * tr_b2 * tr_b2;
  std::complex<double> s1 = 0.0;
  std::complex<double> s2 = 0.0;
  for (const auto& a : nontrivial(spectrum)) {
    for (const auto& b : nontrivial(spectrum)) {
      const std::complex<double> x = d * a * b;
      s1 += x;
      s2 += x * x;
    }
  }
  out.nu1_eigen = -0.5 * s1.real();
  out.nu2_eigen = -0.25 * s2.real();
  return out;
}

double gaussian_exp_moment(const SpectralSummary& spectrum) {
  if (diverges(spectrum)) return kInf;
  std::complex<double> log_total = 0.0;
  for (const auto& a : nontrivial(spectrum)) {
    for (const auto& b : nontrivial(spectrum)) log_total += -0.5 * std::log(1.0 - spectrum.d * a * b);
  }
  return real_or_throw(log_total, "Gaussian product");
}

double gaussian_exp_moment_kron(const BlockModel& model) {
  const int s = model.s();
  const double d = model.d();
  const Eigen::MatrixXd A = model.M() - Eigen::MatrixXd::Constant(s, s, d);
  const Eigen::MatrixXd W = model.pi().asDiagonal() * A;
  Eigen::MatrixXd K(s * s, s * s);
  for (int i = 0; i < s; ++i) {
    for (int k = 0; k < s; ++k) K.block(i * s, k * s, s, s) = W(i, k) * W / d;
  }
  Eigen::EigenSolver<Eigen::MatrixXd> solver(K, false);
  if (solver.info() != Eigen::Success) throw Error(ErrorCode::EigenFailure, "Kronecker spectrum failed");
  std::complex<double> log_total = 0.0;
  for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
    const std::complex<double> mu = solver.eigenvalues()[i];
    if (std::abs(mu) >= 1.0 - 1e-12) return kInf;
    log_total += -0.5 * std::log(1.0 - mu);
  }
  return real_or_throw(log_total, "Kronecker Gaussian product");
}

Eigen::MatrixXd quadratic_kernel(const BlockModel& model) {
  const int s = model.s();
  const double d = model.d();
  const Eigen::MatrixXd A = model.M() - Eigen::MatrixXd::Constant(s, s, d);
  Eigen::MatrixXd out(s * s, s * s);
  for (int i = 0; i < s; ++i) {
    for (int k = 0; k < s; ++k) out.block(i * s, k * s, s, s) = A(i, k) * A / (2.0 * d);
  }
  return out;
}

Eigen::MatrixXi coupling_counts(std::span<const int> sigma, std::span<const int> tau, int s) {
  if (sigma.size() != tau.size()) throw Error(ErrorCode::LengthMismatch, "sigma and tau differ in length");
  Eigen::MatrixXi N = Eigen::MatrixXi::Zero(s, s);
  for (std::size_t v = 0; v < sigma.size(); ++v) ++N(sigma[v], tau[v]);
  return N;
}

Eigen::MatrixXd centered_counts(const Eigen::MatrixXi& N, const Eigen::VectorXd& pi) {
  const double n = N.sum();
  return (N.cast<double>() - n * pi * pi.transpose()) / std::sqrt(n);
}

double log_pair_product(const BlockModel& model, int n, const Eigen::MatrixXi& N) {
  check_pair_product(model, n);
  return log_pair_product_with(log_pair_factors(model, n), N);
}

double log_pair_product_direct(const BlockModel& model, std::span<const int> sigma,
                               std::span<const int> tau) {
  if (sigma.size() != tau.size()) throw Error(ErrorCode::LengthMismatch, "sigma and tau differ in length");
  const int n = static_cast<int>(sigma.size());
  check_pair_product(model, n);
  const double d = model.d();
  const Eigen::MatrixXd& M = model.M();
  double total = 0.0;
  for (int u = 0; u < n; ++u) {
    for (int v = u + 1; v < n; ++v) {
      const double m1 = M(sigma[u], sigma[v]);
      const double m2 = M(tau[u], tau[v]);
      total += std::log(m1 * m2 / (n * d) + (1.0 - m1 / n) * (1.0 - m2 / n) / (1.0 - d / n));
    }
  }
  return total;
}

EmpiricalMoment empirical_second_moment(const BlockModel& model, int n, int samples,
                                        const BalanceWindow& window, std::uint64_t seed, int threads) {
  check_pair_product(model, n);
  if (samples < 1) throw Error(ErrorCode::DomainError, "samples must be positive");
  const int s = model.s();
  const Eigen::MatrixXd log_f = log_pair_factors(model, n);
  std::vector<double> cumulative(s);
  std::partial_sum(model.pi().begin(), model.pi().end(), cumulative.begin());
  const std::uint64_t stream = derive_stream(seed, "second-moment");

  std::vector<double> logs(samples);
  std::vector<std::int64_t> attempts(samples, 0);
  parallel_for(static_cast<std::size_t>(samples), threads, [&](std::size_t i) {
    Rng rng(substream(stream, i));
    std::vector<int> sigma(n);
    std::vector<int> tau(n);
    auto draw = [&](std::vector<int>& labels) {
      while (true) {
        ++attempts[i];
        for (auto& l : labels) l = rng.categorical(cumulative);
        if (window.contains(class_counts(labels, s), model.pi(), n)) return;
        if (attempts[i] >= kMaxAttemptsPerSample) {
          throw Error(ErrorCode::WindowTooTight,
                      "fewer than 1% of label vectors fall in the window at n = " + std::to_string(n));
        }
      }
    };
    draw(sigma);
    draw(tau);
    logs[i] = log_pair_product_with(log_f, coupling_counts(sigma, tau, s));
  });

  EmpiricalMoment out;
  out.n = n;
  out.samples = samples;
  const std::int64_t total_attempts = std::accumulate(attempts.begin(), attempts.end(), std::int64_t{0});
  out.acceptance_rate = 2.0 * samples / static_cast<double>(total_attempts);
  if (total_attempts >= kMinAttemptsForRate && out.acceptance_rate < kMinAcceptance) {
    throw Error(ErrorCode::WindowTooTight, "acceptance rate " + std::to_string(out.acceptance_rate));
  }
  const double peak = *std::max_element(logs.begin(), logs.end());
  CompensatedSum sum;
  for (double l : logs) sum.add(std::exp(l - peak));
  const double mean_scaled = sum.value() / samples;
  CompensatedSum sq;
  for (double l : logs) {
    const double dev = std::exp(l - peak) - mean_scaled;
    sq.add(dev * dev);
  }
  const double var_scaled = samples > 1 ? sq.value() / (samples - 1) : 0.0;
  out.log_estimate = peak + std::log(mean_scaled);
  out.estimate = exp_guarded(out.log_estimate);
  out.std_error = var_scaled == 0.0 ? 0.0 : exp_guarded(peak + 0.5 * std::log(var_scaled / samples));
  return out;
}

ExactTinyMoment exact_tiny_second_moment(const BlockModel& model, int n, std::optional<BalanceWindow> window) {
  check_tiny(model, n);
  const int s = model.s();
  auto in_window = [&](std::span<const int> sigma) {
    return !window || window->contains(class_counts(sigma, s), model.pi(), n);
  };

  ExactTinyMoment out;
  const auto planted = mixed_graph_law(model, n, [&](std::span<const int> sigma) {
    return in_window(sigma) ? labeling_probability(model, sigma) : 0.0;
  });
  const auto null = erdos_renyi_law(n, model.d());
  CompensatedSum route1;
  for (std::size_t g = 0; g < planted.size(); ++g) route1.add(planted[g] * planted[g] / null[g]);
  out.graph_enumeration = route1.value();

  std::vector<std::vector<int>> kept;
  std::vector<double> weights;
  for_each_labeling(n, s, [&](std::span<const int> sigma) {
    if (!in_window(sigma)) return;
    kept.emplace_back(sigma.begin(), sigma.end());
    weights.push_back(labeling_probability(model, sigma));
  });
  CompensatedSum route2;
  for (std::size_t a = 0; a < kept.size(); ++a) {
    for (std::size_t b = 0; b < kept.size(); ++b) {
      route2.add(weights[a] * weights[b] * std::exp(log_pair_product_direct(model, kept[a], kept[b])));
    }
  }
  out.pair_product = route2.value();
  return out;
}

double exact_tiny_normalization(const BlockModel& model, int n) {
  const auto law = mixed_graph_law(model, n, [&](std::span<const int> sigma) {
    return labeling_probability(model, sigma);
  });
  CompensatedSum total;
  for (double p : law) total.add(p);
  return total.value();
}

namespace {

class CompositionSum {
 public:
  CompositionSum(const Eigen::VectorXd& pi, const Eigen::MatrixXd& Atilde, int n, double half_width)
      : s_(static_cast<int>(pi.size())),
        m_(s_ * s_),
        n_(n),
        half_width_(half_width),
        pi_(pi),
        kernel_(0.5 * (Atilde + Atilde.transpose())),
        counts_(m_, 0),
        partial_(m_ + 1, Eigen::VectorXd::Zero(m_)) {
    log_factorial_.resize(n + 1);
    for (int k = 0; k <= n; ++k) log_factorial_[k] = std::lgamma(k + 1.0);
    for (int i = 0; i < s_; ++i) {
      for (int j = 0; j < s_; ++j) {
        const double p = pi[i] * pi[j];
        cell_mass_.push_back(n * p);
        log_p_.push_back(std::log(p));
      }
    }
  }

  double log_value() {
    visit(0, n_, log_factorial_[n_], 0.0);
    return peak_ == -kInf ? -kInf : peak_ + std::log(scaled_);
  }

 private:
  bool row_ok(int row) const {
    int total = 0;
    for (int j = 0; j < s_; ++j) total += counts_[row * s_ + j];
    return std::abs(total - n_ * pi_[row]) <= half_width_;
  }

  bool columns_ok() const {
    for (int j = 0; j < s_; ++j) {
      int total = 0;
      for (int i = 0; i < s_; ++i) total += counts_[i * s_ + j];
      if (std::abs(total - n_ * pi_[j]) > half_width_) return false;
    }
    return true;
  }

  void accumulate(double log_term) {
    if (log_term > peak_) {
      scaled_ = scaled_ * std::exp(peak_ - log_term) + 1.0;
      peak_ = log_term;
    } else {
      scaled_ += std::exp(log_term - peak_);
    }
  }

  // Cells before `cell` are fixed; `log_mass` holds the multinomial log-mass
  // and `quad` the quadratic form over them.
  void visit(int cell, int remaining, double log_mass, double quad) {
    const double root_n = std::sqrt(static_cast<double>(n_));
    const int lo = cell == m_ - 1 ? remaining : 0;
    for (int k = lo; k <= remaining; ++k) {
      counts_[cell] = k;
      const double x = (k - cell_mass_[cell]) / root_n;
      const double next_quad = quad + x * (2.0 * partial_[cell][cell] + kernel_(cell, cell) * x);
      const double next_mass = log_mass - log_factorial_[k] + k * log_p_[cell];
      if ((cell + 1) % s_ == 0 && !row_ok(cell / s_)) continue;
      if (cell == m_ - 1) {
        if (columns_ok()) accumulate(next_mass + next_quad);
        continue;
      }
      partial_[cell + 1] = partial_[cell] + kernel_.col(cell) * x;
      visit(cell + 1, remaining - k, next_mass, next_quad);
    }
  }

  int s_;
  int m_;
  int n_;
  double half_width_;
  Eigen::VectorXd pi_;
  Eigen::MatrixXd kernel_;
  std::vector<int> counts_;
  std::vector<Eigen::VectorXd> partial_;
  std::vector<double> log_factorial_;
  std::vector<double> cell_mass_;
  std::vector<double> log_p_;
  double peak_ = -kInf;
  double scaled_ = 0.0;
};

}  // namespace

double multinomial_exp_moment(const Eigen::VectorXd& pi, const Eigen::MatrixXd& Atilde, int n,
                              const BalanceWindow& window) {
  const int s = static_cast<int>(pi.size());
  if (Atilde.rows() != s * s || Atilde.cols() != s * s) {
    throw Error(ErrorCode::DimensionMismatch, "Atilde must be s^2 x s^2");
  }
  const bool allowed = n >= 1 && ((s == 2 && n <= 512) || (s == 3 && n <= 32));
  if (!allowed) {
    throw Error(ErrorCode::TooLarge, "multinomial sum supports s = 2 with n <= 512 or s = 3 with n <= 32");
  }
  CompositionSum sum(pi, Atilde, n, window.half_width(n));
  return exp_guarded(sum.log_value());
}

}  // namespace sbm
