#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <span>

#include <Eigen/Dense>

#include "sbm/model.hpp"

namespace sbm {

// Past this log-value an exponential is reported as +inf.
inline constexpr double kLogOverflow = 700.0;

// The event that every class count lies within a_n = n^gamma of n pi_i.
struct BalanceWindow {
  double gamma = 0.75;

  double half_width(int n) const;
  bool contains(std::span<const int> counts, const Eigen::VectorXd& pi, int n) const;
};

// Throws DomainError unless 1/2 < gamma <= 1.
BalanceWindow make_window(double gamma);

// psi(x) = (1-x)^(-1/2) exp(-x/2 - x^2/4); DomainError for x >= 1.
double psi(double x);

// prod_{i,j>=2} psi(d lambda_i lambda_j), +inf once d|lambda_i lambda_j| >= 1.
// Throws ComplexResidual when the product is not real to 1e-8.
double second_moment_limit(const SpectralSummary& spectrum);

struct NuTerms {
  double nu1 = 0.0;  // -(d/2) tr(B)^2
  double nu2 = 0.0;  // -(d^2/4) tr(B^2)^2
  double nu1_eigen = 0.0;  // -(1/2) sum_{i,j>=2} d lambda_i lambda_j
  double nu2_eigen = 0.0;  // -(1/4) sum_{i,j>=2} (d lambda_i lambda_j)^2
};

NuTerms nu_terms(const SpectralSummary& spectrum);

// prod_{i,j>=2} (1 - d lambda_i lambda_j)^(-1/2), +inf once d|lambda_2|^2 >= 1.
double gaussian_exp_moment(const SpectralSummary& spectrum);

// The same quantity from the spectrum of (1/d)(diag(pi) A) (x) (diag(pi) A).
double gaussian_exp_moment_kron(const BlockModel& model);

// (1/2d) A (x) A, the quadratic kernel of the multinomial exponential moment.
Eigen::MatrixXd quadratic_kernel(const BlockModel& model);

// N_ij = #{v : sigma_v = i, tau_v = j}.
Eigen::MatrixXi coupling_counts(std::span<const int> sigma, std::span<const int> tau, int s);

// X_ij = (N_ij - n pi_i pi_j) / sqrt(n).
Eigen::MatrixXd centered_counts(const Eigen::MatrixXi& N, const Eigen::VectorXd& pi);

// log prod_{u<v} E_Q[W_uv(sigma) W_uv(tau)] from the counts N alone.
double log_pair_product(const BlockModel& model, int n, const Eigen::MatrixXi& N);

// The same product evaluated pair by pair; O(n^2).
double log_pair_product_direct(const BlockModel& model, std::span<const int> sigma,
                               std::span<const int> tau);

struct EmpiricalMoment {
  double estimate = 0.0;
  double std_error = 0.0;
  double log_estimate = 0.0;
  int n = 0;
  int samples = 0;
  double acceptance_rate = 1.0;
};

// Monte-Carlo mean of the pair product over (sigma, tau) drawn iid from
// pi^n conditioned on the window (rejection). Throws WindowTooTight when
// fewer than 1% of label vectors land in the window.
EmpiricalMoment empirical_second_moment(const BlockModel& model, int n, int samples,
                                        const BalanceWindow& window, std::uint64_t seed,
                                        int threads = 1);

struct ExactTinyMoment {
  // sum_G (sum_{sigma in window} P(G, sigma))^2 / Q(G)
  double graph_enumeration = 0.0;
  // sum_{sigma, tau in window} P(sigma) P(tau) prod_{u<v} E_Q[W W]
  double pair_product = 0.0;
};

ExactTinyMoment exact_tiny_second_moment(const BlockModel& model, int n,
                                         std::optional<BalanceWindow> window = std::nullopt);

// sum_G sum_sigma P(G, sigma); 1 up to rounding.
double exact_tiny_normalization(const BlockModel& model, int n);

// sum over compositions N of n into s^2 cells of
// Multinomial(n, pi (x) pi)(N) 1_window(N) exp(X^T Atilde X), X = (N - n pi(x)pi)/sqrt(n),
// with both marginals of N checked against the window. Allowed for s = 2 with
// n <= 512 and s = 3 with n <= 32; TooLarge otherwise.
double multinomial_exp_moment(const Eigen::VectorXd& pi, const Eigen::MatrixXd& Atilde, int n,
                              const BalanceWindow& window);

}  // namespace sbm
