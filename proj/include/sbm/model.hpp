#pragma once

#include <complex>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace sbm {

inline constexpr int kMaxClasses = 16;
inline constexpr double kStructuralTol = 1e-10;
inline constexpr double kSpectralTol = 1e-8;

// Parameters (pi, M) of a sparse stochastic block model. Vertices draw a
// class from pi and pair (u, v) becomes an edge with probability
// M(sigma_u, sigma_v) / n. Only constructible through build_model(), so every
// instance satisfies the equal-expected-degree condition.
class BlockModel {
 public:
  int s() const { return static_cast<int>(pi_.size()); }
  const Eigen::VectorXd& pi() const { return pi_; }
  const Eigen::MatrixXd& M() const { return M_; }
  // Expected degree sum_j M_ij pi_j (identical for every row i).
  double d() const { return d_; }

 private:
  friend BlockModel build_model(const Eigen::VectorXd& pi, const Eigen::MatrixXd& M);
  BlockModel(Eigen::VectorXd pi, Eigen::MatrixXd M, double d)
      : pi_(std::move(pi)), M_(std::move(M)), d_(d) {}

  Eigen::VectorXd pi_;
  Eigen::MatrixXd M_;
  double d_;
};

// Validates and returns a model. Throws Error with NonSymmetric,
// NegativeEntry, BadSimplex, UnequalDegree or DimensionMismatch.
BlockModel build_model(const Eigen::VectorXd& pi, const Eigen::MatrixXd& M);

// The two-class family pi = (p, 1-p), M = d * [[a, b], [b, c]] with
// pa + (1-p)b = pb + (1-p)c = 1, so that lambda_2 = (a-1)p/(1-p).
BlockModel two_cluster_model(double p, double a, double d);

// M = d 11^T: the planted model coincides with Erdos-Renyi G(n, d/n).
BlockModel erdos_renyi_model(const Eigen::VectorXd& pi, double d);

struct SpectralSummary {
  double d = 0.0;
  // T_ij = M_ij pi_j / d, row-stochastic with left Perron vector pi.
  Eigen::MatrixXd T;
  // A = M - d 11^T.
  Eigen::MatrixXd A;
  // B = (1/d) diag(pi) A.
  Eigen::MatrixXd B;
  // Sorted by decreasing modulus, ties by real then imaginary part;
  // eigenvalues[0] is the Perron eigenvalue 1.
  std::vector<std::complex<double>> eigenvalues;
  // d |lambda_2|^2.
  double ks_gap = 0.0;

  std::complex<double> lambda2() const { return eigenvalues.size() > 1 ? eigenvalues[1] : 0.0; }
};

SpectralSummary spectral_summary(const BlockModel& model);

enum class Regime {
  Orthogonal,
  ContiguousNonReconstructable,
  Indeterminate,
};

std::string_view to_string(Regime regime);

// ks_gap > 1 -> Orthogonal; q < 1 -> ContiguousNonReconstructable; otherwise
// Indeterminate. `q_value` must be Q(pi, A / sqrt(2d)) for the same model.
Regime classify_regime(const SpectralSummary& spectrum, double q_value);
Regime classify_regime(const BlockModel& model, double q_value);

}  // namespace sbm
