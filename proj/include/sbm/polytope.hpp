#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "sbm/model.hpp"

namespace sbm {

// A joint distribution on [s]^2 whose row and column marginals are both pi.
struct Coupling {
  Eigen::MatrixXd alpha;
  Eigen::VectorXd pi;
};

// Validates marginals (1e-12) and nonnegativity; throws InfeasibleCoupling.
Coupling make_coupling(const Eigen::MatrixXd& alpha, const Eigen::VectorXd& pi);

// The product coupling pi (x) pi.
Coupling product_coupling(const Eigen::VectorXd& pi);

// Kullback-Leibler divergence sum_i p_i log(p_i / q_i) in nats, with
// 0 log(0/q) = 0. Returns +inf when p_i > 0 = q_i.
double kl_divergence(std::span<const double> p, std::span<const double> q);
double kl_divergence(const Eigen::MatrixXd& p, const Eigen::MatrixXd& q);

// A / sqrt(2d): the matrix whose Q-value decides contiguity.
Eigen::MatrixXd scaled_interaction(const BlockModel& model);

// (alpha - p)^T (K (x) K) (alpha - p) / D(alpha, p) with p = pi (x) pi.
// Throws AtCenter when alpha is within 1e-12 of p.
double quadratic_ratio(const Coupling& alpha, const Eigen::MatrixXd& K);

// quadratic_ratio with K = A / sqrt(2d).
double q_ratio(const Coupling& alpha, const BlockModel& model);

// Supremum of the ratio's limit along directions alpha -> p: the largest
// generalized eigenvalue of the numerator Hessian against the KL Hessian
// diag(1/p), restricted to the marginal-preserving tangent space.
double local_limit(const Eigen::VectorXd& pi, const Eigen::MatrixXd& K);

struct OptimizerSettings {
  int starts = 64;
  int max_iterations = 500;
  double gradient_tol = 1e-8;
  double excision_radius = 1e-6;
  std::uint64_t seed = 0x5eed;
  int threads = 1;
};

struct QResult {
  double q = 0.0;
  Coupling argmax;
  double local_limit = 0.0;
  int starts_used = 0;
  double max_gradient_residual = 0.0;
  // Set when the best start hit max_iterations with residual above tolerance.
  bool stalled = false;
};

QResult q_value(const Eigen::VectorXd& pi, const Eigen::MatrixXd& K,
                const OptimizerSettings& settings = {});
QResult q_value(const BlockModel& model, const OptimizerSettings& settings = {});

struct ThresholdPoint {
  double p = 0.0;
  double threshold = 0.0;
};

// For each p, builds two_cluster_model(p, a, 1) and reports ks_gap / q, the
// critical value of d lambda_2^2 for that class balance. Throws
// DegenerateFamily when lambda_2 vanishes.
std::vector<ThresholdPoint> threshold_curve(std::span<const double> p_grid, double a,
                                            const OptimizerSettings& settings = {});

// Vertices of the coupling polytope reached by the north-west corner rule
// under row/column orderings. Exposed for grid oracles in tests.
std::vector<Eigen::MatrixXd> polytope_vertices(const Eigen::VectorXd& pi, int max_count,
                                               std::uint64_t seed);

}  // namespace sbm
