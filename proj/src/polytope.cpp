#include "sbm/polytope.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "sbm/error.hpp"
#include "sbm/parallel.hpp"
#include "sbm/rng.hpp"

namespace sbm {

namespace {

constexpr double kMarginalTol = 1e-12;
constexpr double kActiveCell = 1e-12;

double xlogx_over(double a, double b) {
  if (a <= 0.0) return 0.0;
  if (b <= 0.0) return std::numeric_limits<double>::infinity();
  return a * std::log(a / b);
}

Eigen::MatrixXd kron(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y) {
  Eigen::MatrixXd out(X.rows() * Y.rows(), X.cols() * Y.cols());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    for (Eigen::Index k = 0; k < X.cols(); ++k) {
      out.block(i * Y.rows(), k * Y.cols(), Y.rows(), Y.cols()) = X(i, k) * Y;
    }
  }
  return out;
}

// Columns span the marginal-preserving directions: column (a, b) with
// a, b < s-1 moves mass +1 at (a,b) and (s-1,s-1), -1 at (a,s-1) and (s-1,b).
// Rows index cells in row-major order i*s + j.
Eigen::MatrixXd tangent_basis(int s) {
  const int m = (s - 1) * (s - 1);
  Eigen::MatrixXd U = Eigen::MatrixXd::Zero(s * s, m);
  for (int a = 0; a < s - 1; ++a) {
    for (int b = 0; b < s - 1; ++b) {
      const int col = a * (s - 1) + b;
      U(a * s + b, col) = 1.0;
      U(a * s + (s - 1), col) = -1.0;
      U((s - 1) * s + b, col) = -1.0;
      U((s - 1) * s + (s - 1), col) = 1.0;
    }
  }
  return U;
}

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& K) { return 0.5 * (K + K.transpose()); }

double quadratic_form(const Eigen::MatrixXd& delta, const Eigen::MatrixXd& K) {
  return delta.cwiseProduct(K * delta * K).sum();
}

// Ratio maximization over the coupling polytope in the (s-1)^2 free
// coordinates of the top-left block.
class RatioProblem {
 public:
  RatioProblem(Eigen::VectorXd pi, Eigen::MatrixXd K, double excision)
      : s_(static_cast<int>(pi.size())),
        pi_(std::move(pi)),
        K_(symmetrized(K)),
        p_(pi_ * pi_.transpose()),
        U_(tangent_basis(s_)),
        excision_(excision) {}

  int s() const { return s_; }
  int dim() const { return (s_ - 1) * (s_ - 1); }
  const Eigen::MatrixXd& product() const { return p_; }

  Eigen::MatrixXd fill(const Eigen::VectorXd& x) const {
    const int s = s_;
    Eigen::MatrixXd alpha(s, s);
    for (int a = 0; a < s - 1; ++a) {
      double row = 0.0;
      for (int b = 0; b < s - 1; ++b) {
        alpha(a, b) = x[a * (s - 1) + b];
        row += alpha(a, b);
      }
      alpha(a, s - 1) = pi_[a] - row;
    }
    double last_col = 0.0;
    for (int b = 0; b < s - 1; ++b) {
      double col = 0.0;
      for (int a = 0; a < s - 1; ++a) col += alpha(a, b);
      alpha(s - 1, b) = pi_[b] - col;
    }
    for (int a = 0; a < s - 1; ++a) last_col += alpha(a, s - 1);
    alpha(s - 1, s - 1) = pi_[s - 1] - last_col;
    return alpha;
  }

  Eigen::VectorXd coordinates(const Eigen::MatrixXd& alpha) const {
    Eigen::VectorXd x(dim());
    for (int a = 0; a < s_ - 1; ++a) {
      for (int b = 0; b < s_ - 1; ++b) x[a * (s_ - 1) + b] = alpha(a, b);
    }
    return x;
  }

  bool excised(const Eigen::MatrixXd& alpha) const { return (alpha - p_).norm() < excision_; }

  double ratio(const Eigen::MatrixXd& alpha) const {
    const Eigen::MatrixXd delta = alpha - p_;
    const double kl = kl_divergence(alpha.cwiseMax(0.0), p_);
    return quadratic_form(delta, K_) / kl;
  }

  // Gradient of the ratio with respect to x.
  Eigen::VectorXd gradient(const Eigen::MatrixXd& alpha) const {
    const Eigen::MatrixXd delta = alpha - p_;
    const Eigen::MatrixXd kdk = K_ * delta * K_;
    const double num = delta.cwiseProduct(kdk).sum();
    const double den = kl_divergence(alpha.cwiseMax(0.0), p_);
    Eigen::MatrixXd grad_den(s_, s_);
    for (int i = 0; i < s_; ++i) {
      for (int j = 0; j < s_; ++j) {
        grad_den(i, j) = std::log(std::max(alpha(i, j), 1e-300) / p_(i, j)) + 1.0;
      }
    }
    const Eigen::MatrixXd g = (2.0 * kdk * den - num * grad_den) / (den * den);
    Eigen::VectorXd gv(s_ * s_);
    for (int i = 0; i < s_; ++i) {
      for (int j = 0; j < s_; ++j) gv[i * s_ + j] = g(i, j);
    }
    return U_.transpose() * gv;
  }

  // Projects g onto directions that keep active (zero) cells nonnegative.
  Eigen::VectorXd project(const Eigen::VectorXd& g, const Eigen::MatrixXd& alpha) const {
    std::vector<int> active;
    std::vector<bool> is_candidate(s_ * s_, false);
    for (int c = 0; c < s_ * s_; ++c) {
      is_candidate[c] = alpha(c / s_, c % s_) <= kActiveCell;
    }
    Eigen::VectorXd dir = g;
    for (int round = 0; round <= s_ * s_; ++round) {
      const Eigen::VectorXd cell_move = U_ * dir;
      bool added = false;
      for (int c = 0; c < s_ * s_; ++c) {
        if (is_candidate[c] && cell_move[c] < -1e-15 &&
            std::find(active.begin(), active.end(), c) == active.end()) {
          active.push_back(c);
          added = true;
        }
      }
      if (!added) break;
      Eigen::MatrixXd C(active.size(), dim());
      for (std::size_t r = 0; r < active.size(); ++r) C.row(r) = U_.row(active[r]);
      const Eigen::MatrixXd gram = C * C.transpose();
      const Eigen::VectorXd mult = gram.completeOrthogonalDecomposition().solve(C * g);
      dir = g - C.transpose() * mult;
    }
    return dir;
  }

  // Largest feasible step along dir before a cell reaches zero.
  double max_step(const Eigen::MatrixXd& alpha, const Eigen::VectorXd& dir) const {
    const Eigen::VectorXd cell_move = U_ * dir;
    double t = std::numeric_limits<double>::infinity();
    for (int c = 0; c < s_ * s_; ++c) {
      if (cell_move[c] < -1e-15) {
        t = std::min(t, std::max(alpha(c / s_, c % s_), 0.0) / -cell_move[c]);
      }
    }
    return t;
  }

 private:
  int s_;
  Eigen::VectorXd pi_;
  Eigen::MatrixXd K_;
  Eigen::MatrixXd p_;
  Eigen::MatrixXd U_;
  double excision_;
};

struct StartResult {
  double value = -std::numeric_limits<double>::infinity();
  Eigen::MatrixXd alpha;
  double residual = 0.0;
  bool stalled = false;
};

bool has_active_cell(const Eigen::MatrixXd& alpha) {
  return (alpha.array() <= kActiveCell).any();
}

// Projected ascent with a BFGS metric in the interior; the metric resets to
// the identity whenever a cell sits on the boundary or the scaled direction
// stops being an ascent direction.
StartResult ascend(const RatioProblem& problem, const Eigen::MatrixXd& start,
                   const OptimizerSettings& settings) {
  StartResult out;
  const int m = problem.dim();
  Eigen::VectorXd x = problem.coordinates(start);
  Eigen::MatrixXd alpha = problem.fill(x);
  if (problem.excised(alpha)) return out;
  double value = problem.ratio(alpha);
  Eigen::VectorXd g = problem.gradient(alpha);
  Eigen::MatrixXd H = Eigen::MatrixXd::Identity(m, m);
  bool fresh_metric = true;
  double residual = std::numeric_limits<double>::infinity();
  int it = 0;
  for (; it < settings.max_iterations; ++it) {
    const Eigen::VectorXd pg = problem.project(g, alpha);
    residual = pg.norm();
    if (!(residual >= settings.gradient_tol)) break;
    Eigen::VectorXd dir = H * g;
    if (has_active_cell(alpha) || g.dot(dir) <= 1e-12 * g.norm() * dir.norm()) {
      dir = pg;
      H.setIdentity();
      fresh_metric = true;
    }
    const double t_max = problem.max_step(alpha, dir);
    double t = std::min(1.0, 0.1 / dir.norm());
    if (std::isfinite(t_max)) t = std::min(t, has_active_cell(alpha) ? t_max : 0.99 * t_max);
    const double slope = g.dot(dir);
    bool moved = false;
    while (t * dir.norm() > 1e-16) {
      const Eigen::VectorXd x_new = x + t * dir;
      const Eigen::MatrixXd alpha_new = problem.fill(x_new);
      if (!problem.excised(alpha_new)) {
        const double v = problem.ratio(alpha_new);
        if (v >= value + 1e-4 * t * slope) {
          const Eigen::VectorXd g_new = problem.gradient(alpha_new);
          const Eigen::VectorXd step = x_new - x;
          const Eigen::VectorXd y = g - g_new;
          const double ys = y.dot(step);
          if (ys > 1e-12 * y.norm() * step.norm()) {
            if (fresh_metric) {
              H *= ys / y.squaredNorm();
              fresh_metric = false;
            }
            const double rho = 1.0 / ys;
            const Eigen::MatrixXd V = Eigen::MatrixXd::Identity(m, m) - rho * y * step.transpose();
            H = V.transpose() * H * V + rho * step * step.transpose();
          }
          x = x_new;
          alpha = alpha_new;
          value = v;
          g = g_new;
          moved = true;
          break;
        }
      }
      t *= 0.5;
    }
    if (!moved) {
      if (fresh_metric) break;
      H.setIdentity();
      fresh_metric = true;
    }
  }
  out.value = value;
  out.alpha = alpha.cwiseMax(0.0);
  out.residual = std::isfinite(residual) ? residual : 0.0;
  out.stalled = it >= settings.max_iterations && residual >= settings.gradient_tol;
  return out;
}

bool lexicographically_less(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double x = a(i / a.cols(), i % a.cols());
    const double y = b(i / b.cols(), i % b.cols());
    if (x != y) return x < y;
  }
  return false;
}

Eigen::MatrixXd northwest_corner(const Eigen::VectorXd& pi, const std::vector<int>& rows,
                                 const std::vector<int>& cols) {
  const int s = static_cast<int>(pi.size());
  Eigen::MatrixXd alpha = Eigen::MatrixXd::Zero(s, s);
  Eigen::VectorXd supply = pi;
  Eigen::VectorXd demand = pi;
  int r = 0;
  int c = 0;
  while (r < s && c < s) {
    const int i = rows[r];
    const int j = cols[c];
    const double mass = std::min(supply[i], demand[j]);
    alpha(i, j) = mass;
    supply[i] -= mass;
    demand[j] -= mass;
    if (supply[i] <= demand[j]) {
      ++r;
    } else {
      ++c;
    }
  }
  return alpha;
}

// The golden-section path for two classes: the polytope is the segment
// alpha = p + t [[1,-1],[-1,1]].
QResult q_value_two_classes(const Eigen::VectorXd& pi, const Eigen::MatrixXd& K,
                            const OptimizerSettings& settings) {
  const Eigen::MatrixXd p = pi * pi.transpose();
  Eigen::MatrixXd v(2, 2);
  v << 1, -1, -1, 1;
  const Eigen::MatrixXd Ks = symmetrized(K);
  const double curvature = quadratic_form(v, Ks);
  const double t_lo = -std::min(p(0, 0), p(1, 1));
  const double t_hi = std::min(p(0, 1), p(1, 0));
  const double t_min = 0.5 * settings.excision_radius;

  auto ratio = [&](double t) { return t * t * curvature / kl_divergence((p + t * v).eval(), p); };

  double best_t = 0.0;
  double best = -std::numeric_limits<double>::infinity();
  constexpr int kGrid = 4000;
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  for (const auto& [lo, hi] : {std::pair{t_lo, -t_min}, std::pair{t_min, t_hi}}) {
    if (!(hi > lo)) continue;
    const double h = (hi - lo) / kGrid;
    int arg = 0;
    double side_best = -std::numeric_limits<double>::infinity();
    for (int k = 0; k <= kGrid; ++k) {
      const double val = ratio(lo + k * h);
      if (val > side_best) {
        side_best = val;
        arg = k;
      }
    }
    double a = lo + std::max(arg - 1, 0) * h;
    double b = lo + std::min(arg + 1, kGrid) * h;
    double x1 = b - phi * (b - a);
    double x2 = a + phi * (b - a);
    double f1 = ratio(x1);
    double f2 = ratio(x2);
    for (int it = 0; it < 200 && (b - a) > 1e-15 * std::max(1.0, std::abs(a)); ++it) {
      if (f1 >= f2) {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - phi * (b - a);
        f1 = ratio(x1);
      } else {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + phi * (b - a);
        f2 = ratio(x2);
      }
    }
    for (const auto& [t, f] : {std::pair{lo + arg * h, side_best}, std::pair{x1, f1}, std::pair{x2, f2}}) {
      if (f > best || (f == best && t < best_t)) {
        best = f;
        best_t = t;
      }
    }
  }

  QResult out;
  out.local_limit = local_limit(pi, K);
  out.argmax = Coupling{p + best_t * v, pi};
  out.starts_used = 2;
  // Derivative of the ratio along the segment, scaled by the segment length.
  const Eigen::MatrixXd alpha = p + best_t * v;
  const double kl = kl_divergence(alpha, p);
  double kl_slope = 0.0;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) kl_slope += v(i, j) * std::log(alpha(i, j) / p(i, j));
  }
  const double slope =
      (2.0 * best_t * curvature * kl - best_t * best_t * curvature * kl_slope) / (kl * kl);
  out.max_gradient_residual = std::abs(slope) * (t_hi - t_lo);
  out.stalled = false;
  out.q = std::max(best, out.local_limit);
  return out;
}

}  // namespace

Coupling make_coupling(const Eigen::MatrixXd& alpha, const Eigen::VectorXd& pi) {
  const Eigen::Index s = pi.size();
  if (alpha.rows() != s || alpha.cols() != s) {
    throw Error(ErrorCode::DimensionMismatch, "coupling must be s x s");
  }
  if ((alpha.array() < 0.0).any()) {
    throw Error(ErrorCode::InfeasibleCoupling, "negative coupling entry");
  }
  const Eigen::VectorXd rows = alpha.rowwise().sum();
  const Eigen::VectorXd cols = alpha.colwise().sum().transpose();
  if ((rows - pi).cwiseAbs().maxCoeff() > kMarginalTol ||
      (cols - pi).cwiseAbs().maxCoeff() > kMarginalTol) {
    throw Error(ErrorCode::InfeasibleCoupling, "marginals differ from pi");
  }
  return Coupling{alpha, pi};
}

Coupling product_coupling(const Eigen::VectorXd& pi) { return Coupling{pi * pi.transpose(), pi}; }

double kl_divergence(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw Error(ErrorCode::DimensionMismatch, "p and q differ in length");
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) total += xlogx_over(p[i], q[i]);
  return std::max(total, 0.0);
}

double kl_divergence(const Eigen::MatrixXd& p, const Eigen::MatrixXd& q) {
  if (p.rows() != q.rows() || p.cols() != q.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "p and q differ in shape");
  }
  return kl_divergence(std::span<const double>(p.data(), p.size()),
                       std::span<const double>(q.data(), q.size()));
}

Eigen::MatrixXd scaled_interaction(const BlockModel& model) {
  const int s = model.s();
  const Eigen::MatrixXd A = model.M() - Eigen::MatrixXd::Constant(s, s, model.d());
  return A / std::sqrt(2.0 * model.d());
}

double quadratic_ratio(const Coupling& alpha, const Eigen::MatrixXd& K) {
  const Eigen::MatrixXd p = alpha.pi * alpha.pi.transpose();
  const Eigen::MatrixXd delta = alpha.alpha - p;
  if (delta.cwiseAbs().maxCoeff() <= 1e-12) {
    throw Error(ErrorCode::AtCenter, "ratio is 0/0 at the product coupling; use local_limit");
  }
  return quadratic_form(delta, symmetrized(K)) / kl_divergence(alpha.alpha, p);
}

double q_ratio(const Coupling& alpha, const BlockModel& model) {
  return quadratic_ratio(alpha, scaled_interaction(model));
}

double local_limit(const Eigen::VectorXd& pi, const Eigen::MatrixXd& K) {
  const int s = static_cast<int>(pi.size());
  const Eigen::MatrixXd U = tangent_basis(s);
  const Eigen::MatrixXd Ks = symmetrized(K);
  const Eigen::MatrixXd num_hessian = 2.0 * kron(Ks, Ks);
  Eigen::VectorXd inv_p(s * s);
  for (int i = 0; i < s; ++i) {
    for (int j = 0; j < s; ++j) inv_p[i * s + j] = 1.0 / (pi[i] * pi[j]);
  }
  const Eigen::MatrixXd N = U.transpose() * num_hessian * U;
  const Eigen::MatrixXd D = U.transpose() * inv_p.asDiagonal() * U;
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(0.5 * (N + N.transpose()),
                                                                   0.5 * (D + D.transpose()));
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::EigenFailure, "generalized eigenproblem for the local limit failed");
  }
  return solver.eigenvalues().maxCoeff();
}

std::vector<Eigen::MatrixXd> polytope_vertices(const Eigen::VectorXd& pi, int max_count,
                                               std::uint64_t seed) {
  const int s = static_cast<int>(pi.size());
  std::vector<Eigen::MatrixXd> out;
  auto push_unique = [&](Eigen::MatrixXd v) {
    for (const auto& w : out) {
      if ((w - v).cwiseAbs().maxCoeff() < 1e-14) return;
    }
    out.push_back(std::move(v));
  };
  std::vector<int> rows(s);
  std::vector<int> cols(s);
  std::iota(rows.begin(), rows.end(), 0);
  if (s <= 4) {
    do {
      std::iota(cols.begin(), cols.end(), 0);
      do {
        push_unique(northwest_corner(pi, rows, cols));
        if (static_cast<int>(out.size()) >= max_count) return out;
      } while (std::next_permutation(cols.begin(), cols.end()));
    } while (std::next_permutation(rows.begin(), rows.end()));
    return out;
  }
  Rng rng(derive_stream(seed, "polytope-vertices"));
  for (int attempt = 0; attempt < 8 * max_count && static_cast<int>(out.size()) < max_count; ++attempt) {
    std::iota(rows.begin(), rows.end(), 0);
    std::iota(cols.begin(), cols.end(), 0);
    shuffle(std::span<int>(rows), rng);
    shuffle(std::span<int>(cols), rng);
    push_unique(northwest_corner(pi, rows, cols));
  }
  return out;
}

QResult q_value(const Eigen::VectorXd& pi, const Eigen::MatrixXd& K, const OptimizerSettings& settings) {
  const int s = static_cast<int>(pi.size());
  if (s < 2 || s > kMaxClasses || K.rows() != s || K.cols() != s) {
    throw Error(ErrorCode::DimensionMismatch, "K must be s x s with 2 <= s <= 16");
  }
  if (K.cwiseAbs().maxCoeff() == 0.0) {
    QResult out;
    const Eigen::MatrixXd vertex = polytope_vertices(pi, 1, settings.seed).front();
    out.argmax = Coupling{vertex, pi};
    out.starts_used = 0;
    return out;
  }
  if (s == 2) return q_value_two_classes(pi, K, settings);

  const RatioProblem problem(pi, K, settings.excision_radius);
  const Eigen::MatrixXd& p = problem.product();

  const int total = std::max(1, settings.starts);
  std::vector<Eigen::MatrixXd> vertices = polytope_vertices(pi, 4 * total, settings.seed);
  std::vector<Eigen::MatrixXd> starts;
  for (int k = 0; k < std::min<int>(total / 2, static_cast<int>(vertices.size())); ++k) {
    starts.push_back(vertices[k]);
  }
  Rng rng(derive_stream(settings.seed, "q-value-starts"));
  while (static_cast<int>(starts.size()) < total) {
    std::vector<double> weights(vertices.size());
    double sum = 0.0;
    for (auto& w : weights) sum += (w = rng.exponential());
    Eigen::MatrixXd mix = Eigen::MatrixXd::Zero(s, s);
    for (std::size_t k = 0; k < vertices.size(); ++k) mix += (weights[k] / sum) * vertices[k];
    const double radius = 0.02 + 0.98 * rng.uniform();
    starts.push_back(p + radius * (mix - p));
  }

  std::vector<StartResult> results(starts.size());
  parallel_for(starts.size(), settings.threads,
               [&](std::size_t i) { results[i] = ascend(problem, starts[i], settings); });

  QResult out;
  out.local_limit = local_limit(pi, K);
  out.starts_used = static_cast<int>(starts.size());
  const StartResult* best = nullptr;
  for (const auto& r : results) {
    if (r.alpha.size() == 0) continue;
    if (best == nullptr || r.value > best->value ||
        (r.value == best->value && lexicographically_less(r.alpha, best->alpha))) {
      best = &r;
    }
  }
  if (best == nullptr) {
    out.argmax = Coupling{vertices.front(), pi};
    out.q = out.local_limit;
    return out;
  }
  out.argmax = Coupling{best->alpha, pi};
  out.max_gradient_residual = best->residual;
  // Ascents that drift toward p approach the local limit, which already
  // bounds q from below; only an interior maximizer can stall meaningfully.
  out.stalled = best->stalled && best->value > out.local_limit;
  out.q = std::max(best->value, out.local_limit);
  return out;
}

QResult q_value(const BlockModel& model, const OptimizerSettings& settings) {
  return q_value(model.pi(), scaled_interaction(model), settings);
}

std::vector<ThresholdPoint> threshold_curve(std::span<const double> p_grid, double a,
                                            const OptimizerSettings& settings) {
  std::vector<ThresholdPoint> out;
  out.reserve(p_grid.size());
  for (double p : p_grid) {
    const BlockModel model = two_cluster_model(p, a, 1.0);
    const SpectralSummary spectrum = spectral_summary(model);
    if (std::abs(spectrum.lambda2()) < 1e-12) {
      throw Error(ErrorCode::DegenerateFamily, "lambda_2 vanishes at p = " + std::to_string(p));
    }
    const QResult q = q_value(model, settings);
    out.push_back({p, spectrum.ks_gap / q.q});
  }
  return out;
}

}  // namespace sbm
