#include "sbm/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sbm/error.hpp"

namespace sbm {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonSymmetric: return "NonSymmetric";
    case ErrorCode::NegativeEntry: return "NegativeEntry";
    case ErrorCode::BadSimplex: return "BadSimplex";
    case ErrorCode::UnequalDegree: return "UnequalDegree";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::EigenFailure: return "EigenFailure";
    case ErrorCode::BadParametrization: return "BadParametrization";
    case ErrorCode::AtCenter: return "AtCenter";
    case ErrorCode::DegenerateFamily: return "DegenerateFamily";
    case ErrorCode::InfeasibleCoupling: return "InfeasibleCoupling";
    case ErrorCode::ProbabilityOverflow: return "ProbabilityOverflow";
    case ErrorCode::BadDegree: return "BadDegree";
    case ErrorCode::KOutOfRange: return "KOutOfRange";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::ComplexResidual: return "ComplexResidual";
    case ErrorCode::WindowTooTight: return "WindowTooTight";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::NotAPartition: return "NotAPartition";
    case ErrorCode::CombinatorialBlowup: return "CombinatorialBlowup";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

std::string_view to_string(Regime regime) {
  switch (regime) {
    case Regime::Orthogonal: return "ORTHOGONAL";
    case Regime::ContiguousNonReconstructable: return "CONTIGUOUS_NONRECONSTRUCTABLE";
    case Regime::Indeterminate: return "INDETERMINATE";
  }
  return "INDETERMINATE";
}

BlockModel build_model(const Eigen::VectorXd& pi, const Eigen::MatrixXd& M) {
  const Eigen::Index s = pi.size();
  if (s < 2 || s > kMaxClasses) {
    throw Error(ErrorCode::DimensionMismatch, "number of classes must lie in [2, 16]");
  }
  if (M.rows() != s || M.cols() != s) {
    throw Error(ErrorCode::DimensionMismatch, "M must be s x s with s = len(pi)");
  }
  if (!pi.allFinite() || !M.allFinite()) {
    throw Error(ErrorCode::DimensionMismatch, "non-finite entry in pi or M");
  }

  double pi_sum = 0.0;
  for (Eigen::Index i = 0; i < s; ++i) {
    if (!(pi[i] > 0.0)) throw Error(ErrorCode::BadSimplex, "pi entries must be positive");
    pi_sum += pi[i];
  }
  if (std::abs(pi_sum - 1.0) > kStructuralTol) {
    throw Error(ErrorCode::BadSimplex, "pi must sum to 1");
  }

  const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < s; ++i) {
    for (Eigen::Index j = 0; j < s; ++j) {
      if (M(i, j) < 0.0) throw Error(ErrorCode::NegativeEntry, "M has a negative entry");
      if (std::abs(M(i, j) - M(j, i)) > kStructuralTol * scale) {
        throw Error(ErrorCode::NonSymmetric, "M is not symmetric");
      }
    }
  }

  const Eigen::VectorXd degrees = M * pi;
  const double d = degrees.mean();
  if (!(d > 0.0)) throw Error(ErrorCode::UnequalDegree, "expected degree must be positive");
  for (Eigen::Index i = 0; i < s; ++i) {
    if (std::abs(degrees[i] - d) > kStructuralTol * d) {
      std::ostringstream msg;
      msg << "row expected degrees differ (";
      for (Eigen::Index k = 0; k < s; ++k) msg << (k ? ", " : "") << degrees[k];
      msg << ")";
      throw Error(ErrorCode::UnequalDegree, msg.str());
    }
  }
  return BlockModel(pi, M, d);
}

BlockModel two_cluster_model(double p, double a, double d) {
  if (!(p > 0.0 && p < 1.0) || !(d > 0.0) || !std::isfinite(a) || a < 0.0) {
    throw Error(ErrorCode::BadParametrization, "need 0 < p < 1, a >= 0, d > 0");
  }
  const double b = (1.0 - p * a) / (1.0 - p);
  const double c = (1.0 - p * b) / (1.0 - p);
  if (b < -1e-14 || c < -1e-14) {
    throw Error(ErrorCode::BadParametrization, "a exceeds 1/p: off-diagonal rate would be negative");
  }
  Eigen::MatrixXd M(2, 2);
  M << a, std::max(b, 0.0), std::max(b, 0.0), std::max(c, 0.0);
  Eigen::VectorXd pi(2);
  pi << p, 1.0 - p;
  return build_model(pi, d * M);
}

BlockModel erdos_renyi_model(const Eigen::VectorXd& pi, double d) {
  return build_model(pi, Eigen::MatrixXd::Constant(pi.size(), pi.size(), d));
}

namespace {

// Primary sort key is the modulus rounded to 12 significant digits so that
// pairs such as (0.5, -0.5) order by real part instead of rounding noise.
bool eigen_order(const std::complex<double>& x, const std::complex<double>& y) {
  const double mx = std::round(std::abs(x) * 1e12);
  const double my = std::round(std::abs(y) * 1e12);
  if (mx != my) return mx > my;
  if (x.real() != y.real()) return x.real() > y.real();
  return x.imag() > y.imag();
}

}  // namespace

SpectralSummary spectral_summary(const BlockModel& model) {
  const int s = model.s();
  const double d = model.d();
  const Eigen::VectorXd& pi = model.pi();

  SpectralSummary out;
  out.d = d;
  out.T = model.M() * pi.asDiagonal() / d;
  out.A = model.M() - Eigen::MatrixXd::Constant(s, s, d);
  out.B = pi.asDiagonal() * out.A / d;

  // T is similar to S = diag(sqrt pi) M diag(sqrt pi) / d, which is symmetric,
  // so the spectrum is real. Deflating the Perron direction sqrt(pi) leaves
  // {0, lambda_2, ..., lambda_s}; the zero belonging to sqrt(pi) is dropped and
  // lambda_1 = 1 is reinstated exactly.
  const Eigen::VectorXd root = pi.cwiseSqrt();
  Eigen::MatrixXd S = root.asDiagonal() * model.M() * root.asDiagonal() / d;
  S = 0.5 * (S + S.transpose());
  const Eigen::MatrixXd deflated = S - root * root.transpose();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(deflated);
  if (solver.info() != Eigen::Success) {
    const double residual =
        (deflated * solver.eigenvectors() - solver.eigenvectors() * solver.eigenvalues().asDiagonal())
            .cwiseAbs()
            .maxCoeff();
    throw Error(ErrorCode::EigenFailure,
                "symmetric eigen-solver did not converge, residual " + std::to_string(residual));
  }

  Eigen::Index perron = 0;
  double best_alignment = -1.0;
  for (Eigen::Index k = 0; k < s; ++k) {
    const double alignment = std::abs(solver.eigenvectors().col(k).dot(root));
    if (alignment > best_alignment) {
      best_alignment = alignment;
      perron = k;
    }
  }

  std::vector<std::complex<double>> rest;
  for (Eigen::Index k = 0; k < s; ++k) {
    if (k != perron) rest.emplace_back(solver.eigenvalues()[k], 0.0);
  }
  std::sort(rest.begin(), rest.end(), eigen_order);
  out.eigenvalues.reserve(s);
  out.eigenvalues.emplace_back(1.0, 0.0);
  out.eigenvalues.insert(out.eigenvalues.end(), rest.begin(), rest.end());
  out.ks_gap = d * std::norm(out.lambda2());
  return out;
}

Regime classify_regime(const SpectralSummary& spectrum, double q_value) {
  if (spectrum.ks_gap > 1.0) return Regime::Orthogonal;
  if (q_value < 1.0) return Regime::ContiguousNonReconstructable;
  return Regime::Indeterminate;
}

Regime classify_regime(const BlockModel& model, double q_value) {
  return classify_regime(spectral_summary(model), q_value);
}

}  // namespace sbm
