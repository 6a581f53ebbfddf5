#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sbm {

enum class ErrorCode {
  NonSymmetric,
  NegativeEntry,
  BadSimplex,
  UnequalDegree,
  DimensionMismatch,
  EigenFailure,
  BadParametrization,
  AtCenter,
  DegenerateFamily,
  InfeasibleCoupling,
  ProbabilityOverflow,
  BadDegree,
  KOutOfRange,
  DomainError,
  ComplexResidual,
  WindowTooTight,
  TooLarge,
  LengthMismatch,
  NotAPartition,
  CombinatorialBlowup,
  ConfigError,
  IoError,
};

std::string_view to_string(ErrorCode code);

// All library failures surface as this exception; `code()` identifies the
// contract violation so callers and tests can branch on it.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace sbm
