#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace rdpg {

enum class ErrorCode {
  InvalidDistribution,
  NotPSD,
  ProbabilityOutOfRange,
  ZeroExpectedDegree,
  ConvergenceFailure,
  NonPositiveEigenvalue,
  RankDeficient,
  DomainViolation,
  InfeasibleConstraintSet,
  MaxIterationsExceeded,
  IsolatedOOSVertex,
  ZeroDegreeNeighbor,
  ShapeMismatch,
  NonpositiveMeanInnerProduct,
  FullRankViolation,
  EtaViolation,
  NoRootInBracket,
  InsufficientGrid,
  InsufficientRecords,
  SingularCovariance,
  MethodMismatch,
  ParseError,
};

const char* to_string(ErrorCode code);

/// Domain error carrying a machine-checkable code. Some throw sites attach a
/// numeric payload (e.g. the best iterate when an optimizer runs out of
/// iterations) so callers can still make use of partial results.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  Error(ErrorCode code, const std::string& message, std::vector<double> payload)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code),
        payload_(std::move(payload)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::vector<double>& payload() const noexcept { return payload_; }

 private:
  ErrorCode code_;
  std::vector<double> payload_;
};

}  // namespace rdpg
