#include "rdpg/error.hpp"

namespace rdpg {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidDistribution: return "InvalidDistribution";
    case ErrorCode::NotPSD: return "NotPSD";
    case ErrorCode::ProbabilityOutOfRange: return "ProbabilityOutOfRange";
    case ErrorCode::ZeroExpectedDegree: return "ZeroExpectedDegree";
    case ErrorCode::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorCode::NonPositiveEigenvalue: return "NonPositiveEigenvalue";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::DomainViolation: return "DomainViolation";
    case ErrorCode::InfeasibleConstraintSet: return "InfeasibleConstraintSet";
    case ErrorCode::MaxIterationsExceeded: return "MaxIterationsExceeded";
    case ErrorCode::IsolatedOOSVertex: return "IsolatedOOSVertex";
    case ErrorCode::ZeroDegreeNeighbor: return "ZeroDegreeNeighbor";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NonpositiveMeanInnerProduct: return "NonpositiveMeanInnerProduct";
    case ErrorCode::FullRankViolation: return "FullRankViolation";
    case ErrorCode::EtaViolation: return "EtaViolation";
    case ErrorCode::NoRootInBracket: return "NoRootInBracket";
    case ErrorCode::InsufficientGrid: return "InsufficientGrid";
    case ErrorCode::InsufficientRecords: return "InsufficientRecords";
    case ErrorCode::SingularCovariance: return "SingularCovariance";
    case ErrorCode::MethodMismatch: return "MethodMismatch";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "UnknownError";
}

}  // namespace rdpg
