#include "vqar/error.hpp"

namespace vqar {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidDimension: return "invalid-dimension";
    case ErrorCode::InvalidCount: return "invalid-count";
    case ErrorCode::InvalidArgument: return "invalid-argument";
    case ErrorCode::InsufficientPoints: return "insufficient-points";
    case ErrorCode::EmptySupport: return "empty-support";
    case ErrorCode::OddLength: return "odd-length";
    case ErrorCode::InfeasibleMarginals: return "infeasible-marginals";
    case ErrorCode::NonfiniteInput: return "nonfinite-input";
    case ErrorCode::DegenerateRow: return "degenerate-row";
    case ErrorCode::DimensionUnsupported: return "dimension-unsupported";
    case ErrorCode::TauOutOfRange: return "tau-out-of-range";
    case ErrorCode::InsufficientData: return "insufficient-data";
    case ErrorCode::GridMismatch: return "grid-mismatch";
    case ErrorCode::DegenerateScale: return "degenerate-scale";
    case ErrorCode::SizeExceeded: return "size-exceeded";
    case ErrorCode::SolverFailure: return "solver-failure";
    case ErrorCode::IoError: return "io-error";
    case ErrorCode::ParseError: return "parse-error";
  }
  return "unknown";
}

}  // namespace vqar
