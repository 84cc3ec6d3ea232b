#include "sinkhorn_lqg/error.hpp"

namespace sinkhorn_lqg {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotPsd: return "NotPsd";
    case ErrorCode::kNotPd: return "NotPd";
    case ErrorCode::kDimMismatch: return "DimMismatch";
    case ErrorCode::kAsymmetric: return "Asymmetric";
    case ErrorCode::kNotCausal: return "NotCausal";
    case ErrorCode::kNoConvergence: return "NoConvergence";
    case ErrorCode::kBracketFailure: return "BracketFailure";
    case ErrorCode::kSingularInnerSystem: return "SingularInnerSystem";
    case ErrorCode::kInfeasible: return "Infeasible";
    case ErrorCode::kInvalidInput: return "InvalidInput";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

}  // namespace sinkhorn_lqg
