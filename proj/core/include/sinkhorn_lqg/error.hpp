#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sinkhorn_lqg {

enum class ErrorCode {
  kNotPsd,
  kNotPd,
  kDimMismatch,
  kAsymmetric,
  kNotCausal,
  kNoConvergence,
  kBracketFailure,
  kSingularInnerSystem,
  kInfeasible,
  kInvalidInput,
};

std::string_view to_string(ErrorCode code);

/// Exception carrying a machine-readable error kind. Every failure raised by
/// the core library is an `Error`.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace sinkhorn_lqg
