#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace mabvp {

enum class ErrorCode {
  kInvalidSpec,
  kAmbiguousNormal,
  kNormalizationFailure,
  kSingularMap,
  kNonConvergence,
  kDegenerateConfiguration,
  kHeightTooLarge,
  kCentringFailure,
  kDegenerateSection,
  kInsufficientData,
  kConstructionError,
  kIncompatibleReport,
  kInvalidConfig,
};

const char* to_string(ErrorCode code);

/// Base exception for everything the library throws. `code()` is stable and
/// is what the CLI maps to exit codes and report failure entries.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Raised by iterative solvers; carries the residual history so callers can
/// log or serialize where the iteration stalled.
class NonConvergence : public Error {
 public:
  NonConvergence(const std::string& message, std::vector<double> history)
      : Error(ErrorCode::kNonConvergence, message), history_(std::move(history)) {}

  const std::vector<double>& residual_history() const noexcept { return history_; }

 private:
  std::vector<double> history_;
};

}  // namespace mabvp
