#pragma once

#include <stdexcept>
#include <string>

namespace liqgame {

enum class ErrorCategory {
  kInvalidArgument,
  kValidation,
  kSingularMatrix,
  kNonFinite,
  kRiccatiBlowUp,
  kBvpUnsolvable,
  kDegenerate,
  kNoConvergence,
  kIo,
};

inline const char* category_name(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::kInvalidArgument: return "invalid_argument";
    case ErrorCategory::kValidation: return "validation";
    case ErrorCategory::kSingularMatrix: return "singular_matrix";
    case ErrorCategory::kNonFinite: return "non_finite";
    case ErrorCategory::kRiccatiBlowUp: return "riccati_blow_up";
    case ErrorCategory::kBvpUnsolvable: return "bvp_unsolvable";
    case ErrorCategory::kDegenerate: return "degenerate";
    case ErrorCategory::kNoConvergence: return "no_convergence";
    case ErrorCategory::kIo: return "io";
  }
  return "unknown";
}

/// Every failure raised by the library carries a category so callers can
/// dispatch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& message)
      : std::runtime_error(message), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

class SingularMatrixError : public Error {
 public:
  SingularMatrixError(const std::string& message, std::size_t pivot_index)
      : Error(ErrorCategory::kSingularMatrix, message), pivot_index_(pivot_index) {}

  std::size_t pivot_index() const noexcept { return pivot_index_; }

 private:
  std::size_t pivot_index_;
};

class NonFiniteError : public Error {
 public:
  NonFiniteError(const std::string& message, std::size_t node)
      : Error(ErrorCategory::kNonFinite, message), node_(node) {}

  std::size_t node() const noexcept { return node_; }

 private:
  std::size_t node_;
};

}  // namespace liqgame
