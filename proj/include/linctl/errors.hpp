#pragma once

#include <stdexcept>
#include <string>

namespace linctl {

/// Broad failure classes. The CLI maps these onto exit codes.
enum class ErrorCategory {
  kInput,         // malformed input or dimension mismatch
  kPrecondition,  // mathematically inapplicable request
  kNumerical,     // the computation itself broke down
};

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  Error(std::string name, ErrorCategory category, const std::string& message)
      : std::runtime_error(message), name_(std::move(name)), category_(category) {}

  const std::string& name() const noexcept { return name_; }
  ErrorCategory category() const noexcept { return category_; }

 private:
  std::string name_;
  ErrorCategory category_;
};

#define LINCTL_DEFINE_ERROR(Type, Category)                     \
  class Type : public Error {                                   \
   public:                                                      \
    explicit Type(const std::string& message)                   \
        : Error(#Type, ErrorCategory::Category, message) {}     \
  }

LINCTL_DEFINE_ERROR(DimensionError, kInput);
LINCTL_DEFINE_ERROR(InputError, kInput);
LINCTL_DEFINE_ERROR(ParseError, kInput);

LINCTL_DEFINE_ERROR(DomainError, kPrecondition);
LINCTL_DEFINE_ERROR(PreconditionError, kPrecondition);
LINCTL_DEFINE_ERROR(NoCertificateError, kPrecondition);
LINCTL_DEFINE_ERROR(FiniteCostViolationError, kPrecondition);
LINCTL_DEFINE_ERROR(LinearTestInapplicableError, kPrecondition);

LINCTL_DEFINE_ERROR(NumericalError, kNumerical);
LINCTL_DEFINE_ERROR(SingularEquationError, kNumerical);
LINCTL_DEFINE_ERROR(ConditioningError, kNumerical);
LINCTL_DEFINE_ERROR(ConvergenceError, kNumerical);
LINCTL_DEFINE_ERROR(EscapeTimeError, kNumerical);
LINCTL_DEFINE_ERROR(NumericalInconsistencyError, kNumerical);
LINCTL_DEFINE_ERROR(EvaluationError, kNumerical);

#undef LINCTL_DEFINE_ERROR

/// Gramian on the requested interval is not invertible.
class UncontrollableIntervalError : public Error {
 public:
  UncontrollableIntervalError(const std::string& message, double min_eigenvalue)
      : Error("UncontrollableIntervalError", ErrorCategory::kPrecondition, message),
        min_eigenvalue_(min_eigenvalue) {}
  double min_eigenvalue() const noexcept { return min_eigenvalue_; }

 private:
  double min_eigenvalue_;
};

}  // namespace linctl
