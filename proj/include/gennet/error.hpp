#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gennet {

enum class ErrorKind {
  GridMismatch,
  FieldMismatch,
  DimMismatch,
  LengthMismatch,
  NotNonnegative,
  EmptyTailIntersection,
  NotZeroProduct,
  SplitFailed,
  EmptySet,
  NoConvergence,
  ProbeNotInSet,
  MixedScaleGenerator,
  InvalidBasis,
  InvalidCertificate,
  SingularSample,
  IterationBudgetExceeded,
  InvalidSpec,
  CoercivityFailure,
  ConfigInvalid,
  MalformedSummary,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries one of the ErrorKind tags so
/// callers (and the CLI exit-code mapping) can dispatch without parsing text.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace gennet
