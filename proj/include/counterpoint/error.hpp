#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace counterpoint {

enum class ErrorKind {
  PathExplosion,
  CycleDetected,
  DanglingDecision,
  InvalidModel,
  UnknownCounter,
  SyntaxError,
  DuplicateLabel,
  EmptySwitch,
  UnreachableStatement,
  UnknownLabel,
  DegenerateHull,
  DimensionMismatch,
  MissingCounter,
  NonNumericCell,
  TooFewSamples,
  NotSymmetric,
  NoFeasibleModel,
  InvalidArgument,
  InvalidCatalog,
  Io,
};

std::string_view to_string(ErrorKind kind);

// All library failures are reported through this type; `kind()` lets callers
// (notably the CLI) branch on the failure class without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace counterpoint
