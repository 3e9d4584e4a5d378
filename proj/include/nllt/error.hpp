#pragma once

#include <stdexcept>
#include <string>

namespace nllt {

enum class ErrorCode {
  InvalidArgument,
  ParseError,
  NonStochastic,
  ZeroMassState,
  NotConverged,
  InvalidStationary,
  CapExceeded,
  LengthMismatch,
  NonFiniteValue,
  NotCentered,
  MixedRepresentation,
  KindMismatch,
  KindOther,
  SolveFailed,
  BudgetExceeded,
  DegenerateVariance,
  PositivityWindowUnavailable,
  NotAdditive,
  Overflow,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), detail_(what) {}

  ErrorCode code() const noexcept { return code_; }
  /// Message without the code prefix, for re-throwing with added context.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

/// Process exit status for a failure of the given kind: 2 parse/validation,
/// 3 precondition, 4 budget or enumeration cap.
int exit_code(ErrorCode code);

}  // namespace nllt
