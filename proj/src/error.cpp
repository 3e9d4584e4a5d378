#include "nllt/error.hpp"

namespace nllt {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::NonStochastic: return "NonStochastic";
    case ErrorCode::ZeroMassState: return "ZeroMassState";
    case ErrorCode::NotConverged: return "NotConverged";
    case ErrorCode::InvalidStationary: return "InvalidStationary";
    case ErrorCode::CapExceeded: return "CapExceeded";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::NotCentered: return "NotCentered";
    case ErrorCode::MixedRepresentation: return "MixedRepresentation";
    case ErrorCode::KindMismatch: return "KindMismatch";
    case ErrorCode::KindOther: return "KindOther";
    case ErrorCode::SolveFailed: return "SolveFailed";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::DegenerateVariance: return "DegenerateVariance";
    case ErrorCode::PositivityWindowUnavailable: return "PositivityWindowUnavailable";
    case ErrorCode::NotAdditive: return "NotAdditive";
    case ErrorCode::Overflow: return "Overflow";
  }
  return "Unknown";
}

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::ParseError:
    case ErrorCode::NonStochastic:
    case ErrorCode::ZeroMassState:
    case ErrorCode::NotConverged:
    case ErrorCode::InvalidStationary:
    case ErrorCode::LengthMismatch:
    case ErrorCode::NonFiniteValue:
    case ErrorCode::MixedRepresentation:
    case ErrorCode::Overflow:
      return 2;
    case ErrorCode::NotCentered:
    case ErrorCode::KindMismatch:
    case ErrorCode::KindOther:
    case ErrorCode::SolveFailed:
    case ErrorCode::DegenerateVariance:
    case ErrorCode::PositivityWindowUnavailable:
    case ErrorCode::NotAdditive:
      return 3;
    case ErrorCode::CapExceeded:
    case ErrorCode::BudgetExceeded:
      return 4;
  }
  return 1;
}

}  // namespace nllt
