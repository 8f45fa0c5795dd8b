#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ringdh {

enum class Errc {
  InvalidArgument,
  ZeroDivisor,
  SecretOutOfRange,
  BadBaseIndex,
  AlreadyStarted,
  WrongSender,
  RoundMismatch,
  DuplicatePosition,
  BudgetExceeded,
  DuplicateBases,
  SingularSystem,
  WindowTooShort,
  MalformedFrame,
  ValueOutOfRange,
  UnknownField,
  IoFailure,
  SchemaViolation,
  Exhausted,
};

inline std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::ZeroDivisor: return "ZeroDivisor";
    case Errc::SecretOutOfRange: return "SecretOutOfRange";
    case Errc::BadBaseIndex: return "BadBaseIndex";
    case Errc::AlreadyStarted: return "AlreadyStarted";
    case Errc::WrongSender: return "WrongSender";
    case Errc::RoundMismatch: return "RoundMismatch";
    case Errc::DuplicatePosition: return "DuplicatePosition";
    case Errc::BudgetExceeded: return "BudgetExceeded";
    case Errc::DuplicateBases: return "DuplicateBases";
    case Errc::SingularSystem: return "SingularSystem";
    case Errc::WindowTooShort: return "WindowTooShort";
    case Errc::MalformedFrame: return "MalformedFrame";
    case Errc::ValueOutOfRange: return "ValueOutOfRange";
    case Errc::UnknownField: return "UnknownField";
    case Errc::IoFailure: return "IoFailure";
    case Errc::SchemaViolation: return "SchemaViolation";
    case Errc::Exhausted: return "Exhausted";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so
/// callers (and the CLI exit-code mapping) can branch without parsing text.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace ringdh
