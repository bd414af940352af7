#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace repairkit {

enum class ErrorKind {
  DuplicateTid,
  UnknownRelation,
  ArityMismatch,
  UnknownTid,
  UnknownAttribute,
  NotDerivable,
  InvalidSchema,
  SyntaxError,
  UnsafeRule,
  DuplicateName,
  UnknownName,
  QueryFalseInInstance,
  AlreadyNegative,
  NoCounterfactual,
  OutOfDomain,
  ProtocolError,
  BudgetExceeded,
  UniverseTooLarge,
  IoError,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DuplicateTid: return "DuplicateTid";
    case ErrorKind::UnknownRelation: return "UnknownRelation";
    case ErrorKind::ArityMismatch: return "ArityMismatch";
    case ErrorKind::UnknownTid: return "UnknownTid";
    case ErrorKind::UnknownAttribute: return "UnknownAttribute";
    case ErrorKind::NotDerivable: return "NotDerivable";
    case ErrorKind::InvalidSchema: return "InvalidSchema";
    case ErrorKind::SyntaxError: return "SyntaxError";
    case ErrorKind::UnsafeRule: return "UnsafeRule";
    case ErrorKind::DuplicateName: return "DuplicateName";
    case ErrorKind::UnknownName: return "UnknownName";
    case ErrorKind::QueryFalseInInstance: return "QueryFalseInInstance";
    case ErrorKind::AlreadyNegative: return "AlreadyNegative";
    case ErrorKind::NoCounterfactual: return "NoCounterfactual";
    case ErrorKind::OutOfDomain: return "OutOfDomain";
    case ErrorKind::ProtocolError: return "ProtocolError";
    case ErrorKind::BudgetExceeded: return "BudgetExceeded";
    case ErrorKind::UniverseTooLarge: return "UniverseTooLarge";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

/// Position in a source text; line 0 means "no position".
struct SourceLocation {
  int line = 0;
  int column = 0;
};

/// Every failure in the library is reported through this exception type.
/// The kind is stable and meant for programmatic dispatch; the message is
/// for humans and carries the source position when one is known.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message, SourceLocation where = {})
      : std::runtime_error(format(kind, message, where)),
        kind_(kind),
        where_(where),
        detail_(message) {}

  ErrorKind kind() const noexcept { return kind_; }
  SourceLocation where() const noexcept { return where_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  static std::string format(ErrorKind kind, const std::string& message,
                            SourceLocation where) {
    std::string out;
    if (where.line > 0) {
      out += std::to_string(where.line) + ":" + std::to_string(where.column) +
             ": ";
    }
    out += std::string(to_string(kind)) + ": " + message;
    return out;
  }

  ErrorKind kind_;
  SourceLocation where_;
  std::string detail_;
};

}  // namespace repairkit
