#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace emergelab {

enum class ErrorKind {
  DuplicateId,
  DanglingTrigger,
  FieldOutOfRange,
  MalformedLine,
  MissingRequiredField,
  MalformedHeader,
  NonNumericStat,
  ConflictingEvidence,
  EmptyGraph,
  ZeroTotalWeight,
  UncoveredNode,
  EmptyLog,
  TooFewNodes,
  ConstantDimension,
  TooShort,
  MisalignedSeries,
  TooFewSeries,
  TooFewLevels,
  MissingFields,
  SeparationDetected,
  NoVariation,
  InvalidArgument,
  Io,
};

constexpr std::string_view to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::DuplicateId: return "DuplicateId";
    case ErrorKind::DanglingTrigger: return "DanglingTrigger";
    case ErrorKind::FieldOutOfRange: return "FieldOutOfRange";
    case ErrorKind::MalformedLine: return "MalformedLine";
    case ErrorKind::MissingRequiredField: return "MissingRequiredField";
    case ErrorKind::MalformedHeader: return "MalformedHeader";
    case ErrorKind::NonNumericStat: return "NonNumericStat";
    case ErrorKind::ConflictingEvidence: return "ConflictingEvidence";
    case ErrorKind::EmptyGraph: return "EmptyGraph";
    case ErrorKind::ZeroTotalWeight: return "ZeroTotalWeight";
    case ErrorKind::UncoveredNode: return "UncoveredNode";
    case ErrorKind::EmptyLog: return "EmptyLog";
    case ErrorKind::TooFewNodes: return "TooFewNodes";
    case ErrorKind::ConstantDimension: return "ConstantDimension";
    case ErrorKind::TooShort: return "TooShort";
    case ErrorKind::MisalignedSeries: return "MisalignedSeries";
    case ErrorKind::TooFewSeries: return "TooFewSeries";
    case ErrorKind::TooFewLevels: return "TooFewLevels";
    case ErrorKind::MissingFields: return "MissingFields";
    case ErrorKind::SeparationDetected: return "SeparationDetected";
    case ErrorKind::NoVariation: return "NoVariation";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

// All library failures are reported through this exception. `line` is the
// 1-based input line for parser errors and 0 otherwise.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what, std::int64_t line = 0)
      : std::runtime_error(format(kind, what, line)), kind_(kind), line_(line) {}

  ErrorKind kind() const noexcept { return kind_; }
  std::int64_t line() const noexcept { return line_; }

 private:
  static std::string format(ErrorKind kind, const std::string& what, std::int64_t line) {
    std::string s(to_string(kind));
    if (line > 0) s += " (line " + std::to_string(line) + ")";
    if (!what.empty()) s += ": " + what;
    return s;
  }

  ErrorKind kind_;
  std::int64_t line_;
};

}  // namespace emergelab
