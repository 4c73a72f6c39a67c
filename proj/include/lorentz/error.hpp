#pragma once

#include <stdexcept>
#include <string>

namespace lorentz {

enum class ErrorKind {
  Overlap,
  EmptyConfig,
  NonUnitInput,
  HorizonOverflow,
  TangentRay,
  NoCorridor,
  DegenerateSigma,
  Domain,
  ZeroDisplacement,
  UnsupportedOrder,
  MassOverflow,
  NonPrimeDirection,
  OverlappingTail,
  WrapBoundExceeded,
  EmptySupport,
  SeedCollision,
  OverflowAbort,
  Parse,
  UnknownKey,
  MissingRequired,
  Io,
};

inline const char* error_kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::Overlap: return "OverlapError";
    case ErrorKind::EmptyConfig: return "EmptyConfig";
    case ErrorKind::NonUnitInput: return "NonUnitInput";
    case ErrorKind::HorizonOverflow: return "HorizonOverflow";
    case ErrorKind::TangentRay: return "TangentRay";
    case ErrorKind::NoCorridor: return "NoCorridor";
    case ErrorKind::DegenerateSigma: return "DegenerateSigma";
    case ErrorKind::Domain: return "DomainError";
    case ErrorKind::ZeroDisplacement: return "ZeroDisplacement";
    case ErrorKind::UnsupportedOrder: return "UnsupportedOrder";
    case ErrorKind::MassOverflow: return "MassOverflow";
    case ErrorKind::NonPrimeDirection: return "NonPrimeDirection";
    case ErrorKind::OverlappingTail: return "OverlappingTail";
    case ErrorKind::WrapBoundExceeded: return "WrapBoundExceeded";
    case ErrorKind::EmptySupport: return "EmptySupport";
    case ErrorKind::SeedCollision: return "SeedCollision";
    case ErrorKind::OverflowAbort: return "OverflowAbort";
    case ErrorKind::Parse: return "ParseError";
    case ErrorKind::UnknownKey: return "UnknownKey";
    case ErrorKind::MissingRequired: return "MissingRequired";
    case ErrorKind::Io: return "IoError";
  }
  return "Error";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

#define LORENTZ_ERROR(Name, Kind)                                   \
  class Name : public Error {                                       \
   public:                                                          \
    explicit Name(const std::string& what) : Error(Kind, what) {}   \
  };

LORENTZ_ERROR(OverlapError, ErrorKind::Overlap)
LORENTZ_ERROR(EmptyConfigError, ErrorKind::EmptyConfig)
LORENTZ_ERROR(NonUnitInputError, ErrorKind::NonUnitInput)
LORENTZ_ERROR(HorizonOverflowError, ErrorKind::HorizonOverflow)
LORENTZ_ERROR(TangentRayError, ErrorKind::TangentRay)
LORENTZ_ERROR(NoCorridorError, ErrorKind::NoCorridor)
LORENTZ_ERROR(DegenerateSigmaError, ErrorKind::DegenerateSigma)
LORENTZ_ERROR(DomainError, ErrorKind::Domain)
LORENTZ_ERROR(ZeroDisplacementError, ErrorKind::ZeroDisplacement)
LORENTZ_ERROR(UnsupportedOrderError, ErrorKind::UnsupportedOrder)
LORENTZ_ERROR(MassOverflowError, ErrorKind::MassOverflow)
LORENTZ_ERROR(NonPrimeDirectionError, ErrorKind::NonPrimeDirection)
LORENTZ_ERROR(OverlappingTailError, ErrorKind::OverlappingTail)
LORENTZ_ERROR(WrapBoundExceededError, ErrorKind::WrapBoundExceeded)
LORENTZ_ERROR(EmptySupportError, ErrorKind::EmptySupport)
LORENTZ_ERROR(SeedCollisionError, ErrorKind::SeedCollision)
LORENTZ_ERROR(OverflowAbortError, ErrorKind::OverflowAbort)
LORENTZ_ERROR(UnknownKeyError, ErrorKind::UnknownKey)
LORENTZ_ERROR(MissingRequiredError, ErrorKind::MissingRequired)
LORENTZ_ERROR(IoError, ErrorKind::Io)

#undef LORENTZ_ERROR

class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line, int column)
      : Error(ErrorKind::Parse, format(what, line, column)),
        line_(line),
        column_(column) {}
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  static std::string format(const std::string& what, int line, int column) {
    return std::to_string(line) + ":" + std::to_string(column) + ": " + what;
  }
  int line_;
  int column_;
};

}  // namespace lorentz
