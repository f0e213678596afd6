#pragma once

#include <cstddef>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace stalkflex {

/// Compact "%g" rendering for diagnostics.
inline std::string format_g(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", value);
  return buf;
}

enum class ErrorKind {
  InvalidArgument,
  IntegrationDiverged,
  NoSolution,
  UnreachableAngle,
  Domain,
  OracleOutOfRange,
  Calibration,
  Parse,
  Validation,
  Range,
  Coverage,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid argument";
    case ErrorKind::IntegrationDiverged: return "integration diverged";
    case ErrorKind::NoSolution: return "no solution";
    case ErrorKind::UnreachableAngle: return "unreachable angle";
    case ErrorKind::Domain: return "domain error";
    case ErrorKind::OracleOutOfRange: return "oracle out of range";
    case ErrorKind::Calibration: return "calibration error";
    case ErrorKind::Parse: return "parse error";
    case ErrorKind::Validation: return "validation error";
    case ErrorKind::Range: return "range error";
    case ErrorKind::Coverage: return "coverage error";
  }
  return "error";
}

/// Base of every exception thrown by the library. The message is prefixed
/// with the kind so command-line diagnostics are self-describing.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Raised by the boundary-value solvers; carries the residual of the last
/// iterate so callers can judge how far off the solve was.
class NoSolutionError : public Error {
 public:
  NoSolutionError(const std::string& what, double last_residual)
      : Error(ErrorKind::NoSolution, what + " (last residual " + format_g(last_residual) + ")"),
        last_residual_(last_residual) {}

  double last_residual() const noexcept { return last_residual_; }

 private:
  double last_residual_;
};

class UnreachableAngleError : public Error {
 public:
  UnreachableAngleError(const std::string& what, double max_tip_angle)
      : Error(ErrorKind::UnreachableAngle, what), max_tip_angle_(max_tip_angle) {}

  /// Largest tip angle [rad] attained inside the alpha search range.
  double max_tip_angle() const noexcept { return max_tip_angle_; }

 private:
  double max_tip_angle_;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error(ErrorKind::Parse, "line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace stalkflex
