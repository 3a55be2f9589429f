#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mrenet {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid argument or violated precondition.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Malformed input row. `line()` is 1-based and counts the header.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& detail)
      : Error("line " + std::to_string(line) + ": " + detail), line_(line), detail_(detail) {}
  /// Same error attributed to a file: "file:line: detail".
  ParseError(const std::string& file, const ParseError& e)
      : Error(file + ":" + std::to_string(e.line_) + ": " + e.detail_), line_(e.line_), detail_(e.detail_) {}
  std::size_t line() const noexcept { return line_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::size_t line_;
  std::string detail_;
};

/// A session with fewer than two records has no speeds.
class DegenerateSessionError : public Error {
 public:
  using Error::Error;
};

/// A training period without sessions cannot be averaged.
class UninformativePeriodError : public Error {
 public:
  using Error::Error;
};

/// Field test without a matching lab result or period profile.
class JoinError : public Error {
 public:
  using Error::Error;
};

/// Coordinate descent ran out of sweeps.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double kkt_violation)
      : Error(what), kkt_violation_(kkt_violation) {}
  double kkt_violation() const noexcept { return kkt_violation_; }

 private:
  double kkt_violation_;
};

/// lambda2 = 0 on a design without full column rank: the lambda1 = 0
/// reference solution is not unique, so L1 fractions are undefined.
class RankDeficientError : public ArgumentError {
 public:
  using ArgumentError::ArgumentError;
};

}  // namespace mrenet
