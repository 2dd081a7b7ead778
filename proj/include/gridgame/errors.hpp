#pragma once

#include <stdexcept>
#include <string>

namespace gridgame {

/// Base class for all library errors.
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Case-file or profile-file syntax error; carries the offending line number.
class ParseError : public Error {
  public:
    ParseError(const std::string& msg, std::size_t line)
        : Error("parse error at line " + std::to_string(line) + ": " + msg), line_(line) {}
    std::size_t line() const { return line_; }

  private:
    std::size_t line_;
};

/// A structural invariant of a case, relay, or config does not hold.
class ValidationError : public Error {
  public:
    explicit ValidationError(const std::string& msg) : Error("validation error: " + msg) {}
};

/// Relay delay queried outside its violation region (at or past the pole).
class NotInViolation : public Error {
  public:
    explicit NotInViolation(const std::string& msg) : Error(msg) {}
};

/// FVSI undefined for a line with zero series susceptance.
class DegenerateLine : public Error {
  public:
    explicit DegenerateLine(const std::string& msg) : Error(msg) {}
};

/// Vector fed to a network with the wrong width.
class DimensionError : public Error {
  public:
    explicit DimensionError(const std::string& msg) : Error(msg) {}
};

/// simulate_step called on an absorbed (blacked-out) state.
class StepAfterBlackout : public Error {
  public:
    StepAfterBlackout() : Error("simulate_step called after blackout") {}
};

}  // namespace gridgame
