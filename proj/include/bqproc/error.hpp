#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bqproc {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid user configuration: unknown names, out-of-range flags, bad specs.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file. Carries the 1-based line number of the offending row.
class ParseError : public ConfigError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : ConfigError("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

/// All responses identical; the smoothed score has no interior maximizer.
class DegenerateResponse : public Error {
 public:
  using Error::Error;
};

class EstimationError : public Error {
 public:
  using Error::Error;
};

/// The covariate point never crosses zero along the quantile path.
class NoCrossing : public DomainError {
 public:
  using DomainError::DomainError;
};

/// |w'Delta| too small to invert when linearizing the crossing level.
class IllConditionedCrossing : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Inputs fall outside the hypotheses of the linearization bound.
class PreconditionNotMet : public Error {
 public:
  using Error::Error;
};

}  // namespace bqproc
