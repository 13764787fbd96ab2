#pragma once

#include <stdexcept>
#include <string>

namespace minatt {

/// Input violates an operation's precondition (shape, domain, normalization).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Operator was required to be bounded but its declared tail diverges.
class UnboundedError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Operator was required to be (self-adjoint) positive and is not.
class NotPositiveError : public std::domain_error {
 public:
  NotPositiveError(const std::string& what, double violating)
      : std::domain_error(what), violating_(violating) {}
  double violating() const noexcept { return violating_; }

 private:
  double violating_;
};

/// Tail metadata is missing or cannot bound the quantity asked for.
/// Carries the best interval known from the finite prefix.
class InconclusiveError : public std::runtime_error {
 public:
  InconclusiveError(const std::string& what, double lo, double hi)
      : std::runtime_error(what), lo_(lo), hi_(hi) {}
  double lower() const noexcept { return lo_; }
  double upper() const noexcept { return hi_; }

 private:
  double lo_;
  double hi_;
};

/// Scenario configuration is malformed or references unknown names.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Report or config file could not be read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace minatt
