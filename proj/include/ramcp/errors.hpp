#pragma once

#include <stdexcept>
#include <string>

namespace ramcp {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller-supplied value violates a documented precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A policy was queried at a history it does not cover.
class PolicyUndefined : public Error {
 public:
  PolicyUndefined(const std::string& history, const std::string& what)
      : Error(what + " at history " + history), history_(history) {}

  const std::string& history() const noexcept { return history_; }

 private:
  std::string history_;
};

class InfeasibleProblem : public Error {
 public:
  using Error::Error;
};

class UnboundedProblem : public Error {
 public:
  using Error::Error;
};

/// Exact enumeration would exceed its node or policy budget.
class TooLarge : public Error {
 public:
  TooLarge(const std::string& what, double estimate)
      : Error(what + " (estimated size " + std::to_string(estimate) + ")"),
        estimate_(estimate) {}

  double estimate() const noexcept { return estimate_; }

 private:
  double estimate_;
};

/// Malformed configuration or problem file.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace ramcp
