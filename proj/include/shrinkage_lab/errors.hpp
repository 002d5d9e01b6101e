#pragma once

#include <stdexcept>
#include <string>

namespace shrinkage_lab {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid parameters: bad aspect ratio, malformed spectrum, missing keys.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A quantity was requested outside the set where it is defined.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A shrinkage function could not be evaluated (non-finite value).
class EvaluationError : public Error {
 public:
  using Error::Error;
};

/// An iterative solver stopped before reaching its tolerance.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : Error(what + " (last residual " + std::to_string(residual) + ")"),
        residual_(residual) {}

  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

}  // namespace shrinkage_lab
