#pragma once

#include <stdexcept>
#include <string>

namespace spca {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller broke an operation's precondition (bad dimension, radius, domain).
/// The CLI maps these to exit code 1.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

class InfeasiblePattern : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

class DegenerateInput : public Error {
 public:
  using Error::Error;
};

/// Exhaustive enumeration would exceed the configured support budget.
class BudgetExceeded : public Error {
 public:
  BudgetExceeded(const std::string& what, double required, double budget)
      : Error(what), required_(required), budget_(budget) {}
  double required() const { return required_; }
  double budget() const { return budget_; }

 private:
  double required_;
  double budget_;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

/// A construction whose certificate (separation, cardinality, feasibility)
/// did not verify.
class CertificationError : public Error {
 public:
  using Error::Error;
};

}  // namespace spca
