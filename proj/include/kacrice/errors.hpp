#pragma once

#include <stdexcept>
#include <string>

namespace kacrice {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Malformed input: configuration fields, coefficient conditions, etc.
/// `field` carries a dotted path when the input came from a config document.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what, std::string field = {})
      : std::invalid_argument(field.empty() ? what : field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// A hypothesis required by a computation does not hold for the given model.
class PreconditionError : public std::runtime_error {
 public:
  PreconditionError(const std::string& what, std::string hypothesis)
      : std::runtime_error(what), hypothesis_(std::move(hypothesis)) {}
  const std::string& hypothesis() const noexcept { return hypothesis_; }

 private:
  std::string hypothesis_;
};

/// Quadrature, optimizer or scan failed to reach the requested accuracy.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what, double achieved = 0.0)
      : std::runtime_error(what), achieved_(achieved) {}
  double achieved_tolerance() const noexcept { return achieved_; }

 private:
  double achieved_;
};

/// No admissible constant exists (e.g. no tau satisfies the tail condition).
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace kacrice
