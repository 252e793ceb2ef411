#pragma once

#include <stdexcept>
#include <string>

namespace pjj {

/// Input outside the domain where a formula is defined (|z| > 1, theta at a pole, ...).
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// Root finder, quadrature, or eigensolver failed to converge.
class SolverError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// ODE integration aborted (step-size underflow, invariant violation).
class IntegrationError : public std::runtime_error {
public:
  IntegrationError(const std::string& what, double time)
      : std::runtime_error(what + " at t=" + std::to_string(time)), time_(time) {}

  double time() const noexcept { return time_; }

private:
  double time_;
};

/// Physically inconsistent parameter set (uncoupled junction, RWA violated, ...).
class ParameterError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

} // namespace pjj
