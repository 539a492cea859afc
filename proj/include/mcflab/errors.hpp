#pragma once

#include <stdexcept>
#include <string>

namespace mcflab {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "error"; }
};

/// A query outside the chart of a metric (pole, zero warp, outside the disk model).
class DomainError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "domain_error"; }
};

/// Invalid scenario configuration or grid/metric combination.
class ConfigError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "config_error"; }
};

/// Violated precondition such as |Phi| >= 1 at a boundary node.
class ContractViolation : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "contract_violation"; }
};

/// Newton/Picard failure or stagnation.
class SolverError : public Error {
 public:
  SolverError(const std::string& what, double last_residual)
      : Error(what), last_residual_(last_residual) {}
  const char* kind() const noexcept override { return "solver_error"; }
  double last_residual() const noexcept { return last_residual_; }

 private:
  double last_residual_;
};

/// Speed estimation on a trajectory that is too short.
class EstimationError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "estimation_error"; }
};

/// Non-finite values or runaway gradients during time stepping.
class BlowUpError : public Error {
 public:
  BlowUpError(const std::string& what, double t, long step)
      : Error(what), t_(t), step_(step) {}
  const char* kind() const noexcept override { return "blow_up"; }
  double time() const noexcept { return t_; }
  long step() const noexcept { return step_; }

 private:
  double t_;
  long step_;
};

}  // namespace mcflab
