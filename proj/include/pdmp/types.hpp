#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace pdmp {

using State = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Base class for every error raised by the library. Carries the name of the
/// module that detected the problem so that front ends can report provenance.
class Error : public std::runtime_error {
 public:
  Error(std::string module, const std::string& message)
      : std::runtime_error(message), module_(std::move(module)) {}

  const std::string& module() const noexcept { return module_; }

 private:
  std::string module_;
};

/// Invalid construction parameters or an input that violates a declared
/// invariant (negative weights, rate above its bound, bad schedule...).
class InvariantError : public Error {
 public:
  using Error::Error;
};

/// The argument lies outside the set on which the quantity is defined.
/// `boundary()` reports the relevant limit (e.g. the flow limit).
class DomainError : public Error {
 public:
  DomainError(std::string module, const std::string& message, double boundary)
      : Error(std::move(module), message), boundary_(boundary) {}

  double boundary() const noexcept { return boundary_; }

 private:
  double boundary_;
};

/// A state or intermediate quantity became NaN or infinite.
class NonFiniteError : public Error {
 public:
  using Error::Error;
};

/// No jump was accepted before the configured time cap.
class TimeoutError : public Error {
 public:
  using Error::Error;
};

/// Malformed configuration, model file or command line.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace pdmp
