#pragma once

#include <stdexcept>
#include <string>

namespace holo {

/// Base of every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent configuration (unknown key, bad value, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A coefficient assumption (lower bounds, Gamma cap, ...) does not hold.
class AssumptionError : public Error {
 public:
  AssumptionError(const std::string& what, double node = -1.0) : Error(what), node_(node) {}
  /// Offending spatial node, or -1 when the failure is not tied to a node.
  double node() const noexcept { return node_; }

 private:
  double node_;
};

class AssemblyError : public Error {
 public:
  using Error::Error;
};

/// An iterative solver exhausted its iteration budget.
class IterationError : public Error {
 public:
  IterationError(const std::string& what, double last_residual)
      : Error(what), last_residual_(last_residual) {}
  double last_residual() const noexcept { return last_residual_; }

 private:
  double last_residual_;
};

/// A seeded (continuation) solve met a near-singular pivot or lost its branch.
class ContinuationError : public Error {
 public:
  using Error::Error;
};

/// Contour quadrature could not be completed (radius too large, loop did not close).
class ContourError : public Error {
 public:
  using Error::Error;
};

class CertificateError : public Error {
 public:
  using Error::Error;
};

/// A lattice or Monte Carlo estimate failed at some sample point.
class EstimateError : public Error {
 public:
  using Error::Error;
};

}  // namespace holo
