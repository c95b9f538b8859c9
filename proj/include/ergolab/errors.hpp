#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ergolab {

/// A point, index or parameter lies outside the domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// The operation is not defined for this kind of space or basis.
class UnsupportedError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A spectral series was truncated too early for the requested accuracy.
class TruncationError : public std::runtime_error {
 public:
  TruncationError(const std::string& what, std::size_t required_modes)
      : std::runtime_error(what), required_modes_(required_modes) {}
  std::size_t required_modes() const noexcept { return required_modes_; }

 private:
  std::size_t required_modes_;
};

/// An iterative solver did not meet its stopping criterion.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A simulated trajectory left its numerical guard (explicit schemes only).
class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An experiment configuration failed validation.
class SchemaError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace ergolab
