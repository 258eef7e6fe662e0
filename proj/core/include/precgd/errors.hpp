#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace precgd {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand dimensions disagree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A computed quantity is NaN or infinite.
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what, std::optional<long> iteration = std::nullopt)
      : Error(iteration ? what + " (iteration " + std::to_string(*iteration) + ")" : what),
        iteration_(iteration) {}

  std::optional<long> iteration() const { return iteration_; }

 private:
  std::optional<long> iteration_;
};

/// An argument is outside its admissible range.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// The requested operation needs something the inputs do not provide
/// (an analytic Hessian, a trace bound, an overparameterized rank, ...).
class CapabilityError : public Error {
 public:
  using Error::Error;
};

/// Invalid experiment configuration. Carries the offending field name.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& message)
      : Error("config field '" + field + "': " + message), field_(std::move(field)) {}

  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace precgd
