#pragma once

#include <stdexcept>
#include <string>

namespace rosen {

// Invalid model or configuration input (CLI exit code 1).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Quadrature, eigen-solver or truncation failure (CLI exit code 2).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed configuration text; carries the offending location.
class ConfigError : public ValidationError {
 public:
  ConfigError(const std::string& what, std::string location)
      : ValidationError(what + " (at " + location + ")"), location_(std::move(location)) {}
  const std::string& location() const noexcept { return location_; }

 private:
  std::string location_;
};

}  // namespace rosen
