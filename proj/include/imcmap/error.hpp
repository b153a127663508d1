#pragma once

#include <stdexcept>
#include <string>

namespace imcmap {

// Base class for all toolkit errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input document (bad JSON, wrong field types, unknown fields).
class ParseError : public Error {
 public:
  using Error::Error;
};

// Structural invariant violation in a graph (cycle, dangling edge, bad id).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Invalid parameters or an unsatisfiable run configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A mapping that cannot execute (incomplete or type-incompatible).
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

// The measured completion intervals did not settle to a constant period.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace imcmap
