#pragma once

#include <stdexcept>
#include <string>

namespace fraqhom {

/// Malformed input: wrong sizes, grids that do not match, parameters out of range.
class InvalidArgument : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Syntax errors in a configuration file or on the command line.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A coefficient or configuration failed a model-class check.
class ValidationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A numerical kernel failed: non-convergence, non-finite data, broken transform.
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace fraqhom
