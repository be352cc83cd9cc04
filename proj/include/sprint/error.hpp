#pragma once

#include <stdexcept>
#include <string>

namespace sprint {

/// Bad user input: malformed config, missing files, invalid arguments.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical routine could not produce a trustworthy answer.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sprint
