#pragma once

#include <stdexcept>
#include <string>

namespace mdaml {

/// Invalid hyper-parameters or malformed run configuration.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Unusable input data: parse failures, bad labels, empty constraint sets.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

/// Non-finite values or violated numeric invariants during optimization.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace mdaml
