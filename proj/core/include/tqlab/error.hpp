#pragma once

#include <stdexcept>
#include <string>

namespace tq {

/// Invalid user-supplied configuration. CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Shape/dimension mismatch between operands.
class DimensionError : public std::runtime_error {
 public:
  explicit DimensionError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A function was called outside its contract (bad argument state).
class ContractError : public std::logic_error {
 public:
  explicit ContractError(const std::string& msg) : std::logic_error(msg) {}
};

/// Optimization produced a non-finite loss or otherwise diverged.
class OptimError : public std::runtime_error {
 public:
  explicit OptimError(const std::string& msg) : std::runtime_error(msg) {}
};

/// File or serialization failure.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace tq
