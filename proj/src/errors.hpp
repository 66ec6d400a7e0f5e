#pragma once

#include <stdexcept>
#include <string>

namespace riskgraph {

// Error categories mirror the process exit codes of the CLI:
// 2 = bad configuration/input, 3 = numeric failure, 4 = I/O failure.
enum class ErrorCategory { config = 2, numeric = 3, io = 4 };

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory cat, std::string msg)
      : std::runtime_error(std::move(msg)), category_(cat) {}
  ErrorCategory category() const { return category_; }

 private:
  ErrorCategory category_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(std::string msg)
      : Error(ErrorCategory::config, std::move(msg)) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(std::string msg)
      : Error(ErrorCategory::numeric, std::move(msg)) {}
};

class IoError : public Error {
 public:
  explicit IoError(std::string msg)
      : Error(ErrorCategory::io, std::move(msg)) {}
};

}  // namespace riskgraph
