#pragma once

#include <stdexcept>
#include <string>

namespace heartstack {

/// Broad failure category; the CLI maps each one to a distinct exit code.
enum class ErrorCategory {
  data = 2,      // unreadable, malformed or inconsistent input table
  config = 3,    // invalid configuration or hyperparameters
  model = 4,     // corrupted, incompatible or mismatched model file
  io = 5,        // filesystem failures
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& message)
      : std::runtime_error(message), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

inline const char* category_name(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::data: return "data";
    case ErrorCategory::config: return "config";
    case ErrorCategory::model: return "model";
    case ErrorCategory::io: return "io";
  }
  return "unknown";
}

[[noreturn]] inline void fail(ErrorCategory c, const std::string& message) {
  throw Error(c, message);
}

}  // namespace heartstack
