#pragma once

#include <stdexcept>
#include <string>

namespace mechsimp {

enum class ErrorKind {
  invalid_input,
  model,
  invalid_valuation,
  condition_violated,
  construction_failed,
  message_rejected,
  reduction_invalid,
  parse,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_input: return "invalid-input";
    case ErrorKind::model: return "model";
    case ErrorKind::invalid_valuation: return "invalid-valuation";
    case ErrorKind::condition_violated: return "condition-violated";
    case ErrorKind::construction_failed: return "construction-failed";
    case ErrorKind::message_rejected: return "message-rejected";
    case ErrorKind::reduction_invalid: return "reduction-invalid";
    case ErrorKind::parse: return "parse";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace mechsimp
