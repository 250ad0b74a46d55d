#pragma once

#include <stdexcept>
#include <string>

namespace warmdiff {

enum class ErrorKind {
  InvalidLength,
  OutOfVocabulary,
  NumericInput,
  Shape,
  ModelNotFitted,
  Config,
  Precondition,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidLength: return "invalid-length";
    case ErrorKind::OutOfVocabulary: return "out-of-vocabulary";
    case ErrorKind::NumericInput: return "numeric-input";
    case ErrorKind::Shape: return "shape";
    case ErrorKind::ModelNotFitted: return "model-not-fitted";
    case ErrorKind::Config: return "config";
    case ErrorKind::Precondition: return "precondition";
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

}  // namespace warmdiff
