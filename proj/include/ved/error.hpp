#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ved {

enum class ErrorKind {
  kEmptyList,
  kZeroVector,
  kNumericalFailure,
  kMemoryTooLarge,
  kExplosion,
  kDuplicateAlternative,
  kNotReached,
  kLengthMismatch,
  kInvalidConfig,
  kParse,
};

std::string_view to_string(ErrorKind kind);

// Every module reports failures through this exception; `kind()` lets
// callers branch on the failure class without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kEmptyList: return "EmptyList";
    case ErrorKind::kZeroVector: return "ZeroVector";
    case ErrorKind::kNumericalFailure: return "NumericalFailure";
    case ErrorKind::kMemoryTooLarge: return "MemoryTooLarge";
    case ErrorKind::kExplosion: return "Explosion";
    case ErrorKind::kDuplicateAlternative: return "DuplicateAlternative";
    case ErrorKind::kNotReached: return "NotReached";
    case ErrorKind::kLengthMismatch: return "LengthMismatch";
    case ErrorKind::kInvalidConfig: return "InvalidConfig";
    case ErrorKind::kParse: return "ParseError";
  }
  return "Error";
}

}  // namespace ved
