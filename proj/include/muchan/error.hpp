#pragma once

#include <stdexcept>
#include <string>

namespace muchan {

enum class ErrorKind {
  ShapeMismatch,
  NotFinite,
  NotHermitian,
  NotUnitary,
  RankDeficient,
  NotCompletelyPositive,
  InvalidChannel,
  InvalidArgument,
  NotAutomorphism,
  NotTracePreserving,
  NotCovariant,
  NoBracket,
  Parse,
};

const char* to_string(ErrorKind kind) noexcept;

// All library failures are reported through this type; callers that care
// about the cause switch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace muchan
