#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hetdepth {

enum class ErrorCode {
  kInvalidConfig,
  kNonMonotoneDistortion,
  kShapeMismatch,
  kBadRange,
  kEmptyMask,
  kNonPositiveValue,
  kNonFiniteTerm,
  kIndexOutOfRange,
  kIo,
};

std::string_view ErrorCodeName(ErrorCode code);

// Raised for configuration, shape and loss-domain failures. Per-point
// projection failures are reported through ProjectionStatus instead.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
        code_(code),
        message_(message) {}

  ErrorCode code() const { return code_; }
  // what() without the code prefix.
  const std::string& message() const { return message_; }

 private:
  ErrorCode code_;
  std::string message_;
};

}  // namespace hetdepth
