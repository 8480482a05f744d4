#include "hetdepth/error.h"

namespace hetdepth {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidConfig:
      return "InvalidConfig";
    case ErrorCode::kNonMonotoneDistortion:
      return "NonMonotoneDistortion";
    case ErrorCode::kShapeMismatch:
      return "ShapeMismatch";
    case ErrorCode::kBadRange:
      return "BadRange";
    case ErrorCode::kEmptyMask:
      return "EmptyMask";
    case ErrorCode::kNonPositiveValue:
      return "NonPositiveValue";
    case ErrorCode::kNonFiniteTerm:
      return "NonFiniteTerm";
    case ErrorCode::kIndexOutOfRange:
      return "IndexOutOfRange";
    case ErrorCode::kIo:
      return "Io";
  }
  return "Unknown";
}

}  // namespace hetdepth
