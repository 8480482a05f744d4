#include "hetdepth/feature_map.h"

#include "hetdepth/error.h"

namespace hetdepth {

std::string_view MapRoleName(MapRole role) {
  switch (role) {
    case MapRole::kFeature:
      return "feature";
    case MapRole::kColor:
      return "color";
    case MapRole::kDepth:
      return "depth";
    case MapRole::kDisparity:
      return "disparity";
  }
  return "unknown";
}

FeatureMap::FeatureMap(int height, int width, int channels, MapRole role, double fill)
    : height_(height), width_(width), channels_(channels), role_(role) {
  if (height < 1 || width < 1 || channels < 1) {
    throw Error(ErrorCode::kInvalidConfig, "feature map dimensions must be positive");
  }
  data_.assign(static_cast<size_t>(height) * width * channels, fill);
}

}  // namespace hetdepth
