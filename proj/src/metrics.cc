#include "hetdepth/metrics.h"

#include <algorithm>
#include <cmath>

#include "hetdepth/error.h"

namespace hetdepth {

DepthMetrics ComputeMetrics(const FeatureMap& pred, const FeatureMap& gt, PixelMask mask) {
  if (pred.num_pixels() != gt.num_pixels() || pred.channels() != 1 || gt.channels() != 1) {
    throw Error(ErrorCode::kShapeMismatch, "prediction and ground truth differ in shape");
  }
  if (!mask.empty() && static_cast<int>(mask.size()) != gt.num_pixels()) {
    throw Error(ErrorCode::kShapeMismatch, "mask length differs from pixel count");
  }
  double abs_rel = 0.0;
  double sq = 0.0;
  long inliers = 0;
  long count = 0;
  for (int i = 0; i < gt.num_pixels(); ++i) {
    const double g = gt.data()[i];
    if ((!mask.empty() && !mask[i]) || !(g > 0.0)) continue;
    const double p = pred.data()[i];
    abs_rel += std::abs(p - g) / g;
    sq += (p - g) * (p - g);
    if (p > 0.0 && std::max(p / g, g / p) < kDelta1Threshold) ++inliers;
    ++count;
  }
  if (count == 0) throw Error(ErrorCode::kEmptyMask, "no valid ground-truth pixels");
  return {abs_rel / count, std::sqrt(sq / count), static_cast<double>(inliers) / count,
          static_cast<int>(count)};
}

}  // namespace hetdepth
