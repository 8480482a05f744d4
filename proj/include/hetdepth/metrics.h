#pragma once

#include "hetdepth/losses.h"

namespace hetdepth {

struct DepthMetrics {
  double abs_rel = 0.0;
  double rmse = 0.0;
  double delta1 = 0.0;
  int count = 0;
};

inline constexpr double kDelta1Threshold = 1.25;

// Evaluated where the mask is set and gt > 0. Throws Error(kEmptyMask) when no
// pixel qualifies, Error(kShapeMismatch) on size mismatch.
DepthMetrics ComputeMetrics(const FeatureMap& pred, const FeatureMap& gt, PixelMask mask = {});

}  // namespace hetdepth
