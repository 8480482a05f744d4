#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "hetdepth/feature_map.h"

namespace hetdepth {

// All masks are row-major per pixel; an empty span selects every pixel.
using PixelMask = std::span<const std::uint8_t>;

inline constexpr double kSsimC1 = 0.01 * 0.01;
inline constexpr double kSsimC2 = 0.03 * 0.03;

// Mean over masked pixels and channels of the 3x3 SSIM index. The window of a
// pixel only uses masked neighbours.
double MeanSsim(const FeatureMap& x, const FeatureMap& y, PixelMask mask = {});

// (1 - beta) * mean|x - y| + beta * (1 - SSIM(x, y)) / 2 on intensities in
// [0, 1]. Throws Error(kEmptyMask) or Error(kShapeMismatch).
double PhotometricLoss(const FeatureMap& warped, const FeatureMap& target, PixelMask mask = {},
                       double beta = 0.85);

// Mean absolute difference. Throws Error(kEmptyMask).
double L1Loss(const FeatureMap& pred, const FeatureMap& gt, PixelMask mask = {});

// Variance of log residuals. Throws Error(kEmptyMask) or
// Error(kNonPositiveValue) if a masked value is <= 0.
double SilogLoss(const FeatureMap& pred, const FeatureMap& gt, PixelMask mask = {});

struct RankingPair {
  int i = 0;  // row-major pixel index
  int j = 0;
  int label = 0;  // +1: gt[i] - gt[j] > eps, -1: < -eps, 0 otherwise
};

int RankingLabel(double gt_i, double gt_j, double epsilon);

// `count` pairs drawn uniformly from masked pixels with a seeded mt19937_64,
// labelled from the ground-truth disparity. Throws Error(kEmptyMask).
std::vector<RankingPair> SampleRankingPairs(const FeatureMap& gt_disparity, PixelMask mask,
                                            int count, double epsilon, std::uint64_t seed);

// Sum over pairs of softplus(-delta) (+1), softplus(delta) (-1) or delta^2
// (0), delta = pred[i] - pred[j]. Throws Error(kIndexOutOfRange).
double PseudoRankingLoss(const FeatureMap& pred_disparity, std::span<const RankingPair> pairs);

// Sum over axes of the per-axis mean of |grad d| * exp(-|grad I|) with forward
// differences; the image gradient magnitude is averaged over channels.
double SmoothnessLoss(const FeatureMap& pred_disparity, const FeatureMap& image);

struct LossWeights {
  double l1 = 1.0;
  double silog = 0.1;
  double ranking = 0.001;
  double smoothness = 0.001;
  double temporal = 0.1;
  double spatial = 0.03;
  double beta = 0.85;
};

struct LossTerms {
  double l1 = 0.0;
  double silog = 0.0;
  double ranking = 0.0;
  double smoothness = 0.0;
  double temporal = 0.0;
  double spatial = 0.0;
};

inline constexpr std::array<std::string_view, 6> kLossTermNames = {
    "l1", "silog", "ranking", "smoothness", "temporal", "spatial"};

struct TotalLoss {
  double total = 0.0;
  std::array<double, 6> weighted{};  // alpha_k * term_k in kLossTermNames order
};

// Weighted sum of the six terms. Throws Error(kNonFiniteTerm).
TotalLoss ComputeTotalLoss(const LossTerms& terms, const LossWeights& weights = {});

}  // namespace hetdepth
