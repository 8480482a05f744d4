#include "hetdepth/losses.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <string>

#include "hetdepth/error.h"

namespace hetdepth {
namespace {

void CheckSameShape(const FeatureMap& a, const FeatureMap& b, PixelMask mask) {
  if (!a.SameShape(b)) throw Error(ErrorCode::kShapeMismatch, "maps differ in shape");
  if (!mask.empty() && static_cast<int>(mask.size()) != a.num_pixels()) {
    throw Error(ErrorCode::kShapeMismatch, "mask length differs from pixel count");
  }
}

inline bool Selected(PixelMask mask, size_t index) { return mask.empty() || mask[index] != 0; }

// log(1 + e^x) without overflow.
inline double Softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

}  // namespace

double MeanSsim(const FeatureMap& x, const FeatureMap& y, PixelMask mask) {
  CheckSameShape(x, y, mask);
  const int h = x.height();
  const int w = x.width();
  double total = 0.0;
  long count = 0;
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      if (!Selected(mask, static_cast<size_t>(v) * w + u)) continue;
      for (int c = 0; c < x.channels(); ++c) {
        // Two passes: moments about the window mean avoid cancellation.
        std::array<double, 9> wa{};
        std::array<double, 9> wb{};
        int n = 0;
        for (int dv = -1; dv <= 1; ++dv) {
          for (int du = -1; du <= 1; ++du) {
            const int vv = v + dv;
            const int uu = u + du;
            if (vv < 0 || uu < 0 || vv >= h || uu >= w) continue;
            if (!Selected(mask, static_cast<size_t>(vv) * w + uu)) continue;
            wa[n] = x(vv, uu, c);
            wb[n] = y(vv, uu, c);
            ++n;
          }
        }
        double mx = 0, my = 0;
        for (int k = 0; k < n; ++k) {
          mx += wa[k];
          my += wb[k];
        }
        mx /= n;
        my /= n;
        double vx = 0, vy = 0, cxy = 0;
        for (int k = 0; k < n; ++k) {
          vx += (wa[k] - mx) * (wa[k] - mx);
          vy += (wb[k] - my) * (wb[k] - my);
          cxy += (wa[k] - mx) * (wb[k] - my);
        }
        vx /= n;
        vy /= n;
        cxy /= n;
        const double ssim = ((2.0 * mx * my + kSsimC1) * (2.0 * cxy + kSsimC2)) /
                            ((mx * mx + my * my + kSsimC1) * (vx + vy + kSsimC2));
        total += ssim;
        ++count;
      }
    }
  }
  if (count == 0) throw Error(ErrorCode::kEmptyMask, "SSIM over an empty mask");
  return total / count;
}

double PhotometricLoss(const FeatureMap& warped, const FeatureMap& target, PixelMask mask,
                       double beta) {
  CheckSameShape(warped, target, mask);
  double l1 = 0.0;
  long count = 0;
  for (int i = 0; i < warped.num_pixels(); ++i) {
    if (!Selected(mask, i)) continue;
    for (int c = 0; c < warped.channels(); ++c) {
      const size_t k = static_cast<size_t>(i) * warped.channels() + c;
      l1 += std::abs(warped.data()[k] - target.data()[k]);
    }
    count += warped.channels();
  }
  if (count == 0) throw Error(ErrorCode::kEmptyMask, "photometric loss over an empty mask");
  l1 /= count;
  if (beta == 0.0) return l1;
  return (1.0 - beta) * l1 + beta * (1.0 - MeanSsim(warped, target, mask)) / 2.0;
}

double L1Loss(const FeatureMap& pred, const FeatureMap& gt, PixelMask mask) {
  CheckSameShape(pred, gt, mask);
  double sum = 0.0;
  long count = 0;
  for (int i = 0; i < pred.num_pixels(); ++i) {
    if (!Selected(mask, i)) continue;
    sum += std::abs(pred.data()[i] - gt.data()[i]);
    ++count;
  }
  if (count == 0) throw Error(ErrorCode::kEmptyMask, "L1 loss over an empty mask");
  return sum / count;
}

double SilogLoss(const FeatureMap& pred, const FeatureMap& gt, PixelMask mask) {
  CheckSameShape(pred, gt, mask);
  double sum = 0.0;
  double sum_sq = 0.0;
  long count = 0;
  for (int i = 0; i < pred.num_pixels(); ++i) {
    if (!Selected(mask, i)) continue;
    const double p = pred.data()[i];
    const double g = gt.data()[i];
    if (!(p > 0.0) || !(g > 0.0)) {
      throw Error(ErrorCode::kNonPositiveValue,
                  "SILog needs positive values, pixel " + std::to_string(i));
    }
    const double r = std::log(p) - std::log(g);
    sum += r;
    sum_sq += r * r;
    ++count;
  }
  if (count == 0) throw Error(ErrorCode::kEmptyMask, "SILog loss over an empty mask");
  const double mean = sum / count;
  return std::max(sum_sq / count - mean * mean, 0.0);
}

int RankingLabel(double gt_i, double gt_j, double epsilon) {
  const double diff = gt_i - gt_j;
  if (diff > epsilon) return 1;
  if (diff < -epsilon) return -1;
  return 0;
}

std::vector<RankingPair> SampleRankingPairs(const FeatureMap& gt_disparity, PixelMask mask,
                                            int count, double epsilon, std::uint64_t seed) {
  std::vector<int> candidates;
  for (int i = 0; i < gt_disparity.num_pixels(); ++i) {
    if (Selected(mask, i) && gt_disparity.data()[i] > 0.0) candidates.push_back(i);
  }
  if (candidates.empty()) throw Error(ErrorCode::kEmptyMask, "no pixels to draw ranking pairs");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<size_t> pick(0, candidates.size() - 1);
  std::vector<RankingPair> pairs(count);
  for (auto& pair : pairs) {
    pair.i = candidates[pick(rng)];
    pair.j = candidates[pick(rng)];
    pair.label = RankingLabel(gt_disparity.data()[pair.i], gt_disparity.data()[pair.j], epsilon);
  }
  return pairs;
}

double PseudoRankingLoss(const FeatureMap& pred_disparity, std::span<const RankingPair> pairs) {
  double total = 0.0;
  for (const auto& pair : pairs) {
    if (pair.i < 0 || pair.j < 0 || pair.i >= pred_disparity.num_pixels() ||
        pair.j >= pred_disparity.num_pixels()) {
      throw Error(ErrorCode::kIndexOutOfRange, "ranking pair outside the image");
    }
    const double delta = pred_disparity.data()[pair.i] - pred_disparity.data()[pair.j];
    if (pair.label > 0) {
      total += Softplus(-delta);
    } else if (pair.label < 0) {
      total += Softplus(delta);
    } else {
      total += delta * delta;
    }
  }
  return total;
}

double SmoothnessLoss(const FeatureMap& pred_disparity, const FeatureMap& image) {
  if (pred_disparity.height() != image.height() || pred_disparity.width() != image.width()) {
    throw Error(ErrorCode::kShapeMismatch, "disparity and image differ in size");
  }
  const int h = image.height();
  const int w = image.width();
  const int channels = image.channels();
  const auto edge_weight = [&](int v0, int u0, int v1, int u1) {
    double g = 0.0;
    for (int c = 0; c < channels; ++c) g += std::abs(image(v1, u1, c) - image(v0, u0, c));
    return std::exp(-g / channels);
  };
  double loss = 0.0;
  if (w > 1) {
    double sum = 0.0;
    for (int v = 0; v < h; ++v) {
      for (int u = 0; u + 1 < w; ++u) {
        sum += std::abs(pred_disparity(v, u + 1) - pred_disparity(v, u)) * edge_weight(v, u, v, u + 1);
      }
    }
    loss += sum / (static_cast<double>(h) * (w - 1));
  }
  if (h > 1) {
    double sum = 0.0;
    for (int v = 0; v + 1 < h; ++v) {
      for (int u = 0; u < w; ++u) {
        sum += std::abs(pred_disparity(v + 1, u) - pred_disparity(v, u)) * edge_weight(v, u, v + 1, u);
      }
    }
    loss += sum / (static_cast<double>(h - 1) * w);
  }
  return loss;
}

TotalLoss ComputeTotalLoss(const LossTerms& terms, const LossWeights& weights) {
  const std::array<double, 6> values = {terms.l1,         terms.silog,    terms.ranking,
                                        terms.smoothness, terms.temporal, terms.spatial};
  const std::array<double, 6> alphas = {weights.l1,         weights.silog,    weights.ranking,
                                        weights.smoothness, weights.temporal, weights.spatial};
  TotalLoss out;
  for (size_t k = 0; k < values.size(); ++k) {
    if (!std::isfinite(values[k])) {
      throw Error(ErrorCode::kNonFiniteTerm,
                  "loss term '" + std::string(kLossTermNames[k]) + "' is not finite");
    }
    out.weighted[k] = alphas[k] * values[k];
    out.total += out.weighted[k];
  }
  return out;
}

}  // namespace hetdepth
