#include "hetdepth/losses.h"

#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "hetdepth/error.h"
#include "hetdepth/feature_map.h"
#include "hetdepth/metrics.h"

namespace hetdepth {
namespace {

FeatureMap Row(std::initializer_list<double> values, MapRole role = MapRole::kDepth) {
  FeatureMap map(1, static_cast<int>(values.size()), 1, role);
  std::copy(values.begin(), values.end(), map.data().begin());
  return map;
}

ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kIo;
}

TEST(L1Loss, MeanAbsoluteResidual) {
  // Residuals +1 and -3.
  EXPECT_DOUBLE_EQ(L1Loss(Row({2, 0}), Row({1, 3})), 2.0);
  const std::vector<std::uint8_t> first{1, 0};
  EXPECT_DOUBLE_EQ(L1Loss(Row({2, 0}), Row({1, 3}), first), 1.0);
  const std::vector<std::uint8_t> none{0, 0};
  EXPECT_EQ(CodeOf([&] { L1Loss(Row({2, 0}), Row({1, 3}), none); }), ErrorCode::kEmptyMask);
  EXPECT_EQ(CodeOf([&] { L1Loss(Row({2, 0}), Row({1, 3, 4})); }), ErrorCode::kShapeMismatch);
}

TEST(SilogLoss, VarianceOfLogRatio) {
  // log ratios +ln2 and -ln2: variance (ln 2)^2.
  EXPECT_NEAR(SilogLoss(Row({2, 0.5}), Row({1, 1})), std::log(2.0) * std::log(2.0), 1e-15);
  // A global scale leaves it unchanged.
  EXPECT_NEAR(SilogLoss(Row({6, 1.5}), Row({1, 1})), std::log(2.0) * std::log(2.0), 1e-14);
  EXPECT_NEAR(SilogLoss(Row({3, 6, 9}), Row({1, 2, 3})), 0.0, 1e-15);
  EXPECT_EQ(CodeOf([&] { SilogLoss(Row({1, 0}), Row({1, 1})); }), ErrorCode::kNonPositiveValue);
  EXPECT_EQ(CodeOf([&] { SilogLoss(Row({1, 1}), Row({1, -1})); }), ErrorCode::kNonPositiveValue);
  const std::vector<std::uint8_t> skip_bad{1, 0};
  EXPECT_NO_THROW(SilogLoss(Row({1, 0}), Row({1, 1}), skip_bad));
}

TEST(Ranking, Labels) {
  EXPECT_EQ(RankingLabel(0.5, 0.4, 0.03), 1);
  EXPECT_EQ(RankingLabel(0.4, 0.5, 0.03), -1);
  EXPECT_EQ(RankingLabel(0.5, 0.49, 0.03), 0);
}

TEST(Ranking, LossPerLabel) {
  const FeatureMap pred = Row({4, 1}, MapRole::kDisparity);  // delta = 3
  const std::vector<RankingPair> closer{{0, 1, 1}};
  const std::vector<RankingPair> farther{{0, 1, -1}};
  const std::vector<RankingPair> equal{{0, 1, 0}};
  EXPECT_NEAR(PseudoRankingLoss(pred, closer), std::log1p(std::exp(-3.0)), 1e-15);
  EXPECT_NEAR(PseudoRankingLoss(pred, farther), std::log1p(std::exp(3.0)), 1e-12);
  EXPECT_NEAR(PseudoRankingLoss(pred, equal), 9.0, 1e-15);
  const std::vector<RankingPair> all{{0, 1, 1}, {0, 1, -1}, {0, 1, 0}};
  EXPECT_NEAR(PseudoRankingLoss(pred, all),
              std::log1p(std::exp(-3.0)) + std::log1p(std::exp(3.0)) + 9.0, 1e-12);
  const std::vector<RankingPair> bad{{0, 2, 1}};
  EXPECT_EQ(CodeOf([&] { PseudoRankingLoss(pred, bad); }), ErrorCode::kIndexOutOfRange);
}

TEST(Ranking, SamplingIsSeededAndMasked) {
  FeatureMap gt(8, 8, 1, MapRole::kDisparity);
  for (int i = 0; i < 64; ++i) gt.data()[i] = 0.01 * i;
  std::vector<std::uint8_t> mask(64, 0);
  for (int i = 0; i < 64; i += 3) mask[i] = 1;
  const auto a = SampleRankingPairs(gt, mask, 200, 0.03, 5);
  const auto b = SampleRankingPairs(gt, mask, 200, 0.03, 5);
  ASSERT_EQ(a.size(), 200u);
  for (size_t k = 0; k < a.size(); ++k) {
    EXPECT_EQ(a[k].i, b[k].i);
    EXPECT_EQ(a[k].j, b[k].j);
    EXPECT_TRUE(mask[a[k].i] && mask[a[k].j]);
    EXPECT_EQ(a[k].label, RankingLabel(gt.data()[a[k].i], gt.data()[a[k].j], 0.03));
  }
  const std::vector<std::uint8_t> none(64, 0);
  EXPECT_EQ(CodeOf([&] { SampleRankingPairs(gt, none, 10, 0.03, 5); }), ErrorCode::kEmptyMask);
}

TEST(Smoothness, RampOnFlatImage) {
  const int h = 6, w = 9;
  const double g = -0.25;
  FeatureMap disparity(h, w, 1, MapRole::kDisparity);
  FeatureMap image(h, w, 3, MapRole::kColor, 0.4);
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) disparity(v, u) = 1.0 + g * u;
  }
  EXPECT_NEAR(SmoothnessLoss(disparity, image), std::abs(g), 1e-15);
}

TEST(Smoothness, ImageEdgeSuppressesPenalty) {
  const int h = 4, w = 10, k = 5;
  const double step = 0.8;
  FeatureMap disparity(h, w, 1, MapRole::kDisparity);
  FeatureMap image(h, w, 2, MapRole::kColor);
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      disparity(v, u) = u >= k ? 2.0 : 1.0;
      image(v, u, 0) = u >= k ? step : 0.0;
      image(v, u, 1) = 0.0;  // gradient averaged over channels: step / 2
    }
  }
  // One jump per row out of w - 1 horizontal differences; none vertically.
  EXPECT_NEAR(SmoothnessLoss(disparity, image), std::exp(-step / 2) / (w - 1), 1e-15);
  FeatureMap flat(h, w, 2, MapRole::kColor);
  EXPECT_NEAR(SmoothnessLoss(disparity, flat), 1.0 / (w - 1), 1e-15);
}

TEST(Ssim, ConstantPatchesClosedForm) {
  const double a = 0.3, b = 0.7;
  const FeatureMap x(5, 5, 2, MapRole::kColor, a);
  const FeatureMap y(5, 5, 2, MapRole::kColor, b);
  const double ssim = (2 * a * b + kSsimC1) / (a * a + b * b + kSsimC1);
  EXPECT_NEAR(MeanSsim(x, y), ssim, 1e-14);
  EXPECT_NEAR(MeanSsim(x, x), 1.0, 1e-14);
  EXPECT_NEAR(PhotometricLoss(x, y), 0.15 * (b - a) + 0.85 * (1 - ssim) / 2, 1e-14);
  EXPECT_NEAR(PhotometricLoss(x, y, {}, 0.0), b - a, 1e-14);
  EXPECT_NEAR(PhotometricLoss(x, x), 0.0, 1e-14);
}

TEST(Ssim, SinglePixelWindowUnderMask) {
  // A lone masked pixel sees only itself: zero variances, constant-patch form.
  FeatureMap x(3, 3, 1, MapRole::kColor, 0.9);
  FeatureMap y(3, 3, 1, MapRole::kColor, 0.1);
  x(1, 1) = 0.2;
  y(1, 1) = 0.6;
  std::vector<std::uint8_t> mask(9, 0);
  mask[4] = 1;
  EXPECT_NEAR(MeanSsim(x, y, mask), (2 * 0.2 * 0.6 + kSsimC1) / (0.04 + 0.36 + kSsimC1), 1e-14);
}

TEST(TotalLoss, WeightedSum) {
  const LossTerms unit{1, 1, 1, 1, 1, 1};
  const TotalLoss total = ComputeTotalLoss(unit);
  EXPECT_NEAR(total.total, 1.232, 1e-15);
  EXPECT_DOUBLE_EQ(total.weighted[1], 0.1);
  EXPECT_DOUBLE_EQ(total.weighted[5], 0.03);
  LossTerms bad = unit;
  bad.temporal = std::numeric_limits<double>::quiet_NaN();
  try {
    ComputeTotalLoss(bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNonFiniteTerm);
    EXPECT_NE(std::string(e.what()).find("temporal"), std::string::npos);
  }
  bad.temporal = std::numeric_limits<double>::infinity();
  EXPECT_EQ(CodeOf([&] { ComputeTotalLoss(bad); }), ErrorCode::kNonFiniteTerm);
}

TEST(Metrics, HandExample) {
  const DepthMetrics m = ComputeMetrics(Row({1, 2}), Row({1, 1}));
  EXPECT_EQ(m.count, 2);
  EXPECT_DOUBLE_EQ(m.abs_rel, 0.5);
  EXPECT_NEAR(m.rmse, std::sqrt(0.5), 1e-15);
  EXPECT_DOUBLE_EQ(m.delta1, 0.5);
}

TEST(Metrics, SkipsInvalidGroundTruth) {
  const DepthMetrics m = ComputeMetrics(Row({1, 5, 2.4}), Row({1, 0, 2}));
  EXPECT_EQ(m.count, 2);
  EXPECT_NEAR(m.abs_rel, 0.1, 1e-15);
  EXPECT_DOUBLE_EQ(m.delta1, 1.0);  // 1.2 < 1.25
  EXPECT_EQ(CodeOf([&] { ComputeMetrics(Row({1}), Row({0})); }), ErrorCode::kEmptyMask);
  EXPECT_EQ(CodeOf([&] { ComputeMetrics(Row({1}), Row({1, 1})); }), ErrorCode::kShapeMismatch);
}

}  // namespace
}  // namespace hetdepth
