#include "hetdepth/cost_volume.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "hetdepth/error.h"
#include "hetdepth/sampling.h"

namespace hetdepth {
namespace {

// Camera-frame point on the pixel's ray at unit depth; back-projection is
// linear in depth for every model, so bin samples are scaled copies of it.
std::optional<Eigen::Vector3d> UnitDepthRay(const CameraModel& cam, const Eigen::Vector2d& uv,
                                            ProjectionStatus* status = nullptr) {
  const Unprojection unit = cam.UnprojectToCamera(uv, 1.0);
  if (status) *status = unit.status;
  if (!unit.ok()) return std::nullopt;
  return unit.point;
}

void CheckRecalibration(const BinRecalibration* recalibration, int bins) {
  if (recalibration && (static_cast<int>(recalibration->scale.size()) != bins ||
                        static_cast<int>(recalibration->offset.size()) != bins)) {
    throw Error(ErrorCode::kShapeMismatch, "bin recalibration size differs from the bin count");
  }
}

}  // namespace

std::string_view BinSpacingName(BinSpacing spacing) {
  return spacing == BinSpacing::kUniform ? "uniform" : "inverse";
}

std::optional<BinSpacing> BinSpacingFromName(std::string_view name) {
  if (name == "uniform") return BinSpacing::kUniform;
  if (name == "inverse") return BinSpacing::kInverse;
  return std::nullopt;
}

DepthBins::DepthBins(std::vector<double> values) : values_(std::move(values)) {
  if (values_.size() < 2) throw Error(ErrorCode::kBadRange, "need at least two depth bins");
  for (size_t k = 0; k < values_.size(); ++k) {
    if (!(values_[k] > 0.0) || !std::isfinite(values_[k])) {
      throw Error(ErrorCode::kBadRange, "depth bins must be finite and positive");
    }
    if (k > 0 && !(values_[k] > values_[k - 1])) {
      throw Error(ErrorCode::kBadRange, "depth bins must be strictly increasing");
    }
  }
}

int DepthBins::Nearest(double depth, BinSpacing spacing) const {
  int best = 0;
  double best_distance = std::numeric_limits<double>::infinity();
  for (int k = 0; k < size(); ++k) {
    const double distance = spacing == BinSpacing::kInverse
                                ? std::abs(1.0 / values_[k] - 1.0 / depth)
                                : std::abs(values_[k] - depth);
    if (distance < best_distance) {
      best_distance = distance;
      best = k;
    }
  }
  return best;
}

DepthBins MakeDepthBins(double d_min, double d_max, int count, BinSpacing spacing) {
  if (!(d_min > 0.0) || !(d_max > d_min) || !std::isfinite(d_max)) {
    throw Error(ErrorCode::kBadRange, "depth bins need 0 < d_min < d_max");
  }
  if (count < 2) throw Error(ErrorCode::kBadRange, "need at least two depth bins");
  std::vector<double> values(count);
  for (int k = 0; k < count; ++k) {
    const double t = static_cast<double>(k) / (count - 1);
    if (spacing == BinSpacing::kUniform) {
      values[k] = d_min + t * (d_max - d_min);
    } else {
      values[k] = 1.0 / (1.0 / d_min + t * (1.0 / d_max - 1.0 / d_min));
    }
  }
  values.front() = d_min;
  values.back() = d_max;
  return DepthBins(std::move(values));
}

RaySamples SampleRay(const Eigen::Vector2d& uv, const CameraModel& cam, const DepthBins& bins) {
  RaySamples out;
  const auto unit = UnitDepthRay(cam, uv, &out.status);
  if (!unit) return out;
  out.points.reserve(bins.size());
  for (const double depth : bins.values()) {
    out.points.push_back(cam.extrinsics().ToEgo(depth * *unit));
  }
  return out;
}

CostVolume::CostVolume(int height, int width, int bins)
    : height_(height), width_(width), bins_(bins) {
  if (height < 1 || width < 1 || bins < 1) {
    throw Error(ErrorCode::kInvalidConfig, "cost volume dimensions must be positive");
  }
  data_.assign(static_cast<size_t>(height) * width * bins, 0.0);
  valid_.assign(static_cast<size_t>(height) * width, 0);
}

CostVolume ComputeCostVolume(const FeatureMap& features, const CameraModel& cam,
                             const VoxelGrid& grid, const DepthBins& bins) {
  if (features.channels() != grid.channels()) {
    throw Error(ErrorCode::kShapeMismatch,
                "feature map has " + std::to_string(features.channels()) +
                    " channels, grid has " + std::to_string(grid.channels()));
  }
  if (features.width() != cam.width() || features.height() != cam.height()) {
    throw Error(ErrorCode::kShapeMismatch,
                "feature map size differs from image size of camera '" + cam.name() + "'");
  }
  const int channels = features.channels();
  const double norm = 1.0 / std::sqrt(static_cast<double>(channels));
  CostVolume cv(features.height(), features.width(), bins.size());
  std::vector<double> pixel_feature(channels);
  std::vector<double> voxel_feature(channels);
  const Eigen::Matrix3d rotation = cam.extrinsics().inverse().topLeftCorner<3, 3>();
  const Eigen::Vector3d origin = cam.extrinsics().Center();
  for (int v = 0; v < features.height(); ++v) {
    for (int u = 0; u < features.width(); ++u) {
      const Eigen::Vector2d uv(u, v);
      const auto unit = UnitDepthRay(cam, uv);
      if (!unit) continue;
      cv.set_valid(v, u, true);
      BicubicSample(features, uv, pixel_feature);
      const Eigen::Vector3d direction = rotation * *unit;
      auto costs = cv.at(v, u);
      for (int k = 0; k < bins.size(); ++k) {
        if (!TrilinearSample(grid, origin + bins[k] * direction, voxel_feature)) continue;
        double dot = 0.0;
        for (int c = 0; c < channels; ++c) dot += voxel_feature[c] * pixel_feature[c];
        costs[k] = dot * norm;
      }
    }
  }
  return cv;
}

BinRecalibration BinRecalibration::Identity(int bins) {
  return {std::vector<double>(bins, 1.0), std::vector<double>(bins, 0.0)};
}

BinRecalibration BinRecalibration::Seeded(int bins, std::uint64_t seed, double jitter) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-jitter, jitter);
  BinRecalibration out = Identity(bins);
  for (int k = 0; k < bins; ++k) out.scale[k] = 1.0 + dist(rng);
  for (int k = 0; k < bins; ++k) out.offset[k] = dist(rng);
  return out;
}

void BinProbabilities(std::span<const double> costs, const BinRecalibration* recalibration,
                      std::span<double> probabilities) {
  const size_t bins = costs.size();
  double peak = -std::numeric_limits<double>::infinity();
  for (size_t k = 0; k < bins; ++k) {
    double logit = costs[k];
    if (recalibration) logit = recalibration->scale[k] * logit + recalibration->offset[k];
    logit = std::clamp(logit, -kLogitCap, kLogitCap);
    probabilities[k] = logit;
    peak = std::max(peak, logit);
  }
  double total = 0.0;
  for (size_t k = 0; k < bins; ++k) {
    probabilities[k] = std::exp(probabilities[k] - peak);
    total += probabilities[k];
  }
  for (size_t k = 0; k < bins; ++k) probabilities[k] /= total;
}

FeatureMap CenterDepth(const CostVolume& cv, const DepthBins& bins,
                       const BinRecalibration* recalibration) {
  if (cv.bins() != bins.size()) {
    throw Error(ErrorCode::kShapeMismatch, "cost volume and depth bins disagree on D");
  }
  CheckRecalibration(recalibration, cv.bins());
  FeatureMap depth(cv.height(), cv.width(), 1, MapRole::kDepth);
  std::vector<double> p(cv.bins());
  for (int v = 0; v < cv.height(); ++v) {
    for (int u = 0; u < cv.width(); ++u) {
      BinProbabilities(cv.at(v, u), recalibration, p);
      double expected = 0.0;
      for (int k = 0; k < cv.bins(); ++k) expected += p[k] * bins[k];
      depth(v, u) = std::clamp(expected, bins.front(), bins.back());
    }
  }
  return depth;
}

FeatureMap Density(const CostVolume& cv, const BinRecalibration* recalibration) {
  CheckRecalibration(recalibration, cv.bins());
  FeatureMap density(cv.height(), cv.width(), 1);
  std::vector<double> p(cv.bins());
  for (int v = 0; v < cv.height(); ++v) {
    for (int u = 0; u < cv.width(); ++u) {
      BinProbabilities(cv.at(v, u), recalibration, p);
      density(v, u) = *std::max_element(p.begin(), p.end());
    }
  }
  return density;
}

std::vector<int> ArgmaxBin(const CostVolume& cv) {
  std::vector<int> out(static_cast<size_t>(cv.height()) * cv.width());
  for (int v = 0; v < cv.height(); ++v) {
    for (int u = 0; u < cv.width(); ++u) {
      const auto costs = cv.at(v, u);
      out[static_cast<size_t>(v) * cv.width() + u] =
          static_cast<int>(std::max_element(costs.begin(), costs.end()) - costs.begin());
    }
  }
  return out;
}

GaussianField GaussianHeadStub(const FeatureMap& features, const CostVolume& cv,
                               const FeatureMap& density, const FeatureMap& center_depth,
                               const CameraModel& cam, std::uint64_t seed) {
  const int h = features.height();
  const int w = features.width();
  const bool consistent = cv.height() == h && cv.width() == w && density.height() == h &&
                          density.width() == w && center_depth.height() == h &&
                          center_depth.width() == w && density.channels() == 1 &&
                          center_depth.channels() == 1 && cam.width() == w &&
                          cam.height() == h;
  if (!consistent) {
    throw Error(ErrorCode::kShapeMismatch, "Gaussian head inputs disagree in shape");
  }
  const int inputs = features.channels() + cv.bins() + 2;
  std::mt19937_64 rng(seed);
  const double scale = 1.0 / std::sqrt(static_cast<double>(inputs));
  std::uniform_real_distribution<double> dist(-scale, scale);
  Eigen::MatrixXd projection(kGaussianParameterSize, inputs);
  for (int r = 0; r < kGaussianParameterSize; ++r) {
    for (int c = 0; c < inputs; ++c) projection(r, c) = dist(rng);
  }

  GaussianField field{center_depth, density, {}, {}, FeatureMap(h, w, kGaussianParameterSize)};
  field.centers.assign(static_cast<size_t>(h) * w, cam.extrinsics().Center());
  field.valid.assign(static_cast<size_t>(h) * w, 0);
  Eigen::VectorXd x(inputs);
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      const auto f = features.at(v, u);
      const auto costs = cv.at(v, u);
      int i = 0;
      for (const double value : f) x[i++] = value;
      for (const double value : costs) x[i++] = value;
      x[i++] = density(v, u);
      x[i++] = center_depth(v, u);
      const Eigen::VectorXd params = projection * x;
      auto out = field.parameters.at(v, u);
      for (int p = 0; p < kGaussianParameterSize; ++p) out[p] = params[p];

      const size_t index = static_cast<size_t>(v) * w + u;
      if (const auto unit = UnitDepthRay(cam, Eigen::Vector2d(u, v))) {
        field.centers[index] = cam.extrinsics().ToEgo(center_depth(v, u) * *unit);
        field.valid[index] = 1;
      }
    }
  }
  return field;
}

FeatureMap RayPool(const VoxelGrid& grid, const CameraModel& cam, const DepthBins& bins) {
  FeatureMap pooled(cam.height(), cam.width(), grid.channels());
  const double weight = 1.0 / bins.size();
  const Eigen::Matrix3d rotation = cam.extrinsics().inverse().topLeftCorner<3, 3>();
  const Eigen::Vector3d origin = cam.extrinsics().Center();
  for (int v = 0; v < cam.height(); ++v) {
    for (int u = 0; u < cam.width(); ++u) {
      const auto unit = UnitDepthRay(cam, Eigen::Vector2d(u, v));
      if (!unit) continue;
      const Eigen::Vector3d direction = rotation * *unit;
      auto out = pooled.at(v, u);
      for (int k = 0; k < bins.size(); ++k) {
        TrilinearAccumulate(grid, origin + bins[k] * direction, weight, out);
      }
    }
  }
  return pooled;
}

}  // namespace hetdepth
