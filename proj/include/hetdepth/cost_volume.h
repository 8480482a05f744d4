#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "hetdepth/camera.h"
#include "hetdepth/feature_map.h"
#include "hetdepth/voxel_grid.h"

namespace hetdepth {

enum class BinSpacing { kUniform, kInverse };

std::string_view BinSpacingName(BinSpacing spacing);
std::optional<BinSpacing> BinSpacingFromName(std::string_view name);

// Strictly increasing positive candidate depths in meters.
class DepthBins {
 public:
  // Throws Error(kBadRange) unless the values are positive and strictly
  // increasing with at least two entries.
  explicit DepthBins(std::vector<double> values);

  const std::vector<double>& values() const { return values_; }
  int size() const { return static_cast<int>(values_.size()); }
  double operator[](int k) const { return values_[k]; }
  double front() const { return values_.front(); }
  double back() const { return values_.back(); }
  // Index of the bin closest to `depth` (in inverse depth for inverse
  // spacing, in depth otherwise).
  int Nearest(double depth, BinSpacing spacing) const;

 private:
  std::vector<double> values_;
};

// Endpoints included; inverse spacing is uniform in 1/d. Throws
// Error(kBadRange) unless 0 < d_min < d_max and count >= 2.
DepthBins MakeDepthBins(double d_min, double d_max, int count, BinSpacing spacing);

// Back-projection of `uv` at every bin depth, ego frame. Returns the first
// failing status when the camera cannot back-project the pixel.
struct RaySamples {
  std::vector<Eigen::Vector3d> points;
  ProjectionStatus status = ProjectionStatus::kOk;

  bool ok() const { return status == ProjectionStatus::kOk; }
};

RaySamples SampleRay(const Eigen::Vector2d& uv, const CameraModel& cam, const DepthBins& bins);

// H x W x D similarity tensor plus a per-pixel flag for pixels whose ray could
// be back-projected. Costs of invalid pixels are zero.
class CostVolume {
 public:
  CostVolume(int height, int width, int bins);

  int height() const { return height_; }
  int width() const { return width_; }
  int bins() const { return bins_; }

  std::span<double> at(int v, int u) {
    return {data_.data() + Offset(v, u), static_cast<size_t>(bins_)};
  }
  std::span<const double> at(int v, int u) const {
    return {data_.data() + Offset(v, u), static_cast<size_t>(bins_)};
  }
  bool valid(int v, int u) const { return valid_[static_cast<size_t>(v) * width_ + u] != 0; }
  void set_valid(int v, int u, bool valid) {
    valid_[static_cast<size_t>(v) * width_ + u] = valid ? 1 : 0;
  }
  const std::vector<double>& data() const { return data_; }
  const std::vector<std::uint8_t>& valid_mask() const { return valid_; }

 private:
  size_t Offset(int v, int u) const { return (static_cast<size_t>(v) * width_ + u) * bins_; }

  int height_;
  int width_;
  int bins_;
  std::vector<double> data_;
  std::vector<std::uint8_t> valid_;
};

// C[v,u,k] = <grid(ray(u,v)[k]), image(u,v)> / sqrt(C); the voxel side is
// gathered trilinearly (zero outside the grid), the image side bicubically.
// Throws Error(kShapeMismatch) when channels or image sizes disagree.
CostVolume ComputeCostVolume(const FeatureMap& features, const CameraModel& cam,
                             const VoxelGrid& grid, const DepthBins& bins);

// Per-bin affine recalibration of costs before the softmax, standing in for
// the learned per-pixel network. Identity unless seeded.
struct BinRecalibration {
  std::vector<double> scale;
  std::vector<double> offset;

  static BinRecalibration Identity(int bins);
  // scale ~ U[1 - jitter, 1 + jitter], offset ~ U[-jitter, jitter].
  static BinRecalibration Seeded(int bins, std::uint64_t seed, double jitter = 0.1);
};

// Logits are clamped to +-kLogitCap before the softmax.
inline constexpr double kLogitCap = 50.0;

// Softmax weights of one pixel's recalibrated, clamped costs.
void BinProbabilities(std::span<const double> costs, const BinRecalibration* recalibration,
                      std::span<double> probabilities);

// Softmax-weighted mean of the bin depths.
FeatureMap CenterDepth(const CostVolume& cv, const DepthBins& bins,
                       const BinRecalibration* recalibration = nullptr);
// Peak softmax probability.
FeatureMap Density(const CostVolume& cv, const BinRecalibration* recalibration = nullptr);
// Index of the largest cost per pixel (first one on ties).
std::vector<int> ArgmaxBin(const CostVolume& cv);

// Per-pixel Gaussian primitive derived from the cost volume.
struct GaussianField {
  FeatureMap center_depth;               // meters
  FeatureMap density;                    // in [1/D, 1]
  std::vector<Eigen::Vector3d> centers;  // ego frame, row-major pixels
  std::vector<std::uint8_t> valid;       // center could be back-projected
  FeatureMap parameters;                 // covariance + color placeholder block
};

inline constexpr int kGaussianParameterSize = 10;  // 3 scale, 4 rotation, 3 color

// Stand-in for the learned Gaussian head: concatenates features, costs,
// density and depth per pixel and applies a seeded linear projection to
// kGaussianParameterSize values. Centers sit on each pixel's ray at its center
// depth. Throws Error(kShapeMismatch) on inconsistent shapes.
GaussianField GaussianHeadStub(const FeatureMap& features, const CostVolume& cv,
                               const FeatureMap& density, const FeatureMap& center_depth,
                               const CameraModel& cam, std::uint64_t seed = 0);

// Mean of the D trilinear grid samples along each pixel's ray, out-of-grid
// samples counting as zero. Pixels that cannot be back-projected get zero.
FeatureMap RayPool(const VoxelGrid& grid, const CameraModel& cam, const DepthBins& bins);

}  // namespace hetdepth
