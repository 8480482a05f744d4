#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "hetdepth/camera.h"
#include "hetdepth/feature_map.h"

namespace hetdepth {

// Rigid ego motion between two timestamps: maps ego-frame coordinates at t to
// ego-frame coordinates at t'.
class PosePair {
 public:
  PosePair();
  // Throws Error(kInvalidConfig) unless the matrix is a proper rigid transform.
  explicit PosePair(const Eigen::Matrix4d& t_to_t_prime);

  static PosePair Translation(const Eigen::Vector3d& translation);

  const Eigen::Matrix4d& matrix() const { return matrix_; }
  PosePair Inverse() const;
  Eigen::Vector3d Apply(const Eigen::Vector3d& p) const {
    return matrix_.topLeftCorner<3, 3>() * p + matrix_.topRightCorner<3, 1>();
  }

 private:
  Eigen::Matrix4d matrix_;
};

struct WarpResult {
  FeatureMap image;                  // target-view geometry, source-view content
  FeatureMap coordinates;            // 2 channels: sampled (u, v) in the source image
  std::vector<std::uint8_t> valid;   // row-major per target pixel
  int num_valid = 0;
};

// Synthesizes the target view from the source image: every target pixel with
// positive depth is back-projected with the target camera, projected with the
// source camera, and the source image is sampled bilinearly there. Pixels
// whose composition fails, lands behind the source camera or leaves the source
// image are invalid (zero). Throws Error(kShapeMismatch) when the depth map or
// image does not match its camera.
WarpResult SpatialWarp(const FeatureMap& source_image, const CameraModel& source_cam,
                       const CameraModel& target_cam, const FeatureMap& target_depth);

// Same camera, two timestamps: pixels of frame t are back-projected at
// `depth_t`, moved by `pose` and re-projected into frame t', whose image is
// sampled.
WarpResult TemporalWarp(const FeatureMap& image_t_prime, const CameraModel& cam,
                        const FeatureMap& depth_t, const PosePair& pose);

}  // namespace hetdepth
