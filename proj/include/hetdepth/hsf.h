#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "hetdepth/camera.h"
#include "hetdepth/voxel_grid.h"

namespace hetdepth {

// Per-camera visibility of every voxel center, in rig order.
struct OverlapMask {
  std::vector<std::vector<std::uint8_t>> views;

  int num_views() const { return static_cast<int>(views.size()); }
  int num_voxels() const { return views.empty() ? 0 : static_cast<int>(views.front().size()); }
  bool Overlaps(int i, int j, int voxel) const { return views[i][voxel] && views[j][voxel]; }
  int CountVisible(int view) const;
  int CountOverlap(int i, int j) const;
};

// mask[i][s] = CameraModel::ProjectVisible(s) succeeds for camera i. Throws
// Error(kInvalidConfig) for an empty camera list.
OverlapMask ComputeMasks(std::span<const CameraModel> cams, const GridSpec& spec);

// Affine map y = W x + b applied voxel-wise; stand-in for the learned
// per-voxel networks of the fusion stage.
struct FeatureTransform {
  Eigen::MatrixXd weight;
  Eigen::VectorXd bias;

  int in_channels() const { return static_cast<int>(weight.cols()); }
  int out_channels() const { return static_cast<int>(weight.rows()); }

  static FeatureTransform Identity(int channels);
  // [I I]: sums the two halves of a 2C input.
  static FeatureTransform SumHalves(int channels);
  // Entries uniform in [-scale, scale] from a mt19937_64 seeded with `seed`.
  static FeatureTransform Seeded(int in_channels, int out_channels, std::uint64_t seed,
                                 double scale = 0.5);
};

struct FusionTransforms {
  FeatureTransform overlap;      // C -> C
  FeatureTransform non_overlap;  // C -> C
  FeatureTransform mix;          // 2C -> C

  // Identity on both paths, mix = SumHalves.
  static FusionTransforms Identity(int channels);
  static FusionTransforms Seeded(int channels, std::uint64_t seed);
};

struct FusionOptions {
  // Also pair the last view with the first.
  bool wrap_around = false;
};

// Mixed volume from view volumes in rig order. For each consecutive pair
// (i, i+1): the summed pair is split by the pairwise overlap mask, each half
// goes through its own transform and accumulates into V_O or V_N; finally
// V_mix = mix(concat(V_O, V_N)). A single view has no pairs and uses
// V_N = non_overlap(V_1). Throws Error(kShapeMismatch) on inconsistent shapes.
VoxelGrid Fuse(std::span<const VoxelGrid> volumes, const OverlapMask& masks,
               const FusionTransforms& transforms, const FusionOptions& options = {});

// Copies of `volumes` where, on voxels seen by both views, the source view's
// features are replaced by the replacement view's. Throws
// Error(kIndexOutOfRange) for invalid view indices.
std::vector<VoxelGrid> OverlapAblationSwap(std::span<const VoxelGrid> volumes,
                                           const OverlapMask& masks, int source_view,
                                           int replacement_view);

}  // namespace hetdepth
