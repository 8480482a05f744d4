#pragma once

#include <span>

#include <Eigen/Core>

#include "hetdepth/feature_map.h"
#include "hetdepth/voxel_grid.h"

namespace hetdepth {

// Interpolating samplers. Each writes map.channels() / grid.channels() values
// into `out` and returns false (with `out` zeroed) when the location lies
// outside the sampleable domain.

// Bilinear with pixel centers at integer coordinates; domain [0,W-1]x[0,H-1].
bool BilinearSample(const FeatureMap& map, const Eigen::Vector2d& uv, std::span<double> out);

// Catmull-Rom bicubic over the same domain as BilinearSample, with edge
// replication for the outer taps. Exact at integer pixel locations.
bool BicubicSample(const FeatureMap& map, const Eigen::Vector2d& uv, std::span<double> out);

// Trilinear in voxel-center coordinates; domain is the grid extents. Between
// the outermost centers and the extents the edge voxels are replicated.
bool TrilinearSample(const VoxelGrid& grid, const Eigen::Vector3d& point, std::span<double> out);

// Adds weight * sample to `accum` instead of overwriting; no-op outside.
bool TrilinearAccumulate(const VoxelGrid& grid, const Eigen::Vector3d& point, double weight,
                         std::span<double> accum);

}  // namespace hetdepth
