#pragma once

#include <span>
#include <vector>

#include "hetdepth/camera.h"
#include "hetdepth/feature_map.h"
#include "hetdepth/voxel_grid.h"

namespace hetdepth {

// One volume per camera: each voxel center is projected with the camera's own
// model and bilinearly samples that camera's map when
// CameraModel::ProjectVisible accepts it; every other voxel stays zero.
// Throws Error(kShapeMismatch) when the counts differ or the maps disagree in
// channel count or image size.
std::vector<VoxelGrid> LiftFeatures(std::span<const FeatureMap> maps,
                                    std::span<const CameraModel> cams, const GridSpec& spec);

VoxelGrid LiftFeatures(const FeatureMap& map, const CameraModel& cam, const GridSpec& spec);

}  // namespace hetdepth
