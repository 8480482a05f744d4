#include "hetdepth/lifting.h"

#include <string>

#include "hetdepth/error.h"
#include "hetdepth/sampling.h"

namespace hetdepth {

VoxelGrid LiftFeatures(const FeatureMap& map, const CameraModel& cam, const GridSpec& spec) {
  if (map.width() != cam.width() || map.height() != cam.height()) {
    throw Error(ErrorCode::kShapeMismatch,
                "feature map size differs from image size of camera '" + cam.name() + "'");
  }
  VoxelGrid volume(spec, map.channels());
  for (int i = 0; i < spec.num_voxels(); ++i) {
    const auto uv = cam.ProjectVisible(spec.Center(i));
    if (uv) BilinearSample(map, *uv, volume.at(i));
  }
  return volume;
}

std::vector<VoxelGrid> LiftFeatures(std::span<const FeatureMap> maps,
                                    std::span<const CameraModel> cams, const GridSpec& spec) {
  if (maps.size() != cams.size()) {
    throw Error(ErrorCode::kShapeMismatch, "need exactly one feature map per camera");
  }
  spec.Validate();
  std::vector<VoxelGrid> volumes;
  volumes.reserve(cams.size());
  for (size_t i = 0; i < cams.size(); ++i) {
    if (maps[i].channels() != maps.front().channels()) {
      throw Error(ErrorCode::kShapeMismatch,
                  "feature map " + std::to_string(i) + " has a different channel count");
    }
    volumes.push_back(LiftFeatures(maps[i], cams[i], spec));
  }
  return volumes;
}

}  // namespace hetdepth
