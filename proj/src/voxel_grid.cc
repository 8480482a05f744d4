#include "hetdepth/voxel_grid.h"

#include <cmath>

#include "hetdepth/error.h"

namespace hetdepth {

void GridSpec::Validate() const {
  for (int axis = 0; axis < 3; ++axis) {
    if (resolution[axis] < 1) {
      throw Error(ErrorCode::kInvalidConfig, "grid resolution must be >= 1 on every axis");
    }
    if (!(min[axis] < max[axis])) {
      throw Error(ErrorCode::kInvalidConfig, "grid extents need min < max on every axis");
    }
  }
}

Eigen::Vector3d GridSpec::Center(int x, int y, int z) const {
  const Eigen::Vector3d cell = cell_size();
  return min + Eigen::Vector3d(x + 0.5, y + 0.5, z + 0.5).cwiseProduct(cell);
}

Eigen::Vector3d GridSpec::Center(int flat_index) const {
  const int z = flat_index % resolution[2];
  const int y = (flat_index / resolution[2]) % resolution[1];
  const int x = flat_index / (resolution[1] * resolution[2]);
  return Center(x, y, z);
}

int GridSpec::VoxelOf(const Eigen::Vector3d& p) const {
  if (!Contains(p)) return -1;
  const Eigen::Vector3d g = (p - min).cwiseQuotient(cell_size());
  int idx[3];
  for (int axis = 0; axis < 3; ++axis) {
    idx[axis] = std::min(static_cast<int>(std::floor(g[axis])), resolution[axis] - 1);
  }
  return Index(idx[0], idx[1], idx[2]);
}

std::vector<Eigen::Vector4d> VoxelCenters(const GridSpec& spec) {
  spec.Validate();
  std::vector<Eigen::Vector4d> centers;
  centers.reserve(spec.num_voxels());
  for (int x = 0; x < spec.resolution[0]; ++x) {
    for (int y = 0; y < spec.resolution[1]; ++y) {
      for (int z = 0; z < spec.resolution[2]; ++z) {
        const Eigen::Vector3d c = spec.Center(x, y, z);
        centers.emplace_back(c.x(), c.y(), c.z(), 1.0);
      }
    }
  }
  return centers;
}

VoxelGrid::VoxelGrid(const GridSpec& spec, int channels) : spec_(spec), channels_(channels) {
  spec_.Validate();
  if (channels < 1) throw Error(ErrorCode::kInvalidConfig, "voxel grid needs >= 1 channel");
  data_.assign(static_cast<size_t>(spec_.num_voxels()) * channels_, 0.0);
}

}  // namespace hetdepth
