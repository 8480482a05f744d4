#pragma once

#include <array>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace hetdepth {

// Axis-aligned ego-frame lattice. Voxel (x, y, z) has its center at
// min + (index + 0.5) * cell_size.
struct GridSpec {
  Eigen::Vector3d min{-12.0, -12.0, -2.0};
  Eigen::Vector3d max{12.0, 12.0, 4.0};
  std::array<int, 3> resolution{48, 48, 12};

  // Throws Error(kInvalidConfig) unless every count is >= 1 and min < max.
  void Validate() const;

  int num_voxels() const { return resolution[0] * resolution[1] * resolution[2]; }
  Eigen::Vector3d cell_size() const {
    return (max - min).cwiseQuotient(
        Eigen::Vector3d(resolution[0], resolution[1], resolution[2]));
  }
  // Flat index in x-major, then y, then z order.
  int Index(int x, int y, int z) const { return (x * resolution[1] + y) * resolution[2] + z; }
  Eigen::Vector3d Center(int x, int y, int z) const;
  Eigen::Vector3d Center(int flat_index) const;
  bool Contains(const Eigen::Vector3d& p) const {
    return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
  }
  // Flat index of the voxel containing p, or -1 outside the extents.
  int VoxelOf(const Eigen::Vector3d& p) const;

  bool operator==(const GridSpec& other) const {
    return min == other.min && max == other.max && resolution == other.resolution;
  }
};

// All voxel centers as homogeneous points, in flat-index order.
std::vector<Eigen::Vector4d> VoxelCenters(const GridSpec& spec);

// Dense per-voxel feature storage, voxel-major with C contiguous channels.
class VoxelGrid {
 public:
  VoxelGrid(const GridSpec& spec, int channels);

  const GridSpec& spec() const { return spec_; }
  int channels() const { return channels_; }
  int num_voxels() const { return spec_.num_voxels(); }

  std::span<double> at(int flat_index) {
    return {data_.data() + static_cast<size_t>(flat_index) * channels_,
            static_cast<size_t>(channels_)};
  }
  std::span<const double> at(int flat_index) const {
    return {data_.data() + static_cast<size_t>(flat_index) * channels_,
            static_cast<size_t>(channels_)};
  }
  std::span<double> at(int x, int y, int z) { return at(spec_.Index(x, y, z)); }
  std::span<const double> at(int x, int y, int z) const { return at(spec_.Index(x, y, z)); }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool SameShape(const VoxelGrid& other) const {
    return spec_ == other.spec_ && channels_ == other.channels_;
  }

 private:
  GridSpec spec_;
  int channels_;
  std::vector<double> data_;
};

}  // namespace hetdepth
