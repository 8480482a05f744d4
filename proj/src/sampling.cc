#include "hetdepth/sampling.h"

#include <algorithm>
#include <cmath>

namespace hetdepth {
namespace {

// Splits a continuous coordinate on [0, n-1] into a base index and fraction
// such that base + 1 is still a valid index (or base == 0, t == 0 when n == 1).
inline void Split(double g, int n, int& base, double& t) {
  if (n == 1) {
    base = 0;
    t = 0.0;
    return;
  }
  base = std::min(static_cast<int>(std::floor(g)), n - 2);
  t = g - base;
}

inline void CatmullRom(double t, double w[4]) {
  const double t2 = t * t;
  const double t3 = t2 * t;
  w[0] = 0.5 * (-t3 + 2.0 * t2 - t);
  w[1] = 0.5 * (3.0 * t3 - 5.0 * t2 + 2.0);
  w[2] = 0.5 * (-3.0 * t3 + 4.0 * t2 + t);
  w[3] = 0.5 * (t3 - t2);
}

inline bool InMapDomain(const FeatureMap& map, const Eigen::Vector2d& uv) {
  return uv.x() >= 0.0 && uv.y() >= 0.0 && uv.x() <= map.width() - 1 &&
         uv.y() <= map.height() - 1;
}

// Continuous voxel-center coordinate, clamped into [0, n-1] per axis.
inline bool GridCoordinates(const GridSpec& spec, const Eigen::Vector3d& point, int base[3],
                            double frac[3], int upper[3]) {
  if (!spec.Contains(point)) return false;
  const Eigen::Vector3d cell = spec.cell_size();
  for (int axis = 0; axis < 3; ++axis) {
    const int n = spec.resolution[axis];
    const double g =
        std::clamp((point[axis] - spec.min[axis]) / cell[axis] - 0.5, 0.0, static_cast<double>(n - 1));
    Split(g, n, base[axis], frac[axis]);
    upper[axis] = n == 1 ? base[axis] : base[axis] + 1;
  }
  return true;
}

}  // namespace

bool BilinearSample(const FeatureMap& map, const Eigen::Vector2d& uv, std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  if (!InMapDomain(map, uv)) return false;
  int u0, v0;
  double tu, tv;
  Split(uv.x(), map.width(), u0, tu);
  Split(uv.y(), map.height(), v0, tv);
  const int u1 = map.width() == 1 ? u0 : u0 + 1;
  const int v1 = map.height() == 1 ? v0 : v0 + 1;
  const auto p00 = map.at(v0, u0);
  const auto p01 = map.at(v0, u1);
  const auto p10 = map.at(v1, u0);
  const auto p11 = map.at(v1, u1);
  const double w00 = (1.0 - tu) * (1.0 - tv);
  const double w01 = tu * (1.0 - tv);
  const double w10 = (1.0 - tu) * tv;
  const double w11 = tu * tv;
  for (int c = 0; c < map.channels(); ++c) {
    out[c] = w00 * p00[c] + w01 * p01[c] + w10 * p10[c] + w11 * p11[c];
  }
  return true;
}

bool BicubicSample(const FeatureMap& map, const Eigen::Vector2d& uv, std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  if (!InMapDomain(map, uv)) return false;
  const int u0 = static_cast<int>(std::floor(uv.x()));
  const int v0 = static_cast<int>(std::floor(uv.y()));
  const double tu = uv.x() - u0;
  const double tv = uv.y() - v0;
  double wu[4], wv[4];
  CatmullRom(tu, wu);
  CatmullRom(tv, wv);
  for (int j = 0; j < 4; ++j) {
    if (wv[j] == 0.0) continue;
    const int v = std::clamp(v0 - 1 + j, 0, map.height() - 1);
    for (int i = 0; i < 4; ++i) {
      const double w = wv[j] * wu[i];
      if (w == 0.0) continue;
      const int u = std::clamp(u0 - 1 + i, 0, map.width() - 1);
      const auto px = map.at(v, u);
      for (int c = 0; c < map.channels(); ++c) out[c] += w * px[c];
    }
  }
  return true;
}

bool TrilinearSample(const VoxelGrid& grid, const Eigen::Vector3d& point, std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  return TrilinearAccumulate(grid, point, 1.0, out);
}

bool TrilinearAccumulate(const VoxelGrid& grid, const Eigen::Vector3d& point, double weight,
                         std::span<double> accum) {
  int base[3], upper[3];
  double t[3];
  if (!GridCoordinates(grid.spec(), point, base, t, upper)) return false;
  const int channels = grid.channels();
  for (int corner = 0; corner < 8; ++corner) {
    const int ix = (corner & 4) ? upper[0] : base[0];
    const int iy = (corner & 2) ? upper[1] : base[1];
    const int iz = (corner & 1) ? upper[2] : base[2];
    const double w = weight * ((corner & 4) ? t[0] : 1.0 - t[0]) *
                     ((corner & 2) ? t[1] : 1.0 - t[1]) * ((corner & 1) ? t[2] : 1.0 - t[2]);
    if (w == 0.0) continue;
    const auto voxel = grid.at(ix, iy, iz);
    for (int c = 0; c < channels; ++c) accum[c] += w * voxel[c];
  }
  return true;
}

}  // namespace hetdepth
