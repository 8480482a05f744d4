#pragma once

// Independent references shared by the unit tests and the acceptance run.
// Plain loops over raw numbers; only the data containers come from the
// library.

#include <cmath>
#include <vector>

#include <Eigen/Core>

#include "hetdepth/camera.h"
#include "hetdepth/hsf.h"
#include "hetdepth/voxel_grid.h"

namespace hetdepth::oracle {

// Straight-line restatement of the fusion rule, one voxel and channel at a
// time with plain loops.
inline std::vector<double> ReferenceFuse(const std::vector<VoxelGrid>& vols, const OverlapMask& masks,
                                  const FusionTransforms& t, bool wrap) {
  const int views = static_cast<int>(vols.size());
  const int c = vols[0].channels();
  const int n = vols[0].num_voxels();
  std::vector<double> out(static_cast<size_t>(n) * c, 0.0);
  std::vector<int> firsts;
  if (views > 1) {
    for (int i = 0; i + 1 < views; ++i) firsts.push_back(i);
    if (wrap && views > 2) firsts.push_back(views - 1);
  }
  for (int s = 0; s < n; ++s) {
    std::vector<double> vo(c, 0.0), vn(c, 0.0);
    if (views == 1) {
      for (int r = 0; r < c; ++r) {
        double acc = t.non_overlap.bias(r);
        for (int k = 0; k < c; ++k) acc += t.non_overlap.weight(r, k) * vols[0].at(s)[k];
        vn[r] += acc;
      }
    }
    for (const int i : firsts) {
      const int j = (i + 1) % views;
      const bool both = masks.views[i][s] && masks.views[j][s];
      for (int r = 0; r < c; ++r) {
        double ao = t.overlap.bias(r);
        double an = t.non_overlap.bias(r);
        for (int k = 0; k < c; ++k) {
          const double sum = vols[i].at(s)[k] + vols[j].at(s)[k];
          ao += t.overlap.weight(r, k) * (both ? sum : 0.0);
          an += t.non_overlap.weight(r, k) * (both ? 0.0 : sum);
        }
        vo[r] += ao;
        vn[r] += an;
      }
    }
    for (int r = 0; r < c; ++r) {
      double acc = t.mix.bias(r);
      for (int k = 0; k < c; ++k) acc += t.mix.weight(r, k) * vo[k] + t.mix.weight(r, c + k) * vn[k];
      out[static_cast<size_t>(s) * c + r] = acc;
    }
  }
  return out;
}

// Visibility from the raw matrices and each model's closed form.
inline bool OracleVisible(const CameraModel& cam, const Eigen::Vector3d& ego) {
  const Eigen::Matrix4d& e = cam.extrinsics().matrix();
  double pc[3];
  for (int r = 0; r < 3; ++r) {
    pc[r] = e(r, 0) * ego.x() + e(r, 1) * ego.y() + e(r, 2) * ego.z() + e(r, 3);
  }
  const double x = pc[0], y = pc[1], z = pc[2];
  if (!(z > 0)) return false;
  const Intrinsics& k = cam.intrinsics();
  double mx = 0, my = 0;
  const double rho = std::sqrt(x * x + y * y);
  const double theta = std::atan2(rho, z);
  switch (cam.kind()) {
    case CameraKind::kPinhole:
      mx = x / z;
      my = y / z;
      break;
    case CameraKind::kKbFisheye: {
      if (theta > cam.fov_max()) return false;
      const auto& w = cam.kb().omega;
      const double t2 = theta * theta;
      const double phi = theta * (1 + t2 * (w[0] + t2 * (w[1] + t2 * (w[2] + t2 * w[3]))));
      mx = rho > 0 ? phi * x / rho : 0;
      my = rho > 0 ? phi * y / rho : 0;
      break;
    }
    case CameraKind::kMeiFisheye: {
      if (theta > cam.fov_max()) return false;
      const auto& m = cam.mei();
      const double norm = std::sqrt(x * x + y * y + z * z);
      const double a = x / (z + m.epsilon * norm);
      const double b = y / (z + m.epsilon * norm);
      const double r2 = a * a + b * b;
      const double scale = 1 + m.omega1 * r2 + m.omega2 * r2 * r2;
      mx = a * scale;
      my = b * scale;
      break;
    }
  }
  const double u = k.fx * mx + k.cx;
  const double v = k.fy * my + k.cy;
  return u >= 0 && v >= 0 && u <= k.width - 1 && v <= k.height - 1;
}

}  // namespace hetdepth::oracle
