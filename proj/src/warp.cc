#include "hetdepth/warp.h"

#include <cmath>
#include <string>

#include "hetdepth/error.h"
#include "hetdepth/sampling.h"

namespace hetdepth {
namespace {

void CheckMatches(const FeatureMap& map, const CameraModel& cam, const char* what) {
  if (map.width() != cam.width() || map.height() != cam.height()) {
    throw Error(ErrorCode::kShapeMismatch,
                std::string(what) + " size differs from image size of camera '" + cam.name() +
                    "'");
  }
}

// Shared per-pixel loop; `to_source` maps the back-projected ego point into the
// frame the source camera observes.
template <typename Transform>
WarpResult Warp(const FeatureMap& source_image, const CameraModel& source_cam,
                const CameraModel& target_cam, const FeatureMap& target_depth,
                Transform&& to_source) {
  CheckMatches(source_image, source_cam, "source image");
  CheckMatches(target_depth, target_cam, "target depth");
  const int h = target_cam.height();
  const int w = target_cam.width();
  WarpResult out{FeatureMap(h, w, source_image.channels(), source_image.role()),
                 FeatureMap(h, w, 2), std::vector<std::uint8_t>(static_cast<size_t>(h) * w, 0),
                 0};
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      const double depth = target_depth(v, u);
      if (!(depth > 0.0) || !std::isfinite(depth)) continue;
      const Unprojection back = target_cam.Unproject(Eigen::Vector2d(u, v), depth);
      if (!back.ok()) continue;
      const auto uv = source_cam.ProjectVisible(to_source(back.point));
      if (!uv) continue;
      BilinearSample(source_image, *uv, out.image.at(v, u));
      out.coordinates(v, u, 0) = uv->x();
      out.coordinates(v, u, 1) = uv->y();
      out.valid[static_cast<size_t>(v) * w + u] = 1;
      ++out.num_valid;
    }
  }
  return out;
}

}  // namespace

PosePair::PosePair() : matrix_(Eigen::Matrix4d::Identity()) {}

PosePair::PosePair(const Eigen::Matrix4d& t_to_t_prime) : matrix_(t_to_t_prime) {
  // Reuses the rigid-transform validation of camera extrinsics.
  matrix_ = Extrinsics(t_to_t_prime).matrix();
}

PosePair PosePair::Translation(const Eigen::Vector3d& translation) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topRightCorner<3, 1>() = translation;
  return PosePair(m);
}

PosePair PosePair::Inverse() const { return PosePair(Extrinsics(matrix_).inverse()); }

WarpResult SpatialWarp(const FeatureMap& source_image, const CameraModel& source_cam,
                       const CameraModel& target_cam, const FeatureMap& target_depth) {
  return Warp(source_image, source_cam, target_cam, target_depth,
              [](const Eigen::Vector3d& p) { return p; });
}

WarpResult TemporalWarp(const FeatureMap& image_t_prime, const CameraModel& cam,
                        const FeatureMap& depth_t, const PosePair& pose) {
  return Warp(image_t_prime, cam, cam, depth_t,
              [&pose](const Eigen::Vector3d& p) { return pose.Apply(p); });
}

}  // namespace hetdepth
