#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "hetdepth/camera.h"
#include "hetdepth/feature_map.h"

namespace hetdepth {

// Band-limited value noise evaluated at 3D surface points: a smooth
// interpolation of hashed lattice values with `scale` meters between lattice
// nodes, summed over octaves. Every channel is independent; values lie in
// [0, 1].
//
// `footprint` is the world-space width of the pixel that looks at the point.
// Octaves whose lattice spacing is close to or below it are faded towards
// their mean (a smoothstep in footprint / spacing between kPrefilterStart and
// kPrefilterEnd), so grazing views render the area average instead of
// aliased point samples. 0 gives the unfiltered texture.
inline constexpr double kPrefilterStart = 0.25;
inline constexpr double kPrefilterEnd = 1.0;
inline constexpr int kMaxOctaves = 16;

struct Texture {
  std::uint64_t seed = 1;
  double scale = 0.5;
  int octaves = 2;

  void Evaluate(const Eigen::Vector3d& point, std::span<double> out,
                double footprint = 0.0) const;
};

enum class PrimitiveKind { kPlane, kBox, kSphere };

struct Primitive {
  std::string name;
  PrimitiveKind kind = PrimitiveKind::kPlane;
  Texture texture;

  // Plane: rectangle centered at `center` spanned by unit `u_axis` and
  // normal x u_axis, half sizes `half_extent`.
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  Eigen::Vector3d normal = Eigen::Vector3d::UnitX();
  Eigen::Vector3d u_axis = Eigen::Vector3d::UnitY();
  Eigen::Vector2d half_extent{1.0, 1.0};

  // Box: axis-aligned; `interior` boxes are rooms seen from inside.
  Eigen::Vector3d box_min = Eigen::Vector3d::Zero();
  Eigen::Vector3d box_max = Eigen::Vector3d::Ones();
  bool interior = false;

  // Sphere.
  double radius = 1.0;

  // Smallest t > t_min with origin + t * direction on the surface.
  std::optional<double> Intersect(const Eigen::Vector3d& origin, const Eigen::Vector3d& direction,
                                  double t_min = 1e-9) const;
  // Distance from p to the surface; used by round-trip checks.
  double SurfaceDistance(const Eigen::Vector3d& p) const;
};

struct SceneSpec {
  std::string name = "scene";
  int channels = 3;
  double background = 0.0;
  std::vector<Primitive> primitives;

  // Throws Error(kInvalidConfig) on degenerate primitives.
  void Validate() const;
};

struct SceneHit {
  double t = 0.0;
  int primitive = -1;
  Eigen::Vector3d point = Eigen::Vector3d::Zero();
};

std::optional<SceneHit> IntersectScene(const SceneSpec& scene, const Eigen::Vector3d& origin,
                                       const Eigen::Vector3d& direction);

struct RenderedView {
  FeatureMap color;  // scene.channels channels in [0, 1], background elsewhere
  FeatureMap depth;  // camera-frame z, 0 where no primitive is hit
};

// Casts each pixel's ray (the camera's back-projection at unit depth, so the
// hit parameter is the camera-frame depth) against the scene.
RenderedView RenderScene(const SceneSpec& scene, const CameraModel& cam);

// Depth-only variant of RenderScene.
FeatureMap RenderDepth(const SceneSpec& scene, const CameraModel& cam);

// Built-in scenes, all in the ego frame (x forward, y left, z up).
// Fronto-parallel textured wall at x = distance, seen by forward cameras.
SceneSpec PlaneScene(double distance, int channels, std::uint64_t seed = 7);
// The plane scene plus a textured box standing in front of the wall.
SceneSpec PlaneAndBoxScene(double distance, int channels, std::uint64_t seed = 7);

}  // namespace hetdepth
