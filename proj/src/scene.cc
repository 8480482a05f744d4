#include "hetdepth/scene.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Geometry>

#include "hetdepth/error.h"

namespace hetdepth {
namespace {

std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double LatticeValue(std::int64_t ix, std::int64_t iy, std::int64_t iz, std::uint64_t key) {
  std::uint64_t h = SplitMix64(key ^ static_cast<std::uint64_t>(ix));
  h = SplitMix64(h ^ static_cast<std::uint64_t>(iy));
  h = SplitMix64(h ^ static_cast<std::uint64_t>(iz));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

inline double Fade(double t) { return t * t * t * (t * (t * 6.0 - 15.0) + 10.0); }

double ValueNoise(const Eigen::Vector3d& p, std::uint64_t key) {
  const double fx = std::floor(p.x());
  const double fy = std::floor(p.y());
  const double fz = std::floor(p.z());
  const auto ix = static_cast<std::int64_t>(fx);
  const auto iy = static_cast<std::int64_t>(fy);
  const auto iz = static_cast<std::int64_t>(fz);
  const double tx = Fade(p.x() - fx);
  const double ty = Fade(p.y() - fy);
  const double tz = Fade(p.z() - fz);
  double result = 0.0;
  for (int corner = 0; corner < 8; ++corner) {
    const int dx = (corner >> 2) & 1;
    const int dy = (corner >> 1) & 1;
    const int dz = corner & 1;
    const double w = (dx ? tx : 1.0 - tx) * (dy ? ty : 1.0 - ty) * (dz ? tz : 1.0 - tz);
    result += w * LatticeValue(ix + dx, iy + dy, iz + dz, key);
  }
  return result;
}

}  // namespace

void Texture::Evaluate(const Eigen::Vector3d& point, std::span<double> out,
                       double footprint) const {
  const Eigen::Vector3d base = point / scale;
  // Per-octave contrast kept after prefiltering: lattice values average 0.5,
  // so an octave much finer than the footprint contributes just its mean.
  std::array<double, kMaxOctaves> keep{};
  const int n = std::min(octaves, kMaxOctaves);
  for (int octave = 0; octave < n; ++octave) {
    const double ratio = footprint * std::ldexp(1.0, octave) / scale;
    const double t = std::clamp((ratio - kPrefilterStart) / (kPrefilterEnd - kPrefilterStart), 0.0, 1.0);
    keep[octave] = 1.0 - t * t * (3.0 - 2.0 * t);
  }
  for (size_t c = 0; c < out.size(); ++c) {
    double value = 0.0;
    double amplitude = 1.0;
    double total = 0.0;
    double frequency = 1.0;
    for (int octave = 0; octave < n; ++octave) {
      double noise = 0.5;
      if (keep[octave] > 0.0) {
        const std::uint64_t key = SplitMix64(seed * 0x100000001b3ULL + c * 131 + octave);
        noise += keep[octave] * (ValueNoise(base * frequency, key) - 0.5);
      }
      value += amplitude * noise;
      total += amplitude;
      amplitude *= 0.5;
      frequency *= 2.0;
    }
    out[c] = value / total;
  }
}

std::optional<double> Primitive::Intersect(const Eigen::Vector3d& origin,
                                           const Eigen::Vector3d& direction, double t_min) const {
  switch (kind) {
    case PrimitiveKind::kPlane: {
      const double denom = normal.dot(direction);
      if (std::abs(denom) < 1e-15) return std::nullopt;
      const double t = normal.dot(center - origin) / denom;
      if (!(t > t_min)) return std::nullopt;
      const Eigen::Vector3d offset = origin + t * direction - center;
      const Eigen::Vector3d v_axis = normal.cross(u_axis);
      if (std::abs(offset.dot(u_axis)) > half_extent.x() ||
          std::abs(offset.dot(v_axis)) > half_extent.y()) {
        return std::nullopt;
      }
      return t;
    }
    case PrimitiveKind::kBox: {
      double t_enter = -std::numeric_limits<double>::infinity();
      double t_exit = std::numeric_limits<double>::infinity();
      for (int axis = 0; axis < 3; ++axis) {
        if (direction[axis] == 0.0) {
          if (origin[axis] < box_min[axis] || origin[axis] > box_max[axis]) return std::nullopt;
          continue;
        }
        double t0 = (box_min[axis] - origin[axis]) / direction[axis];
        double t1 = (box_max[axis] - origin[axis]) / direction[axis];
        if (t0 > t1) std::swap(t0, t1);
        t_enter = std::max(t_enter, t0);
        t_exit = std::min(t_exit, t1);
      }
      if (t_enter > t_exit) return std::nullopt;
      if (interior) {
        if (t_exit > t_min) return t_exit;
        return std::nullopt;
      }
      if (t_enter > t_min) return t_enter;
      return std::nullopt;
    }
    case PrimitiveKind::kSphere: {
      const Eigen::Vector3d oc = origin - center;
      const double a = direction.squaredNorm();
      const double b = oc.dot(direction);
      const double c = oc.squaredNorm() - radius * radius;
      const double disc = b * b - a * c;
      if (disc < 0.0) return std::nullopt;
      const double sq = std::sqrt(disc);
      // Numerically stable pair of roots.
      const double q = b > 0.0 ? -(b + sq) : -(b - sq);
      double t0 = q / a;
      double t1 = q != 0.0 ? c / q : t0;
      if (t0 > t1) std::swap(t0, t1);
      if (t0 > t_min) return t0;
      if (t1 > t_min) return t1;
      return std::nullopt;
    }
  }
  return std::nullopt;
}

double Primitive::SurfaceDistance(const Eigen::Vector3d& p) const {
  switch (kind) {
    case PrimitiveKind::kPlane:
      return std::abs(normal.dot(p - center));
    case PrimitiveKind::kBox: {
      const Eigen::Vector3d below = (box_min - p).cwiseMax(0.0);
      const Eigen::Vector3d above = (p - box_max).cwiseMax(0.0);
      const double outside = (below + above).norm();
      if (outside > 0.0) return outside;
      return std::min((p - box_min).minCoeff(), (box_max - p).minCoeff());
    }
    case PrimitiveKind::kSphere:
      return std::abs((p - center).norm() - radius);
  }
  return std::numeric_limits<double>::infinity();
}

void SceneSpec::Validate() const {
  if (channels < 1) throw Error(ErrorCode::kInvalidConfig, "scene needs >= 1 channel");
  for (const auto& prim : primitives) {
    const std::string where = "primitive '" + prim.name + "'";
    if (!(prim.texture.scale > 0.0) || prim.texture.octaves < 1 ||
        prim.texture.octaves > kMaxOctaves) {
      throw Error(ErrorCode::kInvalidConfig,
                  where + ": texture scale must be positive and octaves in [1, " +
                      std::to_string(kMaxOctaves) + "]");
    }
    switch (prim.kind) {
      case PrimitiveKind::kPlane:
        if (std::abs(prim.normal.norm() - 1.0) > 1e-9 || std::abs(prim.u_axis.norm() - 1.0) > 1e-9 ||
            std::abs(prim.normal.dot(prim.u_axis)) > 1e-9) {
          throw Error(ErrorCode::kInvalidConfig, where + ": normal and u_axis must be orthonormal");
        }
        if (!(prim.half_extent.minCoeff() > 0.0)) {
          throw Error(ErrorCode::kInvalidConfig, where + ": plane extent must be positive");
        }
        break;
      case PrimitiveKind::kBox:
        if (!((prim.box_max - prim.box_min).minCoeff() > 0.0)) {
          throw Error(ErrorCode::kInvalidConfig, where + ": box needs min < max");
        }
        break;
      case PrimitiveKind::kSphere:
        if (!(prim.radius > 0.0)) {
          throw Error(ErrorCode::kInvalidConfig, where + ": sphere radius must be positive");
        }
        break;
    }
  }
}

std::optional<SceneHit> IntersectScene(const SceneSpec& scene, const Eigen::Vector3d& origin,
                                       const Eigen::Vector3d& direction) {
  std::optional<SceneHit> best;
  for (int i = 0; i < static_cast<int>(scene.primitives.size()); ++i) {
    const auto t = scene.primitives[i].Intersect(origin, direction);
    if (t && (!best || *t < best->t)) best = SceneHit{*t, i, origin + *t * direction};
  }
  return best;
}

namespace {

// World-space size of the pixel footprint on the hit primitive, from the
// half-pixel neighbours of the center ray. 0 when no neighbour hits.
double Footprint(const CameraModel& cam, const Eigen::Matrix3d& rotation,
                 const Eigen::Vector3d& origin, const Primitive& prim, const Eigen::Vector2d& uv,
                 const Eigen::Vector3d& center) {
  auto point = [&](const Eigen::Vector2d& at) -> std::optional<Eigen::Vector3d> {
    const Unprojection unit = cam.UnprojectToCamera(at, 1.0);
    if (!unit.ok()) return std::nullopt;
    const Eigen::Vector3d dir = rotation * unit.point;
    const auto t = prim.Intersect(origin, dir);
    if (!t) return std::nullopt;
    return origin + *t * dir;
  };
  double size = 0.0;
  for (const Eigen::Vector2d& step : {Eigen::Vector2d(0.5, 0.0), Eigen::Vector2d(0.0, 0.5)}) {
    const auto a = point(uv - step);
    const auto b = point(uv + step);
    if (a && b) {
      size = std::max(size, (*b - *a).norm());
    } else if (a || b) {
      size = std::max(size, 2.0 * ((a ? *a : *b) - center).norm());
    }
  }
  return size;
}

template <bool kWithColor>
void Render(const SceneSpec& scene, const CameraModel& cam, FeatureMap* color, FeatureMap& depth) {
  const Eigen::Matrix3d rotation = cam.extrinsics().inverse().topLeftCorner<3, 3>();
  const Eigen::Vector3d origin = cam.extrinsics().Center();
  for (int v = 0; v < cam.height(); ++v) {
    for (int u = 0; u < cam.width(); ++u) {
      const Eigen::Vector2d uv(u, v);
      const Unprojection unit = cam.UnprojectToCamera(uv, 1.0);
      if (!unit.ok()) continue;
      const auto hit = IntersectScene(scene, origin, rotation * unit.point);
      if (!hit) continue;
      depth(v, u) = hit->t;
      if constexpr (kWithColor) {
        const Primitive& prim = scene.primitives[hit->primitive];
        prim.texture.Evaluate(hit->point, color->at(v, u),
                              Footprint(cam, rotation, origin, prim, uv, hit->point));
      }
    }
  }
}

}  // namespace

RenderedView RenderScene(const SceneSpec& scene, const CameraModel& cam) {
  scene.Validate();
  RenderedView out{FeatureMap(cam.height(), cam.width(), scene.channels, MapRole::kColor,
                              scene.background),
                   FeatureMap(cam.height(), cam.width(), 1, MapRole::kDepth)};
  Render<true>(scene, cam, &out.color, out.depth);
  return out;
}

FeatureMap RenderDepth(const SceneSpec& scene, const CameraModel& cam) {
  scene.Validate();
  FeatureMap depth(cam.height(), cam.width(), 1, MapRole::kDepth);
  Render<false>(scene, cam, nullptr, depth);
  return depth;
}

SceneSpec PlaneScene(double distance, int channels, std::uint64_t seed) {
  SceneSpec scene;
  scene.name = "plane";
  scene.channels = channels;
  Primitive wall;
  wall.name = "wall";
  wall.kind = PrimitiveKind::kPlane;
  wall.center = Eigen::Vector3d(distance, 0.0, 0.0);
  wall.normal = -Eigen::Vector3d::UnitX();
  wall.u_axis = Eigen::Vector3d::UnitY();
  wall.half_extent = Eigen::Vector2d(60.0, 60.0);
  wall.texture = Texture{seed, 0.4, 2};
  scene.primitives.push_back(wall);
  return scene;
}

SceneSpec PlaneAndBoxScene(double distance, int channels, std::uint64_t seed) {
  SceneSpec scene = PlaneScene(distance, channels, seed);
  scene.name = "plane_and_box";
  Primitive box;
  box.name = "box";
  box.kind = PrimitiveKind::kBox;
  box.box_min = Eigen::Vector3d(distance - 0.6, -0.5, 0.0);
  box.box_max = Eigen::Vector3d(distance - 0.1, 0.7, 1.2);
  box.texture = Texture{seed + 1, 0.4, 2};
  scene.primitives.push_back(box);
  return scene;
}

}  // namespace hetdepth
