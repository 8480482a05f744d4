#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "hetdepth/camera.h"
#include "hetdepth/cost_volume.h"
#include "hetdepth/losses.h"
#include "hetdepth/scene.h"
#include "hetdepth/voxel_grid.h"

namespace hetdepth {

struct BinConfig {
  int count = 64;
  double d_min = 0.5;
  double d_max = 40.0;
  BinSpacing spacing = BinSpacing::kInverse;

  DepthBins Make() const { return MakeDepthBins(d_min, d_max, count, spacing); }
};

struct RigSeeds {
  std::uint64_t transforms = 11;
  std::uint64_t ranking = 12;
  std::uint64_t head = 13;
};

enum class TransformMode { kIdentity, kSeeded };

struct RigConfig {
  std::vector<CameraModel> cameras;
  GridSpec grid;
  BinConfig bins;
  LossWeights loss_weights;
  RigSeeds seeds;
  TransformMode transforms = TransformMode::kIdentity;
  bool wrap_around = false;
  double feature_gain = 10.0;     // norm of the per-pixel descriptor
  int ranking_pairs = 1000;
  double ranking_epsilon = 0.03;  // disparity units
  Eigen::Matrix4d ego_motion = Eigen::Matrix4d::Identity();  // frame t -> t'
  std::optional<double> abs_rel_max;  // pipeline acceptance threshold

  // Throws Error(kInvalidConfig) for an empty rig or duplicate camera names.
  void Validate() const;
  int IndexOf(const std::string& name) const;  // -1 when absent
  RigConfig Subset(const std::vector<int>& camera_indices) const;
};

// Rig files: {"cameras": [{"name", "kind", "intrinsics": {fx, fy, cx, cy,
// width, height}, "extrinsics": [16 row-major], "distortion": {...},
// "fov_max_deg"}], ...}. KB distortion is {"omega": [w1, w2, w3, w4]}, MEI is
// {"omega1", "omega2", "epsilon"}. Optional sections: "grid" {min, max,
// resolution}, "bins" {count, d_min, d_max, spacing}, "loss_weights", "seeds",
// "fusion" {transforms, wrap_around}, "features" {gain}, "ranking" {pairs,
// epsilon}, "ego_motion" [16], "thresholds" {abs_rel_max}.
// Errors name the offending camera.
RigConfig RigFromJson(const nlohmann::json& doc);
nlohmann::json RigToJson(const RigConfig& rig);
RigConfig LoadRig(const std::filesystem::path& path);
void SaveRig(const std::filesystem::path& path, const RigConfig& rig);

// Scene files: {"name", "channels", "background", "primitives": [{"name",
// "type": "plane"|"box"|"sphere", ..., "texture": {seed, scale, octaves}}]}.
SceneSpec SceneFromJson(const nlohmann::json& doc);
nlohmann::json SceneToJson(const SceneSpec& scene);
SceneSpec LoadScene(const std::filesystem::path& path);
void SaveScene(const std::filesystem::path& path, const SceneSpec& scene);

// Camera-to-ego rotations for cameras looking along ego +x (front) and ego -y
// (right side); camera x right, y down, z forward.
Eigen::Matrix3d FrontLooking();
Eigen::Matrix3d RightLooking();

// Standard image size of the built-in rigs.
inline constexpr int kRigWidth = 640;
inline constexpr int kRigHeight = 352;

CameraModel FrontPinhole(std::string name, const Eigen::Vector3d& position);
CameraModel FrontKbFisheye(std::string name, const Eigen::Vector3d& position);
CameraModel RightKbFisheye(std::string name, const Eigen::Vector3d& position);
CameraModel RightMeiFisheye(std::string name, const Eigen::Vector3d& position);

// Built-in arrangements on the default desk-scale grid:
// kFrontPair: one pinhole plus one KB fisheye, both facing forward;
// kTwoPinholeSideFisheye: two forward pinholes plus a right-facing KB fisheye;
// kFrontPinholeSideMei: forward pinhole plus right-facing MEI fisheye.
enum class RigArrangement { kFrontPair, kTwoPinholeSideFisheye, kFrontPinholeSideMei };

RigConfig MakeRig(RigArrangement arrangement);

}  // namespace hetdepth
