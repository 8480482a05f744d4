#pragma once

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include <Eigen/Core>

#include "hetdepth/inverse_lut.h"

namespace hetdepth {

enum class CameraKind { kPinhole, kKbFisheye, kMeiFisheye };

std::string_view CameraKindName(CameraKind kind);
std::optional<CameraKind> CameraKindFromName(std::string_view name);

// Outcome of a single projection or back-projection. Failures are expected
// per point (voxels outside a frustum, fisheye corners) and are not errors.
enum class ProjectionStatus {
  kOk,
  kDepthNonPositive,
  kBehindCamera,
  kFovExceeded,
  kOutOfDomain,
  kNoRealRoot,
  kWrongModel,
};

std::string_view ProjectionStatusName(ProjectionStatus status);

struct Intrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 1;
  int height = 1;

  // Throws Error(kInvalidConfig) on fx,fy <= 0 or a principal point outside
  // the image.
  void Validate() const;
};

// Rigid ego-frame -> camera-frame transform.
class Extrinsics {
 public:
  Extrinsics();
  // Throws Error(kInvalidConfig) unless the rotation block is orthonormal with
  // determinant +1 (tolerance 1e-9) and the last row is (0, 0, 0, 1).
  explicit Extrinsics(const Eigen::Matrix4d& ego_to_camera);

  static Extrinsics Identity() { return Extrinsics(); }
  static Extrinsics FromRotationTranslation(const Eigen::Matrix3d& rotation,
                                            const Eigen::Vector3d& translation);
  // Camera placed at `position` (ego frame) with the given camera-to-ego
  // rotation, i.e. the columns are the camera axes expressed in ego frame.
  static Extrinsics FromPose(const Eigen::Matrix3d& camera_to_ego,
                             const Eigen::Vector3d& position);

  const Eigen::Matrix4d& matrix() const { return ego_to_camera_; }
  const Eigen::Matrix4d& inverse() const { return camera_to_ego_; }

  Eigen::Vector3d ToCamera(const Eigen::Vector3d& ego) const {
    return ego_to_camera_.topLeftCorner<3, 3>() * ego + ego_to_camera_.topRightCorner<3, 1>();
  }
  Eigen::Vector3d ToEgo(const Eigen::Vector3d& camera) const {
    return camera_to_ego_.topLeftCorner<3, 3>() * camera + camera_to_ego_.topRightCorner<3, 1>();
  }
  // Optical center in ego frame.
  Eigen::Vector3d Center() const { return camera_to_ego_.topRightCorner<3, 1>(); }

  // this * other, applied right to left.
  Extrinsics Compose(const Eigen::Matrix4d& other) const;

 private:
  Eigen::Matrix4d ego_to_camera_;
  Eigen::Matrix4d camera_to_ego_;
};

struct KbDistortion {
  std::array<double, 4> omega{0.0, 0.0, 0.0, 0.0};

  // phi(theta) = theta + w1 theta^3 + w2 theta^5 + w3 theta^7 + w4 theta^9.
  double Phi(double theta) const;
  double PhiDerivative(double theta) const;
  // phi(theta) / tan(theta), using its series expansion near the axis.
  double PhiOverTan(double theta) const;
};

struct MeiDistortion {
  double omega1 = 0.0;
  double omega2 = 0.0;
  double epsilon = 0.0;  // mirror factor

  // Distorted radius r * (1 + w1 r^2 + w2 r^4) of the normalized radius r.
  double DistortedRadius(double r) const;
  double DistortedRadiusDerivative(double r) const;
  // Supremum of DistortedRadius over r >= 0 (infinite when unbounded).
  double DistortedRadiusSupremum() const;
};

struct Projection {
  Eigen::Vector2d uv = Eigen::Vector2d::Zero();
  double depth = 0.0;  // camera-frame z
  ProjectionStatus status = ProjectionStatus::kOk;

  bool ok() const { return status == ProjectionStatus::kOk; }
};

struct Unprojection {
  Eigen::Vector3d point = Eigen::Vector3d::Zero();
  ProjectionStatus status = ProjectionStatus::kOk;

  bool ok() const { return status == ProjectionStatus::kOk; }
};

inline constexpr int kDefaultLutResolution = 4096;

// A calibrated camera of one of three kinds. Immutable after construction and
// safe to share across threads; the inverse LUT of fisheye models is built by
// the factory functions.
//
// Depth is the camera-frame z coordinate for every kind, so back-projection at
// depth d returns the point on the pixel's ray with z = d. Consequently rays at
// or beyond 90 degrees from the optical axis cannot be back-projected.
//
// For the MEI model the normalizing norm is taken over the 3D camera-frame
// coordinates only, excluding the homogeneous 1.
class CameraModel {
 public:
  static CameraModel Pinhole(std::string name, const Intrinsics& intrinsics,
                             const Extrinsics& extrinsics);
  // Throws Error(kNonMonotoneDistortion) when phi is not strictly increasing
  // on [0, fov_max].
  static CameraModel KbFisheye(std::string name, const Intrinsics& intrinsics,
                               const Extrinsics& extrinsics, const KbDistortion& distortion,
                               double fov_max, int lut_resolution = kDefaultLutResolution);
  static CameraModel MeiFisheye(std::string name, const Intrinsics& intrinsics,
                                const Extrinsics& extrinsics, const MeiDistortion& distortion,
                                double fov_max, int lut_resolution = kDefaultLutResolution);

  const std::string& name() const { return name_; }
  CameraKind kind() const { return kind_; }
  bool is_fisheye() const { return kind_ != CameraKind::kPinhole; }
  const Intrinsics& intrinsics() const { return intrinsics_; }
  const Extrinsics& extrinsics() const { return extrinsics_; }
  const KbDistortion& kb() const { return kb_; }
  const MeiDistortion& mei() const { return mei_; }
  double fov_max() const { return fov_max_; }
  int width() const { return intrinsics_.width; }
  int height() const { return intrinsics_.height; }
  // Null for pinhole cameras.
  const InverseLut* lut() const { return lut_.get(); }

  // Same camera with different extrinsics; the LUT is shared.
  CameraModel WithExtrinsics(const Extrinsics& extrinsics) const;
  // Same camera with a caller-supplied inverse table. Used by self-checks to
  // prove that a damaged table is detected.
  CameraModel WithLut(InverseLut lut) const;

  Projection Project(const Eigen::Vector3d& ego_point) const;
  Unprojection Unproject(const Eigen::Vector2d& uv, double depth) const;

  Projection ProjectFromCamera(const Eigen::Vector3d& camera_point) const;
  Unprojection UnprojectToCamera(const Eigen::Vector2d& uv, double depth) const;

  // Pixel centers sit at integer coordinates; the sampleable image is
  // [0, W-1] x [0, H-1].
  bool InImage(const Eigen::Vector2d& uv) const {
    return uv.x() >= 0.0 && uv.y() >= 0.0 && uv.x() <= intrinsics_.width - 1 &&
           uv.y() <= intrinsics_.height - 1;
  }

  // Shared visibility predicate of lifting and overlap masks: projection
  // succeeds, camera-frame depth is positive and the pixel is in the image.
  std::optional<Eigen::Vector2d> ProjectVisible(const Eigen::Vector3d& ego_point) const;

 private:
  CameraModel() = default;

  Projection ProjectPinholeCamera(const Eigen::Vector3d& pc) const;
  Projection ProjectKbCamera(const Eigen::Vector3d& pc) const;
  Projection ProjectMeiCamera(const Eigen::Vector3d& pc) const;
  Unprojection UnprojectPinholeCamera(const Eigen::Vector2d& uv, double depth) const;
  Unprojection UnprojectKbCamera(const Eigen::Vector2d& uv, double depth) const;
  Unprojection UnprojectMeiCamera(const Eigen::Vector2d& uv, double depth) const;

  std::string name_;
  CameraKind kind_ = CameraKind::kPinhole;
  Intrinsics intrinsics_;
  Extrinsics extrinsics_;
  KbDistortion kb_;
  MeiDistortion mei_;
  double fov_max_ = 0.0;
  std::shared_ptr<const InverseLut> lut_;
};

// Model-specific entry points. Each returns kWrongModel when called with a
// camera of another kind.
Projection ProjectPinhole(const Eigen::Vector3d& ego_point, const CameraModel& cam);
Unprojection UnprojectPinhole(const Eigen::Vector2d& uv, double depth, const CameraModel& cam);
Projection ProjectKb(const Eigen::Vector3d& ego_point, const CameraModel& cam);
Unprojection UnprojectKb(const Eigen::Vector2d& uv, double depth, const CameraModel& cam);
Projection ProjectMei(const Eigen::Vector3d& ego_point, const CameraModel& cam);
Unprojection UnprojectMei(const Eigen::Vector2d& uv, double depth, const CameraModel& cam);

// Inverse table of the fisheye forward map: phi(theta) on [0, fov_max] for KB,
// the distorted radius on [0, r(fov_max)] for MEI. Throws
// Error(kNonMonotoneDistortion) or Error(kInvalidConfig) for pinhole cameras
// and resolutions below kMinLutResolution.
InverseLut BuildInverseLut(const CameraModel& cam, int resolution = kDefaultLutResolution);

}  // namespace hetdepth
