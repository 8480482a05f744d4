#include "hetdepth/camera.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <Eigen/LU>

#include "hetdepth/error.h"

namespace hetdepth {
namespace {

constexpr double kRigidTolerance = 1e-9;
constexpr double kMinProjectionDepth = 1e-9;
constexpr double kAxisAngle = 1e-6;        // below this the series branch of phi/tan is used
constexpr double kAxisRadius = 1e-8;       // normalized radius treated as the optical axis
constexpr double kAngleSolveTolerance = 1e-15;

std::string CameraContext(const std::string& name) {
  return name.empty() ? std::string("camera") : "camera '" + name + "'";
}

void ValidateFov(const std::string& name, double fov_max) {
  if (!(fov_max > 0.0 && fov_max < std::numbers::pi)) {
    throw Error(ErrorCode::kInvalidConfig,
                CameraContext(name) + ": fov_max must lie in (0, pi), got " +
                    std::to_string(fov_max));
  }
}

// KB: phi on [0, fov_max]; rejects a non-positive slope anywhere on a dense
// probe so that the accepted map is strictly increasing, not just sampled so.
InverseLut BuildKbLut(const std::string& name, const KbDistortion& kb, double fov_max,
                      int resolution) {
  const int probes = std::max(resolution, 1 << 14);
  for (int i = 0; i <= probes; ++i) {
    const double theta = fov_max * i / probes;
    if (!(kb.PhiDerivative(theta) > 0.0)) {
      throw Error(ErrorCode::kNonMonotoneDistortion,
                  CameraContext(name) + ": phi(theta) is not increasing at theta=" +
                      std::to_string(theta));
    }
  }
  return InverseLut::Tabulate([&kb](double t) { return kb.Phi(t); }, 0.0, fov_max, resolution);
}

double MeiRadiusAtAngle(const MeiDistortion& mei, double theta) {
  return std::sin(theta) / (std::cos(theta) + mei.epsilon);
}

InverseLut BuildMeiLut(const std::string& name, const MeiDistortion& mei, double fov_max,
                       int resolution) {
  if (!(std::cos(fov_max) + mei.epsilon > 0.0)) {
    throw Error(ErrorCode::kInvalidConfig,
                CameraContext(name) + ": cos(fov_max) + epsilon must be positive");
  }
  const double r_max = MeiRadiusAtAngle(mei, fov_max);
  const int probes = std::max(resolution, 1 << 14);
  for (int i = 0; i <= probes; ++i) {
    const double r = r_max * i / probes;
    if (!(mei.DistortedRadiusDerivative(r) > 0.0)) {
      throw Error(ErrorCode::kNonMonotoneDistortion,
                  CameraContext(name) + ": distorted radius is not increasing at r=" +
                      std::to_string(r));
    }
  }
  return InverseLut::Tabulate([&mei](double r) { return mei.DistortedRadius(r); }, 0.0, r_max,
                              resolution);
}

// Root of sin(theta) - r cos(theta) - r eps on [0, theta_max], Newton with a
// bisection fallback. Returns NaN when the bracket holds no sign change.
double SolveMeiAngle(double r, double epsilon, double theta_max) {
  const auto f = [&](double t) { return std::sin(t) - r * std::cos(t) - r * epsilon; };
  double lo = 0.0;
  double hi = theta_max;
  if (f(lo) > 0.0 || f(hi) < 0.0) return std::numeric_limits<double>::quiet_NaN();
  double theta = std::clamp(std::atan(r), lo, hi);
  for (int iter = 0; iter < 100; ++iter) {
    const double value = f(theta);
    if (value == 0.0) break;
    if (value < 0.0) {
      lo = theta;
    } else {
      hi = theta;
    }
    const double slope = std::cos(theta) + r * std::sin(theta);
    double next = theta - value / slope;
    if (!(slope > 0.0) || !(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double step = std::abs(next - theta);
    theta = next;
    if (step < kAngleSolveTolerance * (1.0 + theta)) break;
  }
  return theta;
}

}  // namespace

std::string_view CameraKindName(CameraKind kind) {
  switch (kind) {
    case CameraKind::kPinhole:
      return "pinhole";
    case CameraKind::kKbFisheye:
      return "kb_fisheye";
    case CameraKind::kMeiFisheye:
      return "mei_fisheye";
  }
  return "unknown";
}

std::optional<CameraKind> CameraKindFromName(std::string_view name) {
  if (name == "pinhole") return CameraKind::kPinhole;
  if (name == "kb_fisheye") return CameraKind::kKbFisheye;
  if (name == "mei_fisheye") return CameraKind::kMeiFisheye;
  return std::nullopt;
}

std::string_view ProjectionStatusName(ProjectionStatus status) {
  switch (status) {
    case ProjectionStatus::kOk:
      return "Ok";
    case ProjectionStatus::kDepthNonPositive:
      return "DepthNonPositive";
    case ProjectionStatus::kBehindCamera:
      return "BehindCamera";
    case ProjectionStatus::kFovExceeded:
      return "FovExceeded";
    case ProjectionStatus::kOutOfDomain:
      return "OutOfDomain";
    case ProjectionStatus::kNoRealRoot:
      return "NoRealRoot";
    case ProjectionStatus::kWrongModel:
      return "WrongModel";
  }
  return "Unknown";
}

void Intrinsics::Validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) {
    throw Error(ErrorCode::kInvalidConfig, "focal lengths must be positive");
  }
  if (width < 1 || height < 1) {
    throw Error(ErrorCode::kInvalidConfig, "image size must be positive");
  }
  if (!(cx >= 0.0 && cx < width && cy >= 0.0 && cy < height)) {
    throw Error(ErrorCode::kInvalidConfig, "principal point outside the image");
  }
}

// Extrinsics -----------------------------------------------------------------

Extrinsics::Extrinsics()
    : ego_to_camera_(Eigen::Matrix4d::Identity()), camera_to_ego_(Eigen::Matrix4d::Identity()) {}

Extrinsics::Extrinsics(const Eigen::Matrix4d& ego_to_camera) : ego_to_camera_(ego_to_camera) {
  if (!ego_to_camera.allFinite()) {
    throw Error(ErrorCode::kInvalidConfig, "extrinsic matrix has non-finite entries");
  }
  const Eigen::Matrix3d rotation = ego_to_camera.topLeftCorner<3, 3>();
  const double orthogonality =
      (rotation * rotation.transpose() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  if (orthogonality > kRigidTolerance) {
    throw Error(ErrorCode::kInvalidConfig, "extrinsic rotation is not orthonormal");
  }
  if (std::abs(rotation.determinant() - 1.0) > kRigidTolerance) {
    throw Error(ErrorCode::kInvalidConfig, "extrinsic rotation has determinant != 1");
  }
  const Eigen::RowVector4d last_row = ego_to_camera.row(3);
  if ((last_row - Eigen::RowVector4d(0, 0, 0, 1)).cwiseAbs().maxCoeff() > kRigidTolerance) {
    throw Error(ErrorCode::kInvalidConfig, "extrinsic last row must be (0, 0, 0, 1)");
  }
  ego_to_camera_.row(3) << 0, 0, 0, 1;
  camera_to_ego_.setIdentity();
  camera_to_ego_.topLeftCorner<3, 3>() = rotation.transpose();
  camera_to_ego_.topRightCorner<3, 1>() =
      -rotation.transpose() * ego_to_camera.topRightCorner<3, 1>();
}

Extrinsics Extrinsics::FromRotationTranslation(const Eigen::Matrix3d& rotation,
                                               const Eigen::Vector3d& translation) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = rotation;
  m.topRightCorner<3, 1>() = translation;
  return Extrinsics(m);
}

Extrinsics Extrinsics::FromPose(const Eigen::Matrix3d& camera_to_ego,
                                const Eigen::Vector3d& position) {
  return FromRotationTranslation(camera_to_ego.transpose(), -camera_to_ego.transpose() * position);
}

Extrinsics Extrinsics::Compose(const Eigen::Matrix4d& other) const {
  return Extrinsics(ego_to_camera_ * other);
}

// Distortion ----------------------------------------------------------------

double KbDistortion::Phi(double theta) const {
  const double t2 = theta * theta;
  return theta * (1.0 + t2 * (omega[0] + t2 * (omega[1] + t2 * (omega[2] + t2 * omega[3]))));
}

double KbDistortion::PhiDerivative(double theta) const {
  const double t2 = theta * theta;
  return 1.0 + t2 * (3.0 * omega[0] + t2 * (5.0 * omega[1] + t2 * (7.0 * omega[2] + t2 * 9.0 * omega[3])));
}

double KbDistortion::PhiOverTan(double theta) const {
  if (std::abs(theta) < kAxisAngle) {
    return 1.0 + (omega[0] - 1.0 / 3.0) * theta * theta;
  }
  return Phi(theta) / std::tan(theta);
}

double MeiDistortion::DistortedRadius(double r) const {
  const double r2 = r * r;
  return r * (1.0 + r2 * (omega1 + r2 * omega2));
}

double MeiDistortion::DistortedRadiusDerivative(double r) const {
  const double r2 = r * r;
  return 1.0 + r2 * (3.0 * omega1 + r2 * 5.0 * omega2);
}

double MeiDistortion::DistortedRadiusSupremum() const {
  // Stationary points solve 5 w2 R^2 + 3 w1 R + 1 = 0 in R = r^2.
  double smallest = std::numeric_limits<double>::infinity();
  const double a = 5.0 * omega2;
  const double b = 3.0 * omega1;
  if (a == 0.0) {
    if (b < 0.0) smallest = -1.0 / b;
  } else {
    const double disc = b * b - 4.0 * a;
    if (disc >= 0.0) {
      const double sq = std::sqrt(disc);
      for (const double root : {(-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a)}) {
        if (root > 0.0) smallest = std::min(smallest, root);
      }
    }
  }
  if (!std::isfinite(smallest)) return std::numeric_limits<double>::infinity();
  return DistortedRadius(std::sqrt(smallest));
}

// CameraModel ----------------------------------------------------------------

CameraModel CameraModel::Pinhole(std::string name, const Intrinsics& intrinsics,
                                 const Extrinsics& extrinsics) {
  intrinsics.Validate();
  CameraModel cam;
  cam.name_ = std::move(name);
  cam.kind_ = CameraKind::kPinhole;
  cam.intrinsics_ = intrinsics;
  cam.extrinsics_ = extrinsics;
  cam.fov_max_ = std::numbers::pi / 2.0;
  return cam;
}

CameraModel CameraModel::KbFisheye(std::string name, const Intrinsics& intrinsics,
                                   const Extrinsics& extrinsics, const KbDistortion& distortion,
                                   double fov_max, int lut_resolution) {
  intrinsics.Validate();
  ValidateFov(name, fov_max);
  CameraModel cam;
  cam.kind_ = CameraKind::kKbFisheye;
  cam.intrinsics_ = intrinsics;
  cam.extrinsics_ = extrinsics;
  cam.kb_ = distortion;
  cam.fov_max_ = fov_max;
  cam.lut_ = std::make_shared<const InverseLut>(
      BuildKbLut(name, distortion, fov_max, lut_resolution));
  cam.name_ = std::move(name);
  return cam;
}

CameraModel CameraModel::MeiFisheye(std::string name, const Intrinsics& intrinsics,
                                    const Extrinsics& extrinsics, const MeiDistortion& distortion,
                                    double fov_max, int lut_resolution) {
  intrinsics.Validate();
  ValidateFov(name, fov_max);
  CameraModel cam;
  cam.kind_ = CameraKind::kMeiFisheye;
  cam.intrinsics_ = intrinsics;
  cam.extrinsics_ = extrinsics;
  cam.mei_ = distortion;
  cam.fov_max_ = fov_max;
  cam.lut_ = std::make_shared<const InverseLut>(
      BuildMeiLut(name, distortion, fov_max, lut_resolution));
  cam.name_ = std::move(name);
  return cam;
}

CameraModel CameraModel::WithExtrinsics(const Extrinsics& extrinsics) const {
  CameraModel cam = *this;
  cam.extrinsics_ = extrinsics;
  return cam;
}

CameraModel CameraModel::WithLut(InverseLut lut) const {
  if (!is_fisheye()) {
    throw Error(ErrorCode::kInvalidConfig, CameraContext(name_) + ": pinhole has no inverse LUT");
  }
  CameraModel cam = *this;
  cam.lut_ = std::make_shared<const InverseLut>(std::move(lut));
  return cam;
}

Projection CameraModel::Project(const Eigen::Vector3d& ego_point) const {
  return ProjectFromCamera(extrinsics_.ToCamera(ego_point));
}

Unprojection CameraModel::Unproject(const Eigen::Vector2d& uv, double depth) const {
  Unprojection out = UnprojectToCamera(uv, depth);
  if (out.ok()) out.point = extrinsics_.ToEgo(out.point);
  return out;
}

Projection CameraModel::ProjectFromCamera(const Eigen::Vector3d& camera_point) const {
  switch (kind_) {
    case CameraKind::kPinhole:
      return ProjectPinholeCamera(camera_point);
    case CameraKind::kKbFisheye:
      return ProjectKbCamera(camera_point);
    case CameraKind::kMeiFisheye:
      return ProjectMeiCamera(camera_point);
  }
  return {.status = ProjectionStatus::kWrongModel};
}

Unprojection CameraModel::UnprojectToCamera(const Eigen::Vector2d& uv, double depth) const {
  switch (kind_) {
    case CameraKind::kPinhole:
      return UnprojectPinholeCamera(uv, depth);
    case CameraKind::kKbFisheye:
      return UnprojectKbCamera(uv, depth);
    case CameraKind::kMeiFisheye:
      return UnprojectMeiCamera(uv, depth);
  }
  return {.status = ProjectionStatus::kWrongModel};
}

std::optional<Eigen::Vector2d> CameraModel::ProjectVisible(const Eigen::Vector3d& ego_point) const {
  const Projection p = Project(ego_point);
  if (!p.ok() || !(p.depth > 0.0) || !InImage(p.uv)) return std::nullopt;
  return p.uv;
}

Projection CameraModel::ProjectPinholeCamera(const Eigen::Vector3d& pc) const {
  Projection out;
  out.depth = pc.z();
  if (!(pc.z() > kMinProjectionDepth)) {
    out.status = ProjectionStatus::kDepthNonPositive;
    return out;
  }
  out.uv = {intrinsics_.fx * pc.x() / pc.z() + intrinsics_.cx,
            intrinsics_.fy * pc.y() / pc.z() + intrinsics_.cy};
  return out;
}

Projection CameraModel::ProjectKbCamera(const Eigen::Vector3d& pc) const {
  Projection out;
  out.depth = pc.z();
  const double rho = std::hypot(pc.x(), pc.y());
  if (rho == 0.0 && !(pc.z() > 0.0)) {
    out.status = ProjectionStatus::kBehindCamera;
    return out;
  }
  const double theta = std::atan2(rho, pc.z());
  if (theta > fov_max_) {
    out.status = ProjectionStatus::kFovExceeded;
    return out;
  }
  double mx;
  double my;
  if (theta < kAxisAngle) {
    const double ratio = kb_.PhiOverTan(theta);
    mx = ratio * pc.x() / pc.z();
    my = ratio * pc.y() / pc.z();
  } else {
    const double phi = kb_.Phi(theta);
    mx = phi * pc.x() / rho;
    my = phi * pc.y() / rho;
  }
  out.uv = {intrinsics_.fx * mx + intrinsics_.cx, intrinsics_.fy * my + intrinsics_.cy};
  return out;
}

Projection CameraModel::ProjectMeiCamera(const Eigen::Vector3d& pc) const {
  Projection out;
  out.depth = pc.z();
  const double denominator = pc.z() + mei_.epsilon * pc.norm();
  if (!(denominator > kMinProjectionDepth)) {
    out.status = ProjectionStatus::kBehindCamera;
    return out;
  }
  const double theta = std::atan2(std::hypot(pc.x(), pc.y()), pc.z());
  if (theta > fov_max_) {
    out.status = ProjectionStatus::kFovExceeded;
    return out;
  }
  const double a = pc.x() / denominator;
  const double b = pc.y() / denominator;
  const double r2 = a * a + b * b;
  const double phi = 1.0 + r2 * (mei_.omega1 + r2 * mei_.omega2);
  out.uv = {intrinsics_.fx * phi * a + intrinsics_.cx, intrinsics_.fy * phi * b + intrinsics_.cy};
  return out;
}

Unprojection CameraModel::UnprojectPinholeCamera(const Eigen::Vector2d& uv, double depth) const {
  if (!(depth > 0.0)) return {.status = ProjectionStatus::kDepthNonPositive};
  const double a = (uv.x() - intrinsics_.cx) / intrinsics_.fx;
  const double b = (uv.y() - intrinsics_.cy) / intrinsics_.fy;
  return {.point = {a * depth, b * depth, depth}};
}

Unprojection CameraModel::UnprojectKbCamera(const Eigen::Vector2d& uv, double depth) const {
  if (!(depth > 0.0)) return {.status = ProjectionStatus::kDepthNonPositive};
  const double a = (uv.x() - intrinsics_.cx) / intrinsics_.fx;
  const double b = (uv.y() - intrinsics_.cy) / intrinsics_.fy;
  const double rho = std::hypot(a, b);
  if (!(rho <= lut_->y_max())) return {.status = ProjectionStatus::kOutOfDomain};
  double ratio;  // tan(theta) / phi(theta)
  if (rho < kAxisRadius) {
    ratio = 1.0 / kb_.PhiOverTan(rho);
  } else {
    const auto solved = lut_->Refine(
        rho, [this](double t) { return kb_.Phi(t); },
        [this](double t) { return kb_.PhiDerivative(t); });
    if (!(solved.x < std::numbers::pi / 2.0)) return {.status = ProjectionStatus::kOutOfDomain};
    ratio = std::tan(solved.x) / rho;
  }
  return {.point = {ratio * a * depth, ratio * b * depth, depth}};
}

Unprojection CameraModel::UnprojectMeiCamera(const Eigen::Vector2d& uv, double depth) const {
  if (!(depth > 0.0)) return {.status = ProjectionStatus::kDepthNonPositive};
  const double a = (uv.x() - intrinsics_.cx) / intrinsics_.fx;
  const double b = (uv.y() - intrinsics_.cy) / intrinsics_.fy;
  const double rho = std::hypot(a, b);
  if (rho == 0.0) return {.point = {0.0, 0.0, depth}};
  if (!(rho <= lut_->y_max())) {
    return {.status = rho > mei_.DistortedRadiusSupremum() ? ProjectionStatus::kNoRealRoot
                                                             : ProjectionStatus::kOutOfDomain};
  }
  const auto solved = lut_->Refine(
      rho, [this](double r) { return mei_.DistortedRadius(r); },
      [this](double r) { return mei_.DistortedRadiusDerivative(r); });
  const double theta = SolveMeiAngle(solved.x, mei_.epsilon, fov_max_);
  if (!std::isfinite(theta)) return {.status = ProjectionStatus::kOutOfDomain};
  const double cos_theta = std::cos(theta);
  if (!(cos_theta > 1e-12)) return {.status = ProjectionStatus::kOutOfDomain};
  const double lateral = depth * std::sin(theta) / cos_theta / rho;
  return {.point = {lateral * a, lateral * b, depth}};
}

// Model-specific entry points -------------------------------------------------

Projection ProjectPinhole(const Eigen::Vector3d& ego_point, const CameraModel& cam) {
  if (cam.kind() != CameraKind::kPinhole) return {.status = ProjectionStatus::kWrongModel};
  return cam.Project(ego_point);
}

Unprojection UnprojectPinhole(const Eigen::Vector2d& uv, double depth, const CameraModel& cam) {
  if (cam.kind() != CameraKind::kPinhole) return {.status = ProjectionStatus::kWrongModel};
  return cam.Unproject(uv, depth);
}

Projection ProjectKb(const Eigen::Vector3d& ego_point, const CameraModel& cam) {
  if (cam.kind() != CameraKind::kKbFisheye) return {.status = ProjectionStatus::kWrongModel};
  return cam.Project(ego_point);
}

Unprojection UnprojectKb(const Eigen::Vector2d& uv, double depth, const CameraModel& cam) {
  if (cam.kind() != CameraKind::kKbFisheye) return {.status = ProjectionStatus::kWrongModel};
  return cam.Unproject(uv, depth);
}

Projection ProjectMei(const Eigen::Vector3d& ego_point, const CameraModel& cam) {
  if (cam.kind() != CameraKind::kMeiFisheye) return {.status = ProjectionStatus::kWrongModel};
  return cam.Project(ego_point);
}

Unprojection UnprojectMei(const Eigen::Vector2d& uv, double depth, const CameraModel& cam) {
  if (cam.kind() != CameraKind::kMeiFisheye) return {.status = ProjectionStatus::kWrongModel};
  return cam.Unproject(uv, depth);
}

InverseLut BuildInverseLut(const CameraModel& cam, int resolution) {
  switch (cam.kind()) {
    case CameraKind::kKbFisheye:
      return BuildKbLut(cam.name(), cam.kb(), cam.fov_max(), resolution);
    case CameraKind::kMeiFisheye:
      return BuildMeiLut(cam.name(), cam.mei(), cam.fov_max(), resolution);
    case CameraKind::kPinhole:
      break;
  }
  throw Error(ErrorCode::kInvalidConfig, CameraContext(cam.name()) + ": pinhole has no inverse LUT");
}

}  // namespace hetdepth
