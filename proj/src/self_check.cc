#include "hetdepth/self_check.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "hetdepth/cost_volume.h"
#include "hetdepth/error.h"
#include "hetdepth/lifting.h"
#include "hetdepth/losses.h"
#include "hetdepth/metrics.h"
#include "hetdepth/rig.h"
#include "hetdepth/scene.h"

namespace hetdepth {
namespace {

std::string Num(double v) {
  std::ostringstream os;
  os.precision(3);
  os << v;
  return os.str();
}

CheckResult Check(std::string name, bool passed, std::string detail) {
  return {std::move(name), passed, std::move(detail)};
}

Intrinsics CheckIntrinsics(double focal) {
  return {focal, focal, 319.5, 175.5, 640, 352};
}

Extrinsics CheckPose() {
  return Extrinsics::FromPose(FrontLooking(), Eigen::Vector3d(0.2, -0.1, 1.4));
}

CheckResult RoundTripCheck(const std::string& name, const CameraModel& cam,
                           const SelfCheckOptions& options) {
  const RoundTripStats s = MeasureRoundTrip(cam, options.samples, options.seed);
  const bool ok = s.failures == 0 && s.max_pixel_error < kRoundTripPixelTol &&
                  s.max_point_error < kRoundTripPointTol && s.max_seed_error < kLutSeedTol;
  std::string detail = std::to_string(s.samples) + " samples, max pixel err " +
                       Num(s.max_pixel_error) + " px, max point err " +
                       Num(s.max_point_error) + " m";
  if (cam.is_fisheye()) detail += ", max table seed err " + Num(s.max_seed_error);
  if (s.failures) detail += ", " + std::to_string(s.failures) + " refused";
  return Check(name, ok, detail);
}

CheckResult DegenerateMei(const SelfCheckOptions& options) {
  const CameraModel pinhole = CameraModel::Pinhole("pinhole", CheckIntrinsics(320), CheckPose());
  const CameraModel mei = CameraModel::MeiFisheye("mei0", CheckIntrinsics(320), CheckPose(),
                                                  MeiDistortion{0.0, 0.0, 0.0}, 1.2);
  std::mt19937_64 rng(options.seed + 7);
  std::uniform_real_distribution<double> u(0.0, 639.0);
  std::uniform_real_distribution<double> v(0.0, 351.0);
  std::uniform_real_distribution<double> depth(0.5, 50.0);
  double worst = 0.0;
  int refused = 0;
  for (int i = 0; i < 10000; ++i) {
    const Eigen::Vector2d uv(u(rng), v(rng));
    const double d = depth(rng);
    const Unprojection a = pinhole.Unproject(uv, d);
    const Unprojection b = mei.Unproject(uv, d);
    if (!a.ok() || !b.ok()) {
      ++refused;
      continue;
    }
    worst = std::max(worst, (a.point - b.point).norm());
    const Projection pa = pinhole.Project(a.point);
    const Projection pb = mei.Project(a.point);
    if (!pa.ok() || !pb.ok()) {
      ++refused;
      continue;
    }
    worst = std::max(worst, (pa.uv - pb.uv).norm());
  }
  return Check("degenerate_mei_pinhole", refused == 0 && worst < 1e-9,
               "max deviation " + Num(worst) + " over 10000 samples");
}

CheckResult DegenerateKb(const SelfCheckOptions& options) {
  // phi(theta) = theta: equidistant everywhere, perspective near the axis.
  const CameraModel pinhole = CameraModel::Pinhole("pinhole", CheckIntrinsics(320), CheckPose());
  const CameraModel kb = CameraModel::KbFisheye("kb0", CheckIntrinsics(320), CheckPose(),
                                                KbDistortion{}, 1.5);
  std::mt19937_64 rng(options.seed + 11);
  std::uniform_real_distribution<double> angle(0.0, 1.5);
  std::uniform_real_distribution<double> azimuth(-std::numbers::pi, std::numbers::pi);
  std::uniform_real_distribution<double> small(0.0, 1e-3);
  std::uniform_real_distribution<double> depth(0.5, 50.0);
  double equidistant = 0.0;
  double axis = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double az = azimuth(rng);
    const double d = depth(rng);
    // Full range against the closed-form equidistant map.
    const double t = angle(rng);
    const Eigen::Vector3d pc(std::sin(t) * std::cos(az), std::sin(t) * std::sin(az), std::cos(t));
    const Projection p = kb.ProjectFromCamera(pc * d);
    if (!p.ok()) return Check("degenerate_kb_pinhole", false, "projection refused");
    const Eigen::Vector2d expected(320 * t * std::cos(az) + 319.5, 320 * t * std::sin(az) + 175.5);
    equidistant = std::max(equidistant, (p.uv - expected).norm());
    // Near the axis the normalized coordinates match the pinhole ones.
    const double s = small(rng);
    const Eigen::Vector3d q =
        Eigen::Vector3d(std::sin(s) * std::cos(az), std::sin(s) * std::sin(az), std::cos(s)) * d;
    const Projection pk = kb.ProjectFromCamera(q);
    const Projection pp = pinhole.ProjectFromCamera(q);
    axis = std::max(axis, ((pk.uv - pp.uv) / 320.0).norm());
  }
  return Check("degenerate_kb_pinhole", equidistant < 1e-9 && axis < 1e-9,
               "equidistant deviation " + Num(equidistant) + " px, near-axis deviation " +
                   Num(axis) + " (normalized)");
}

CheckResult MaskOracle() {
  int voxels = 0;
  int mismatches = 0;
  for (const auto arrangement : {RigArrangement::kFrontPair, RigArrangement::kTwoPinholeSideFisheye,
                                 RigArrangement::kFrontPinholeSideMei}) {
    const RigConfig rig = MakeRig(arrangement);
    const OverlapMask masks = ComputeMasks(rig.cameras, rig.grid);
    for (int i = 0; i < static_cast<int>(rig.cameras.size()); ++i) {
      const auto oracle = BruteForceVisibility(rig.cameras[i], rig.grid);
      for (size_t s = 0; s < oracle.size(); ++s) mismatches += oracle[s] != masks.views[i][s];
      voxels += static_cast<int>(oracle.size());
    }
  }
  return Check("mask_oracle", mismatches == 0,
               std::to_string(mismatches) + " mismatches over " + std::to_string(voxels) +
                   " voxel visibilities (3 rigs)");
}

CheckResult MaskLiftConsistency() {
  const RigConfig rig = MakeRig(RigArrangement::kFrontPinholeSideMei);
  const OverlapMask masks = ComputeMasks(rig.cameras, rig.grid);
  int mismatches = 0;
  for (int i = 0; i < static_cast<int>(rig.cameras.size()); ++i) {
    const CameraModel& cam = rig.cameras[i];
    const FeatureMap ones(cam.height(), cam.width(), 2, MapRole::kFeature, 1.0);
    const VoxelGrid lifted = LiftFeatures(ones, cam, rig.grid);
    for (int s = 0; s < lifted.num_voxels(); ++s) {
      const bool nonzero = lifted.at(s)[0] != 0.0 || lifted.at(s)[1] != 0.0;
      mismatches += nonzero != (masks.views[i][s] != 0);
    }
  }
  return Check("mask_lift_consistency", mismatches == 0,
               std::to_string(mismatches) + " voxels where mask and lifted features disagree");
}

CheckResult FusionIdentity(const SelfCheckOptions& options) {
  GridSpec spec;
  spec.resolution = {6, 5, 4};
  std::mt19937_64 rng(options.seed + 3);
  std::uniform_real_distribution<double> value(-1.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  std::vector<VoxelGrid> volumes(2, VoxelGrid(spec, 3));
  OverlapMask masks;
  masks.views.assign(2, std::vector<std::uint8_t>(spec.num_voxels()));
  for (int i = 0; i < 2; ++i) {
    for (double& x : volumes[i].data()) x = value(rng);
    for (auto& m : masks.views[i]) m = coin(rng);
  }
  const VoxelGrid pair = Fuse(volumes, masks, FusionTransforms::Identity(3));
  const VoxelGrid single = Fuse(std::span(volumes).first(1), OverlapMask{{masks.views[0]}},
                                FusionTransforms::Identity(3));
  double worst = 0.0;
  for (size_t k = 0; k < pair.data().size(); ++k) {
    worst = std::max(worst, std::abs(pair.data()[k] - volumes[0].data()[k] - volumes[1].data()[k]));
    worst = std::max(worst, std::abs(single.data()[k] - volumes[0].data()[k]));
  }
  return Check("fusion_identity", worst < 1e-12,
               "identity transforms reproduce V1 + V2 (pair) and V1 (single) to " + Num(worst));
}

CheckResult SoftmaxBounds(const SelfCheckOptions& options) {
  const DepthBins bins = MakeDepthBins(0.5, 40.0, 64, BinSpacing::kInverse);
  CostVolume cv(4, 5, bins.size());
  std::mt19937_64 rng(options.seed + 5);
  std::uniform_real_distribution<double> cost(-200.0, 200.0);
  for (int v = 0; v < cv.height(); ++v) {
    for (int u = 0; u < cv.width(); ++u) {
      for (double& c : cv.at(v, u)) c = cost(rng);
      cv.set_valid(v, u, true);
    }
  }
  for (double& c : cv.at(0, 0)) c = 0.0;  // flat costs: uniform weights
  const FeatureMap depth = CenterDepth(cv, bins);
  const FeatureMap density = Density(cv);
  std::vector<double> p(bins.size());
  bool ok = true;
  for (int v = 0; v < cv.height(); ++v) {
    for (int u = 0; u < cv.width(); ++u) {
      BinProbabilities(cv.at(v, u), nullptr, p);
      double sum = 0.0;
      for (const double x : p) sum += x;
      ok = ok && std::abs(sum - 1.0) < 1e-12 && std::isfinite(depth(v, u));
      ok = ok && depth(v, u) >= bins.front() && depth(v, u) <= bins.back();
      ok = ok && density(v, u) >= 1.0 / bins.size() - 1e-15 && density(v, u) <= 1.0;
    }
  }
  ok = ok && std::abs(density(0, 0) - 1.0 / bins.size()) < 1e-15;
  return Check("softmax_bounds", ok,
               "probabilities sum to 1, density in [1/D, 1], depth in [d_1, d_D]");
}

CheckResult LossIdentities(const SelfCheckOptions& options) {
  std::mt19937_64 rng(options.seed + 13);
  std::uniform_real_distribution<double> value(0.05, 1.0);
  FeatureMap pred(12, 16, 1, MapRole::kDisparity);
  FeatureMap gt(12, 16, 1, MapRole::kDisparity);
  FeatureMap image(12, 16, 3, MapRole::kColor);
  for (double& x : pred.data()) x = value(rng);
  for (double& x : gt.data()) x = value(rng);
  for (double& x : image.data()) x = value(rng);
  const double base = SilogLoss(pred, gt);
  double drift = 0.0;
  for (const double s : {0.1, 1.0, 10.0}) {
    FeatureMap scaled = pred;
    for (double& x : scaled.data()) x *= s;
    drift = std::max(drift, std::abs(SilogLoss(scaled, gt) - base));
  }
  const double self = PhotometricLoss(image, image);
  const double total = ComputeTotalLoss({1, 1, 1, 1, 1, 1}).total;
  const DepthMetrics m = ComputeMetrics(gt, gt);
  const bool ok = drift < 1e-9 && self == 0.0 && std::abs(total - 1.232) < 1e-12 &&
                  m.abs_rel == 0.0 && m.rmse == 0.0 && m.delta1 == 1.0;
  return Check("loss_identities", ok,
               "silog scale drift " + Num(drift) + ", photometric(x, x) = " + Num(self) +
                   ", unit-term total = " + Num(total));
}

CheckResult RenderRoundTrip() {
  const SceneSpec scene = PlaneAndBoxScene(6.0, 1);
  double worst = 0.0;
  int hits = 0;
  for (const CameraModel& cam : MakeRig(RigArrangement::kTwoPinholeSideFisheye).cameras) {
    const FeatureMap depth = RenderDepth(scene, cam);
    for (int v = 0; v < cam.height(); v += 3) {
      for (int u = 0; u < cam.width(); u += 3) {
        if (!(depth(v, u) > 0.0)) continue;
        const Unprojection p = cam.Unproject(Eigen::Vector2d(u, v), depth(v, u));
        if (!p.ok()) return Check("render_roundtrip", false, "back-projection refused");
        double nearest = std::numeric_limits<double>::infinity();
        for (const auto& prim : scene.primitives) nearest = std::min(nearest, prim.SurfaceDistance(p.point));
        worst = std::max(worst, nearest);
        ++hits;
      }
    }
  }
  return Check("render_roundtrip", hits > 0 && worst < 1e-6,
               std::to_string(hits) + " rendered pixels, max surface distance " + Num(worst) + " m");
}

CheckResult RigValidation() {
  std::string message;
  bool named = false;
  try {
    RigFromJson(nlohmann::json::parse(R"({"cameras": []})"));
  } catch (const Error& e) {
    named = e.code() == ErrorCode::kInvalidConfig;
    message = e.what();
  }
  bool camera_named = false;
  try {
    RigFromJson(nlohmann::json::parse(R"({"cameras": [{"name": "cam_bad", "kind": "pinhole",
      "intrinsics": {"fx": -1, "fy": 1, "cx": 1, "cy": 1, "width": 4, "height": 4},
      "extrinsics": [1,0,0,0, 0,1,0,0, 0,0,1,0, 0,0,0,1]}]})"));
  } catch (const Error& e) {
    camera_named = std::string(e.what()).find("cam_bad") != std::string::npos;
  }
  return Check("rig_validation", named && camera_named,
               "empty rig rejected (\"" + message + "\"), bad camera reported by name");
}

}  // namespace

bool SelfCheckReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

void SelfCheckReport::Print(std::ostream& os) const {
  for (const CheckResult& c : checks) {
    os << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
  }
}

CameraModel SelfCheckPinholeCamera() {
  return CameraModel::Pinhole("check_pinhole", CheckIntrinsics(320), CheckPose());
}

CameraModel SelfCheckKbCamera() {
  return CameraModel::KbFisheye("check_kb", CheckIntrinsics(204), CheckPose(),
                                KbDistortion{{-0.02, 0.001, 0.0, 0.0}}, 92.5 * std::numbers::pi / 180);
}

CameraModel SelfCheckMeiCamera() {
  return CameraModel::MeiFisheye("check_mei", CheckIntrinsics(611), CheckPose(),
                                 MeiDistortion{0.0166, 0.0012, 2.2}, 92.5 * std::numbers::pi / 180);
}

RoundTripStats MeasureRoundTrip(const CameraModel& cam, int samples, std::uint64_t seed) {
  RoundTripStats stats;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, cam.width() - 1.0);
  std::uniform_real_distribution<double> v(0.0, cam.height() - 1.0);
  std::uniform_real_distribution<double> depth(0.5, 50.0);
  int attempts = 0;
  while (stats.samples < samples && attempts < 20 * samples) {
    ++attempts;
    const Eigen::Vector2d uv(u(rng), v(rng));
    const double d = depth(rng);
    const Unprojection back = cam.Unproject(uv, d);
    if (!back.ok()) continue;  // outside the model's domain
    ++stats.samples;
    const Projection again = cam.Project(back.point);
    if (!again.ok()) {
      ++stats.failures;
      continue;
    }
    stats.max_pixel_error = std::max(stats.max_pixel_error, (again.uv - uv).norm());
    // 3D round trip of a point on the same ray at a range drawn from the same
    // interval. Ranging by z would put near-90-degree points kilometres away.
    const Eigen::Vector3d pc = cam.extrinsics().ToCamera(back.point);
    const Eigen::Vector3d moved = pc.normalized() * depth(rng);
    const Projection q = cam.ProjectFromCamera(moved);
    if (!q.ok()) {
      ++stats.failures;
      continue;
    }
    const Unprojection r = cam.UnprojectToCamera(q.uv, moved.z());
    if (!r.ok()) {
      ++stats.failures;
      continue;
    }
    stats.max_point_error = std::max(stats.max_point_error, (r.point - moved).norm());
  }
  if (const InverseLut* lut = cam.lut()) {
    std::mt19937_64 probe(seed + 1);
    const InverseLut exact = BuildInverseLut(cam, lut->resolution());
    std::uniform_real_distribution<double> x(exact.x_min(), exact.x_max());
    for (int i = 0; i < 10000; ++i) {
      const double xi = x(probe);
      const double yi = cam.kind() == CameraKind::kKbFisheye ? cam.kb().Phi(xi)
                                                             : cam.mei().DistortedRadius(xi);
      stats.max_seed_error = std::max(stats.max_seed_error, std::abs(lut->Seed(yi) - xi));
    }
  }
  return stats;
}

std::vector<std::uint8_t> BruteForceVisibility(const CameraModel& cam, const GridSpec& spec) {
  const Eigen::Matrix4d& m = cam.extrinsics().matrix();
  const Intrinsics& k = cam.intrinsics();
  std::vector<std::uint8_t> visible(spec.num_voxels(), 0);
  for (int s = 0; s < spec.num_voxels(); ++s) {
    const Eigen::Vector3d c = spec.Center(s);
    double pc[3];
    for (int r = 0; r < 3; ++r) pc[r] = m(r, 0) * c.x() + m(r, 1) * c.y() + m(r, 2) * c.z() + m(r, 3);
    const double x = pc[0];
    const double y = pc[1];
    const double z = pc[2];
    if (!(z > 1e-9)) continue;
    const double lateral = std::sqrt(x * x + y * y);
    const double theta = std::atan2(lateral, z);
    double mx = x / z;
    double my = y / z;
    switch (cam.kind()) {
      case CameraKind::kPinhole:
        break;
      case CameraKind::kKbFisheye: {
        if (theta > cam.fov_max()) continue;
        if (lateral > 0.0) {
          const auto& w = cam.kb().omega;
          const double t2 = theta * theta;
          const double phi = theta * (1 + t2 * (w[0] + t2 * (w[1] + t2 * (w[2] + t2 * w[3]))));
          mx = phi * x / lateral;
          my = phi * y / lateral;
        }
        break;
      }
      case CameraKind::kMeiFisheye: {
        if (theta > cam.fov_max()) continue;
        const double denom = z + cam.mei().epsilon * std::sqrt(x * x + y * y + z * z);
        const double a = x / denom;
        const double b = y / denom;
        const double r2 = a * a + b * b;
        const double phi = 1 + cam.mei().omega1 * r2 + cam.mei().omega2 * r2 * r2;
        mx = phi * a;
        my = phi * b;
        break;
      }
    }
    const double u = k.fx * mx + k.cx;
    const double v = k.fy * my + k.cy;
    visible[s] = u >= 0 && v >= 0 && u <= k.width - 1 && v <= k.height - 1;
  }
  return visible;
}

InverseLut CorruptLut(const InverseLut& lut, double amount) {
  std::vector<double> xs(lut.xs().begin(), lut.xs().end());
  std::vector<double> ys(lut.ys().begin(), lut.ys().end());
  const double n = static_cast<double>(ys.size() - 1);
  for (size_t i = 0; i < ys.size(); ++i) {
    ys[i] *= 1.0 + amount * std::sin(std::numbers::pi * static_cast<double>(i) / n);
  }
  return InverseLut(std::move(xs), std::move(ys));
}

SelfCheckReport RunSelfCheck(const SelfCheckOptions& options) {
  SelfCheckReport report;
  auto guarded = [&](const char* name, auto&& body) {
    try {
      report.checks.push_back(body());
    } catch (const std::exception& e) {
      report.checks.push_back(Check(name, false, std::string("threw: ") + e.what()));
    }
  };
  guarded("pinhole_roundtrip",
          [&] { return RoundTripCheck("pinhole_roundtrip", SelfCheckPinholeCamera(), options); });
  guarded("kb_roundtrip", [&] {
    CameraModel kb = SelfCheckKbCamera();
    if (options.corrupt_lut) kb = kb.WithLut(CorruptLut(*kb.lut()));
    return RoundTripCheck("kb_roundtrip", kb, options);
  });
  guarded("mei_roundtrip",
          [&] { return RoundTripCheck("mei_roundtrip", SelfCheckMeiCamera(), options); });
  guarded("degenerate_mei_pinhole", [&] { return DegenerateMei(options); });
  guarded("degenerate_kb_pinhole", [&] { return DegenerateKb(options); });
  guarded("mask_oracle", [&] { return MaskOracle(); });
  guarded("mask_lift_consistency", [&] { return MaskLiftConsistency(); });
  guarded("fusion_identity", [&] { return FusionIdentity(options); });
  guarded("softmax_bounds", [&] { return SoftmaxBounds(options); });
  guarded("loss_identities", [&] { return LossIdentities(options); });
  guarded("render_roundtrip", [&] { return RenderRoundTrip(); });
  guarded("rig_validation", [&] { return RigValidation(); });
  if (options.rig_path) {
    guarded("rig_file", [&] {
      const RigConfig rig = LoadRig(*options.rig_path);
      return Check("rig_file", true,
                   options.rig_path->string() + ": " + std::to_string(rig.cameras.size()) +
                       " cameras valid");
    });
  }
  return report;
}

}  // namespace hetdepth
