// Acceptance run: one PASS/FAIL line per criterion, exit code 1 if any fail.
// Usage: acceptance [--cli <path to hetdepth>] [--work <dir>]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hetdepth/camera.h"
#include "hetdepth/cost_volume.h"
#include "hetdepth/error.h"
#include "hetdepth/hsf.h"
#include "hetdepth/losses.h"
#include "hetdepth/pipeline.h"
#include "hetdepth/rig.h"
#include "hetdepth/scene.h"
#include "hetdepth/warp.h"
#include "oracles.h"

namespace fs = std::filesystem;
using namespace hetdepth;

namespace {

constexpr double kPi = std::numbers::pi;

// Tolerances and budgets.
constexpr int kRoundTripSamples = 100000;
constexpr double kRoundTripPixelTol = 1e-6;  // px
constexpr double kRoundTripPointTol = 1e-6;  // m
constexpr double kRoundTripSeconds = 10.0;
constexpr int kReductionSamples = 10000;
constexpr double kReductionTol = 1e-9;
constexpr double kFuseTol = 1e-12;
constexpr double kArgmaxAccuracyMin = 0.99;
constexpr double kCostVolumeAbsRelMax = 0.02;
constexpr double kCostVolumeSeconds = 60.0;
constexpr double kSilogScaleTol = 1e-9;
constexpr double kTotalLossTol = 1e-12;
constexpr double kWarpLossMax = 0.01;
constexpr double kBenefitSlack = 1.05;

struct Outcome {
  bool passed = false;
  std::string detail;
};

std::string Fmt(const char* format, auto... args) {
  char buffer[512];
  std::snprintf(buffer, sizeof(buffer), format, args...);
  return buffer;
}

double Seconds(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
}

// 1 -------------------------------------------------------------------------

struct RoundTrip {
  int samples = 0;
  int refused = 0;   // outside the model's back-projection domain
  int failures = 0;  // refused where it must not be
  double pixel = 0.0;
  double point = 0.0;
};

RoundTrip MeasureRoundTrip(const CameraModel& cam, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const Intrinsics& k = cam.intrinsics();
  std::uniform_real_distribution<double> u(0, k.width - 1), v(0, k.height - 1);
  std::uniform_real_distribution<double> depth(0.5, 50.0), range(0.5, 50.0);
  RoundTrip out;
  while (out.samples < kRoundTripSamples) {
    const Eigen::Vector2d uv(u(rng), v(rng));
    const Unprojection back = cam.Unproject(uv, depth(rng));
    if (!back.ok()) {
      if (!cam.is_fisheye()) ++out.failures;
      ++out.refused;
      continue;
    }
    ++out.samples;
    const Projection again = cam.Project(back.point);
    if (!again.ok()) {
      ++out.failures;
      continue;
    }
    out.pixel = std::max(out.pixel, (again.uv - uv).norm());

    // 3D: a point on the same ray at a random range.
    const Eigen::Vector3d ray = cam.extrinsics().ToCamera(back.point).normalized();
    const Eigen::Vector3d p = cam.extrinsics().ToEgo(ray * range(rng));
    const Projection proj = cam.Project(p);
    const Unprojection lifted = proj.ok() ? cam.Unproject(proj.uv, proj.depth) : Unprojection{};
    if (!proj.ok() || !lifted.ok()) {
      ++out.failures;
      continue;
    }
    out.point = std::max(out.point, (lifted.point - p).norm());
  }
  return out;
}

Outcome CameraRoundTrip() {
  const std::vector<CameraModel> cams{FrontPinhole("pinhole", {0, 0, 1.5}),
                                      FrontKbFisheye("kb", {0, -2, 1.5}),
                                      RightMeiFisheye("mei", {-0.5, -0.9, 1.2})};
  const auto start = std::chrono::steady_clock::now();
  bool ok = true;
  std::string detail;
  for (size_t i = 0; i < cams.size(); ++i) {
    const RoundTrip r = MeasureRoundTrip(cams[i], 1000 + i);
    ok = ok && r.failures == 0 && r.pixel < kRoundTripPixelTol && r.point < kRoundTripPointTol;
    detail += Fmt("%s n=%d px=%.2e m=%.2e fail=%d; ", cams[i].name().c_str(), r.samples, r.pixel,
                  r.point, r.failures);
  }
  const double seconds = Seconds(start);
  ok = ok && seconds < kRoundTripSeconds;
  return {ok, detail + Fmt("%.2f s", seconds)};
}

// 2 -------------------------------------------------------------------------

Outcome DegenerateReductions() {
  const Intrinsics k{611, 611, 319.5, 175.5, 640, 352};
  std::mt19937_64 rng(2002);
  std::uniform_real_distribution<double> unit(0, 1);
  const Extrinsics pose = Extrinsics::FromPose(FrontLooking(), Eigen::Vector3d(0.2, -0.1, 1.4));
  const auto pinhole = CameraModel::Pinhole("pin", k, pose);
  const auto mei = CameraModel::MeiFisheye("mei0", k, pose, MeiDistortion{0, 0, 0}, 80 * kPi / 180);
  const auto kb = CameraModel::KbFisheye("kb0", k, pose, KbDistortion{}, 92.5 * kPi / 180);

  // Camera-frame direction at incident angle theta, azimuth phi.
  auto direction = [](double theta, double phi) {
    return Eigen::Vector3d(std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi),
                           std::cos(theta));
  };
  double mei_px = 0, mei_m = 0, kb_axis = 0, kb_closed = 0;
  for (int i = 0; i < kReductionSamples; ++i) {
    const double phi = 2 * kPi * unit(rng);
    const double range = 0.5 + 49.5 * unit(rng);

    // MEI without mirror or distortion is the pinhole, up to 60 degrees here.
    const Eigen::Vector3d pc = direction(60 * kPi / 180 * unit(rng), phi) * range;
    const Eigen::Vector3d p = pose.ToEgo(pc);
    mei_px = std::max(mei_px, (mei.Project(p).uv - pinhole.Project(p).uv).norm());
    const Eigen::Vector2d uv(639 * unit(rng), 351 * unit(rng));
    const double d = 0.5 + 49.5 * unit(rng);
    mei_m = std::max(mei_m, (mei.Unproject(uv, d).point - pinhole.Unproject(uv, d).point).norm());

    // KB with zero coefficients: phi(theta) = theta, which meets the pinhole
    // tan(theta) only in the axis limit; compare normalized coordinates for
    // theta <= 1e-3 (difference <= theta^3 / 3).
    const Eigen::Vector3d near_axis = direction(1e-3 * unit(rng), phi) * range;
    const Eigen::Vector2d kb_n = (kb.ProjectFromCamera(near_axis).uv - Eigen::Vector2d(k.cx, k.cy)) / k.fx;
    const Eigen::Vector2d pin_n = near_axis.head<2>() / near_axis.z();
    kb_axis = std::max(kb_axis, (kb_n - pin_n).norm());

    // Over the whole field of view it is the equidistant closed form.
    const double theta = 89.9 * kPi / 180 * unit(rng);
    const Eigen::Vector2d expected =
        Eigen::Vector2d(k.cx, k.cy) + k.fx * theta * Eigen::Vector2d(std::cos(phi), std::sin(phi));
    kb_closed = std::max(kb_closed, (kb.ProjectFromCamera(direction(theta, phi)).uv - expected).norm());
  }
  const bool ok = mei_px < kReductionTol && mei_m < kReductionTol && kb_axis < kReductionTol &&
                  kb_closed < kReductionTol;
  return {ok, Fmt("n=%d mei-pinhole %.1e px / %.1e m; kb-pinhole near axis %.1e; "
                  "kb-equidistant %.1e px",
                  kReductionSamples, mei_px, mei_m, kb_axis, kb_closed)};
}

// 3 -------------------------------------------------------------------------

Outcome MaskOracle() {
  bool ok = true;
  std::string detail;
  const char* labels[] = {"a", "b", "c"};
  int label = 0;
  for (const auto arrangement :
       {RigArrangement::kFrontPair, RigArrangement::kTwoPinholeSideFisheye,
        RigArrangement::kFrontPinholeSideMei}) {
    const RigConfig rig = MakeRig(arrangement);
    const GridSpec& grid = rig.grid;
    const OverlapMask masks = ComputeMasks(rig.cameras, grid);
    long mismatches = 0, visible = 0;
    for (size_t i = 0; i < rig.cameras.size(); ++i) {
      for (int s = 0; s < grid.num_voxels(); ++s) {
        const bool expected = oracle::OracleVisible(rig.cameras[i], grid.Center(s));
        mismatches += expected != (masks.views[i][s] != 0);
        visible += expected;
      }
    }
    const bool grid_ok = grid.resolution == std::array<int, 3>{48, 48, 12};
    ok = ok && grid_ok && mismatches == 0 && visible > 0;
    detail += Fmt("(%s) %zu cams %dx%dx%d visible=%ld mismatches=%ld; ", labels[label++],
                  rig.cameras.size(), grid.resolution[0], grid.resolution[1], grid.resolution[2],
                  visible, mismatches);
  }
  return {ok, detail};
}

// 4 -------------------------------------------------------------------------

Outcome FuseReference() {
  std::mt19937_64 rng(4004);
  std::normal_distribution<double> normal;
  std::bernoulli_distribution coin(0.5);
  GridSpec spec;
  spec.resolution = {6, 7, 5};
  const int channels = 8;
  double worst = 0.0;
  for (const bool wrap : {false, true}) {
    std::vector<VoxelGrid> vols;
    OverlapMask masks;
    for (int i = 0; i < 3; ++i) {
      VoxelGrid g(spec, channels);
      for (double& x : g.data()) x = normal(rng);
      vols.push_back(std::move(g));
      std::vector<std::uint8_t> m(spec.num_voxels());
      for (auto& b : m) b = coin(rng);
      masks.views.push_back(std::move(m));
    }
    const FusionTransforms t = FusionTransforms::Seeded(channels, 77);
    const VoxelGrid fused = Fuse(vols, masks, t, {.wrap_around = wrap});
    const std::vector<double> expected = oracle::ReferenceFuse(vols, masks, t, wrap);
    for (size_t k = 0; k < expected.size(); ++k) {
      worst = std::max(worst, std::abs(fused.data()[k] - expected[k]));
    }
  }
  return {worst < kFuseTol, Fmt("3 views, C=%d, %d voxels, with/without wrap: max diff %.1e",
                                channels, spec.num_voxels(), worst)};
}

// 5 -------------------------------------------------------------------------

Outcome CostVolumeRecovery() {
  const RigConfig rig = ReferenceRig();
  const SceneSpec scene = ReferenceScene(false);
  const auto start = std::chrono::steady_clock::now();
  const FusedScene fused = BuildFusedScene(rig, scene);
  const ViewDepth est = EstimateViewDepth(fused, rig, 0);
  const double seconds = Seconds(start);
  const FeatureMap& gt = fused.renders[0].depth;
  const ViewRegions regions = ComputeViewRegions(rig, fused.masks, gt, 0);

  // Oracle: the wall is the only surface, so every pixel's depth is the
  // plane distance minus the camera's forward offset.
  const double wall = ReferencePlaneDistance() - rig.cameras[0].extrinsics().Center().x();
  int hits = 0;
  int correct = 0;
  double abs_rel = 0.0;
  const int target = fused.bins.Nearest(wall, rig.bins.spacing);
  for (int i = 0; i < gt.num_pixels(); ++i) {
    if (!regions.in_grid[i]) continue;
    ++hits;
    correct += est.argmax[i] == target;
    abs_rel += std::abs(est.center_depth.data()[i] - wall) / wall;
  }
  if (hits == 0) return {false, "no unoccluded in-grid pixels"};
  const double accuracy = static_cast<double>(correct) / hits;
  abs_rel /= hits;
  const bool ok = accuracy >= kArgmaxAccuracyMin && abs_rel < kCostVolumeAbsRelMax &&
                  seconds < kCostVolumeSeconds && target == kReferencePlaneBin;
  return {ok, Fmt("%s %dx%d, D=%d inverse [%.1f, %.1f], wall %.4f m (bin %d): pixels=%d "
                  "argmax acc=%.4f AbsRel=%.5f, %.1f s",
                  rig.cameras[0].name().c_str(), gt.width(), gt.height(), fused.bins.size(),
                  fused.bins.front(), fused.bins.back(), wall, target, hits, accuracy, abs_rel,
                  seconds)};
}

// 6 -------------------------------------------------------------------------

Outcome LossIdentities() {
  std::mt19937_64 rng(6006);
  std::uniform_real_distribution<double> d(0.5, 40), c(0, 1);
  FeatureMap pred(48, 64, 1, MapRole::kDepth), gt(48, 64, 1, MapRole::kDepth);
  for (double& x : pred.data()) x = d(rng);
  for (double& x : gt.data()) x = d(rng);
  const double base = SilogLoss(pred, gt);
  double scale_gap = 0.0;
  for (const double s : {0.1, 1.0, 10.0}) {
    FeatureMap scaled = pred;
    for (double& x : scaled.data()) x *= s;
    scale_gap = std::max(scale_gap, std::abs(SilogLoss(scaled, gt) - base));
  }
  FeatureMap image(48, 64, 3, MapRole::kColor);
  for (double& x : image.data()) x = c(rng);
  const double self = PhotometricLoss(image, image);
  const double total = ComputeTotalLoss(LossTerms{1, 1, 1, 1, 1, 1}).total;
  const bool ok = scale_gap < kSilogScaleTol && self == 0.0 &&
                  std::abs(total - 1.232) < kTotalLossTol;
  return {ok, Fmt("silog scale gap %.1e; photometric(x,x)=%g; total(unit)=%.15g", scale_gap, self,
                  total)};
}

// 7 -------------------------------------------------------------------------

Outcome WarpConsistency() {
  // Two pinholes and two fisheyes side by side, all facing the wall.
  const std::vector<CameraModel> cams{
      FrontPinhole("P1", {0, 0.6, 1.5}), FrontPinhole("P2", {0, -0.6, 1.5}),
      FrontKbFisheye("F1", {0, 0.3, 1.5}), FrontKbFisheye("F2", {0, -0.3, 1.5})};
  const SceneSpec scene = ReferenceScene(true);
  std::vector<RenderedView> views;
  for (const auto& cam : cams) views.push_back(RenderScene(scene, cam));
  struct Case {
    const char* name;
    int source;
    int target;
  };
  const Case cases[] = {{"F->F", 2, 3}, {"F->P", 2, 0}, {"P->F", 0, 3}, {"P->P", 0, 1}};
  bool ok = true;
  std::string detail;
  for (const Case& c : cases) {
    const WarpResult w =
        SpatialWarp(views[c.source].color, cams[c.source], cams[c.target], views[c.target].depth);
    const double loss = w.num_valid > 0
                            ? PhotometricLoss(w.image, views[c.target].color, w.valid)
                            : std::numeric_limits<double>::infinity();
    ok = ok && loss < kWarpLossMax;
    detail += Fmt("%s %.5f (%d px); ", c.name, loss, w.num_valid);
  }
  return {ok, detail + "scene " + scene.name};
}

// 8 -------------------------------------------------------------------------

Outcome HeterogeneousBenefit() {
  const PipelineReport report =
      RunPipeline(ReferenceRig(), ReferenceScene(false), {.out_dir = {}, .single_view_baselines = true});
  double best_single = std::numeric_limits<double>::infinity();
  for (const auto& view : report.views) {
    if (view.single_view_overlap) best_single = std::min(best_single, view.single_view_overlap->abs_rel);
  }
  bool ok = std::isfinite(best_single);
  std::string detail;
  for (const auto& view : report.views) {
    if (!view.metrics_overlap || !view.single_view_overlap) {
      ok = false;
      detail += view.name + " has no overlap pixels; ";
      continue;
    }
    const double fused = view.metrics_overlap->abs_rel;
    ok = ok && fused <= kBenefitSlack * best_single;
    detail += Fmt("%s fused %.5f vs alone %.5f (n=%d); ", view.name.c_str(), fused,
                  view.single_view_overlap->abs_rel, view.metrics_overlap->count);
  }
  return {ok, detail + Fmt("bound %.2f x %.5f", kBenefitSlack, best_single)};
}

// 9 -------------------------------------------------------------------------

std::string Slurp(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

Outcome Determinism(const std::string& cli, const fs::path& work) {
  fs::remove_all(work);
  fs::create_directories(work);
  const fs::path a = work / "run_a";
  const fs::path b = work / "run_b";
  if (cli.empty()) {
    RigConfig rig = ReferenceRig();
    rig.transforms = TransformMode::kSeeded;
    RunPipeline(rig, ReferenceScene(true), {.out_dir = a});
    RunPipeline(rig, ReferenceScene(true), {.out_dir = b});
  } else {
    for (const fs::path& dir : {a, b}) {
      const std::string command = "\"" + cli + "\" pipeline --seed 7 --out \"" + dir.string() +
                                  "\" > \"" + (work / (dir.filename().string() + ".log")).string() +
                                  "\" 2>&1";
      const int status = std::system(command.c_str());
      if (status != 0) return {false, "pipeline run failed: " + command};
    }
  }
  int files = 0;
  std::string differing;
  for (const auto& entry : fs::directory_iterator(a)) {
    const fs::path other = b / entry.path().filename();
    if (!fs::exists(other) || Slurp(entry.path()) != Slurp(other)) {
      differing += entry.path().filename().string() + " ";
    }
    ++files;
  }
  int files_b = 0;
  for ([[maybe_unused]] const auto& entry : fs::directory_iterator(b)) ++files_b;
  const bool ok = files > 0 && files == files_b && differing.empty();
  return {ok, Fmt("%d artifacts via %s, ", files, cli.empty() ? "library" : "cli") +
                  (differing.empty() ? std::string("all identical") : "differ: " + differing)};
}

}  // namespace

int main(int argc, char** argv) {
  std::string cli;
  fs::path work = fs::temp_directory_path() / "hetdepth_acceptance";
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string flag = argv[i];
    if (flag == "--cli") {
      cli = argv[i + 1];
    } else if (flag == "--work") {
      work = argv[i + 1];
    } else {
      std::cerr << "unknown flag " << flag << "\n";
      return 2;
    }
  }

  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "camera round-trip", CameraRoundTrip},
      {2, "degenerate reductions", DegenerateReductions},
      {3, "overlap-mask oracle", MaskOracle},
      {4, "fusion reference equivalence", FuseReference},
      {5, "cost-volume depth recovery", CostVolumeRecovery},
      {6, "loss identities", LossIdentities},
      {7, "warp consistency", WarpConsistency},
      {8, "heterogeneous benefit", HeterogeneousBenefit},
      {9, "determinism", [&] { return Determinism(cli, work); }},
  };
  int passed = 0;
  for (const Criterion& c : criteria) {
    Outcome outcome;
    try {
      outcome = c.run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("threw ") + e.what()};
    }
    passed += outcome.passed;
    std::cout << (outcome.passed ? "PASS" : "FAIL") << " " << c.id << " " << c.name << ": "
              << outcome.detail << std::endl;
  }
  std::cout << passed << "/" << criteria.size() << " criteria passed" << std::endl;
  return passed == static_cast<int>(criteria.size()) ? 0 : 1;
}
