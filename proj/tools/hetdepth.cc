// Command line driver for the heterogeneous-rig depth pipeline.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hetdepth/camera.h"
#include "hetdepth/cost_volume.h"
#include "hetdepth/error.h"
#include "hetdepth/image_io.h"
#include "hetdepth/metrics.h"
#include "hetdepth/pipeline.h"
#include "hetdepth/rig.h"
#include "hetdepth/scene.h"
#include "hetdepth/self_check.h"
#include "hetdepth/warp.h"

namespace fs = std::filesystem;
using namespace hetdepth;

namespace {

struct GlobalFlags {
  std::string rig;
  std::string scene;
  std::string out = "hetdepth_out";
  std::optional<std::uint64_t> seed;
  std::string grid;  // X,Y,Z
  std::string bins;  // D,dmin,dmax,spacing
};

std::vector<std::string> SplitComma(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) parts.push_back(item);
  return parts;
}

std::vector<double> ParseNumbers(const std::string& text, size_t count, const char* what) {
  const auto parts = SplitComma(text);
  if (parts.size() != count) {
    throw Error(ErrorCode::kInvalidConfig,
                std::string(what) + " expects " + std::to_string(count) + " comma-separated values");
  }
  std::vector<double> values;
  for (const auto& p : parts) {
    try {
      size_t used = 0;
      values.push_back(std::stod(p, &used));
      if (used != p.size()) throw std::invalid_argument(p);
    } catch (const std::exception&) {
      throw Error(ErrorCode::kInvalidConfig, std::string(what) + ": bad number '" + p + "'");
    }
  }
  return values;
}

RigConfig LoadRigFlags(const GlobalFlags& flags) {
  RigConfig rig = flags.rig.empty() ? ReferenceRig() : LoadRig(flags.rig);
  if (!flags.grid.empty()) {
    const auto r = ParseNumbers(flags.grid, 3, "--grid");
    rig.grid.resolution = {static_cast<int>(r[0]), static_cast<int>(r[1]), static_cast<int>(r[2])};
  }
  if (!flags.bins.empty()) {
    const auto parts = SplitComma(flags.bins);
    if (parts.size() != 4) {
      throw Error(ErrorCode::kInvalidConfig, "--bins expects D,dmin,dmax,spacing");
    }
    const auto numbers = ParseNumbers(parts[0] + "," + parts[1] + "," + parts[2], 3, "--bins");
    const auto spacing = BinSpacingFromName(parts[3]);
    if (!spacing) throw Error(ErrorCode::kInvalidConfig, "--bins spacing must be uniform or inverse");
    rig.bins = {static_cast<int>(numbers[0]), numbers[1], numbers[2], *spacing};
  }
  if (flags.seed) {
    rig.seeds = {*flags.seed, *flags.seed + 1, *flags.seed + 2};
  }
  rig.Validate();
  return rig;
}

SceneSpec LoadSceneFlags(const GlobalFlags& flags) {
  return flags.scene.empty() ? ReferenceScene(false) : LoadScene(flags.scene);
}

int CameraIndex(const RigConfig& rig, const std::string& name) {
  if (name.empty()) return 0;
  const int index = rig.IndexOf(name);
  if (index < 0) throw Error(ErrorCode::kInvalidConfig, "no camera named '" + name + "' in rig");
  return index;
}

fs::path OutDir(const GlobalFlags& flags) {
  fs::create_directories(flags.out);
  return flags.out;
}

void WriteText(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  os << text;
}

// Mean over channels, for 8-bit previews of multi-channel images.
FeatureMap ChannelMean(const FeatureMap& image) {
  FeatureMap out(image.height(), image.width(), 1, MapRole::kColor);
  for (int v = 0; v < image.height(); ++v) {
    for (int u = 0; u < image.width(); ++u) {
      double sum = 0.0;
      for (const double c : image.at(v, u)) sum += c;
      out(v, u) = sum / image.channels();
    }
  }
  return out;
}

std::string MetricsRow(const DepthMetrics& m) {
  return std::to_string(m.count) + "," + CsvNumber(m.abs_rel) + "," + CsvNumber(m.rmse) + "," +
         CsvNumber(m.delta1);
}

int CmdProject(const GlobalFlags& flags, const std::string& camera, const std::string& point,
               const std::string& pixel, double depth) {
  const RigConfig rig = LoadRigFlags(flags);
  const CameraModel& cam = rig.cameras[CameraIndex(rig, camera)];
  if (!point.empty()) {
    const auto p = ParseNumbers(point, 3, "--point");
    const Projection proj = cam.Project(Eigen::Vector3d(p[0], p[1], p[2]));
    std::cout << "camera,u,v,depth,status\n"
              << cam.name() << ',' << CsvNumber(proj.uv.x()) << ',' << CsvNumber(proj.uv.y()) << ','
              << CsvNumber(proj.depth) << ',' << ProjectionStatusName(proj.status) << '\n';
    return proj.ok() ? 0 : 1;
  }
  if (pixel.empty()) throw Error(ErrorCode::kInvalidConfig, "project needs --point or --pixel");
  const auto uv = ParseNumbers(pixel, 2, "--pixel");
  const Unprojection back = cam.Unproject(Eigen::Vector2d(uv[0], uv[1]), depth);
  std::cout << "camera,x,y,z,status\n"
            << cam.name() << ',' << CsvNumber(back.point.x()) << ',' << CsvNumber(back.point.y())
            << ',' << CsvNumber(back.point.z()) << ',' << ProjectionStatusName(back.status) << '\n';
  return back.ok() ? 0 : 1;
}

int CmdRoundTrip(const GlobalFlags& flags, int samples) {
  const RigConfig rig = LoadRigFlags(flags);
  const std::uint64_t seed = flags.seed.value_or(2024);
  bool ok = true;
  std::cout << "camera,kind,samples,refused,max_pixel_err,max_point_err,max_seed_err,seconds,pass\n";
  for (const CameraModel& cam : rig.cameras) {
    const auto start = std::chrono::steady_clock::now();
    const RoundTripStats s = MeasureRoundTrip(cam, samples, seed);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool pass = s.failures == 0 && s.max_pixel_error < kRoundTripPixelTol &&
                      s.max_point_error < kRoundTripPointTol && s.max_seed_error < kLutSeedTol;
    ok = ok && pass;
    std::cout << cam.name() << ',' << CameraKindName(cam.kind()) << ',' << s.samples << ','
              << s.failures << ',' << CsvNumber(s.max_pixel_error) << ','
              << CsvNumber(s.max_point_error) << ',' << CsvNumber(s.max_seed_error) << ','
              << CsvNumber(seconds) << ',' << (pass ? 1 : 0) << '\n';
  }
  return ok ? 0 : 1;
}

int CmdOverlap(const GlobalFlags& flags, bool slices) {
  const RigConfig rig = LoadRigFlags(flags);
  const OverlapMask masks = ComputeMasks(rig.cameras, rig.grid);
  const std::string csv = OverlapCsv(rig, masks);
  std::cout << csv;
  const fs::path out = OutDir(flags);
  WriteText(out / "overlap.csv", csv);
  if (slices) {
    const auto& res = rig.grid.resolution;
    for (int i = 0; i < masks.num_views(); ++i) {
      for (int z = 0; z < res[2]; ++z) {
        // Rows are x (forward), columns y (left).
        FeatureMap slice(res[0], res[1], 1);
        for (int x = 0; x < res[0]; ++x) {
          for (int y = 0; y < res[1]; ++y) slice(x, y) = masks.views[i][rig.grid.Index(x, y, z)];
        }
        WritePgm(out / (rig.cameras[i].name() + "_mask_z" + std::to_string(z) + ".pgm"), slice, 255,
                 255.0);
      }
    }
  }
  return 0;
}

int CmdFuse(const GlobalFlags& flags) {
  const RigConfig rig = LoadRigFlags(flags);
  const SceneSpec scene = LoadSceneFlags(flags);
  const FusedScene fused = BuildFusedScene(rig, scene);
  const auto& res = rig.grid.resolution;
  // Stored as a (X*Y) x Z x C blob.
  FeatureMap blob(res[0] * res[1], res[2], fused.fused.channels());
  blob.data() = fused.fused.data();
  const fs::path out = OutDir(flags);
  WriteFeatureBlob(out / "fused.blob", blob);
  int nonzero = 0;
  double norm_sum = 0.0;
  for (int s = 0; s < fused.fused.num_voxels(); ++s) {
    double n2 = 0.0;
    for (const double x : fused.fused.at(s)) n2 += x * x;
    if (n2 > 0.0) ++nonzero;
    norm_sum += std::sqrt(n2);
  }
  std::ostringstream csv;
  csv << "voxels,channels,nonzero_voxels,mean_norm\n"
      << fused.fused.num_voxels() << ',' << fused.fused.channels() << ',' << nonzero << ','
      << CsvNumber(norm_sum / fused.fused.num_voxels()) << '\n';
  std::cout << csv.str();
  WriteText(out / "fuse.csv", csv.str());
  return 0;
}

int CmdCostVol(const GlobalFlags& flags, const std::string& camera) {
  const RigConfig rig = LoadRigFlags(flags);
  const SceneSpec scene = LoadSceneFlags(flags);
  const int view = CameraIndex(rig, camera);
  const auto start = std::chrono::steady_clock::now();
  const FusedScene fused = BuildFusedScene(rig, scene);
  const ViewDepth depth = EstimateViewDepth(fused, rig, view);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const std::string& name = rig.cameras[view].name();
  const FeatureMap& gt = fused.renders[view].depth;
  const ViewRegions regions = ComputeViewRegions(rig, fused.masks, gt, view);
  const fs::path out = OutDir(flags);
  WritePfm(out / (name + "_depth.pfm"), depth.center_depth);
  WritePgm(out / (name + "_density.pgm"), depth.density, 255, 255.0);
  FeatureMap argmax(gt.height(), gt.width(), 1);
  for (size_t i = 0; i < depth.argmax.size(); ++i) argmax.data()[i] = depth.argmax[i];
  WritePgm(out / (name + "_argmax.pgm"), argmax, 65535);
  std::ostringstream csv;
  csv << "camera,region,count,abs_rel,rmse,delta1,argmax_acc,seconds\n";
  for (const auto& [region, mask] :
       {std::pair{"grid", &regions.in_grid}, std::pair{"overlap", &regions.overlap}}) {
    if (std::find(mask->begin(), mask->end(), 1) == mask->end()) continue;
    const DepthMetrics m = ComputeMetrics(depth.center_depth, gt, *mask);
    const double acc = ArgmaxAccuracy(depth.argmax, gt, fused.bins, rig.bins.spacing, *mask);
    csv << name << ',' << region << ',' << MetricsRow(m) << ',' << CsvNumber(acc) << ','
        << CsvNumber(seconds) << '\n';
  }
  std::cout << csv.str();
  WriteText(out / (name + "_costvol.csv"), csv.str());
  return 0;
}

int CmdWarp(const GlobalFlags& flags, const std::string& source, const std::string& target,
            const std::string& depth_pfm, bool temporal) {
  const RigConfig rig = LoadRigFlags(flags);
  const SceneSpec scene = LoadSceneFlags(flags);
  const int t = CameraIndex(rig, target);
  const CameraModel& target_cam = rig.cameras[t];
  const RenderedView target_view = RenderScene(scene, target_cam);
  const FeatureMap depth = depth_pfm.empty() ? target_view.depth : ReadPfm(depth_pfm);
  WarpResult warped;
  std::string label;
  if (temporal) {
    const PosePair pose(rig.ego_motion);
    const CameraModel later =
        target_cam.WithExtrinsics(target_cam.extrinsics().Compose(pose.matrix()));
    warped = TemporalWarp(RenderScene(scene, later).color, target_cam, depth, pose);
    label = target_cam.name() + "@t'";
  } else {
    const int s = CameraIndex(rig, source);
    warped = SpatialWarp(RenderScene(scene, rig.cameras[s]).color, rig.cameras[s], target_cam, depth);
    label = rig.cameras[s].name();
  }
  std::vector<std::uint8_t> mask = warped.valid;
  for (size_t i = 0; i < mask.size(); ++i) mask[i] = mask[i] && depth.data()[i] > 0.0;
  const double loss = PhotometricLoss(warped.image, target_view.color, mask, rig.loss_weights.beta);
  const fs::path out = OutDir(flags);
  const std::string stem = "warp_" + (temporal ? std::string("temporal") : label) + "_to_" +
                           target_cam.name();
  WritePgm(out / (stem + ".pgm"), ChannelMean(warped.image), 255, 255.0);
  std::ostringstream csv;
  csv << "source,target,valid,photometric\n"
      << label << ',' << target_cam.name() << ',' << warped.num_valid << ',' << CsvNumber(loss)
      << '\n';
  std::cout << csv.str();
  WriteText(out / (stem + ".csv"), csv.str());
  return 0;
}

int CmdMetrics(const std::string& pred, const std::string& gt, const std::string& mask_path) {
  const FeatureMap p = ReadPfm(pred);
  const FeatureMap g = ReadPfm(gt);
  std::vector<std::uint8_t> mask;
  if (!mask_path.empty()) {
    const FeatureMap m = ReadPgm(mask_path);
    mask.resize(m.data().size());
    for (size_t i = 0; i < mask.size(); ++i) mask[i] = m.data()[i] > 0.0;
  }
  const DepthMetrics m = ComputeMetrics(p, g, mask);
  std::cout << "count,abs_rel,rmse,delta1\n" << MetricsRow(m) << '\n';
  return 0;
}

int CmdRender(const GlobalFlags& flags, const std::string& camera) {
  const RigConfig rig = LoadRigFlags(flags);
  const SceneSpec scene = LoadSceneFlags(flags);
  const fs::path out = OutDir(flags);
  for (int i = 0; i < static_cast<int>(rig.cameras.size()); ++i) {
    const CameraModel& cam = rig.cameras[i];
    if (!camera.empty() && cam.name() != camera) continue;
    const RenderedView view = RenderScene(scene, cam);
    WritePfm(out / (cam.name() + "_gt.pfm"), view.depth);
    WritePgm(out / (cam.name() + "_color.pgm"), ChannelMean(view.color), 255, 255.0);
    int hits = 0;
    for (const double d : view.depth.data()) hits += d > 0.0;
    std::cout << cam.name() << ": " << hits << " of " << view.depth.num_pixels()
              << " pixels hit the scene\n";
  }
  if (!camera.empty()) CameraIndex(rig, camera);
  return 0;
}

int CmdPipeline(const GlobalFlags& flags, bool baselines) {
  const RigConfig rig = LoadRigFlags(flags);
  const SceneSpec scene = LoadSceneFlags(flags);
  const PipelineReport report = RunPipeline(rig, scene, {OutDir(flags), baselines});
  std::cout << "view,region,count,abs_rel,rmse,delta1\n";
  for (const ViewReport& view : report.views) {
    if (view.metrics_grid) std::cout << view.name << ",grid," << MetricsRow(*view.metrics_grid) << '\n';
    if (view.metrics_overlap) {
      std::cout << view.name << ",overlap," << MetricsRow(*view.metrics_overlap) << '\n';
    }
    if (view.single_view_overlap) {
      std::cout << view.name << ",overlap_single_view," << MetricsRow(*view.single_view_overlap)
                << '\n';
    }
  }
  for (const std::string& failure : report.failures) std::cerr << "threshold: " << failure << '\n';
  return report.passed() ? 0 : 1;
}

int CmdSelfCheck(const GlobalFlags& flags, bool corrupt_lut, int samples) {
  SelfCheckOptions options;
  options.seed = flags.seed.value_or(options.seed);
  options.samples = samples;
  options.corrupt_lut = corrupt_lut;
  if (!flags.rig.empty()) options.rig_path = flags.rig;
  const SelfCheckReport report = RunSelfCheck(options);
  report.Print(std::cout);
  return report.passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Depth estimation for heterogeneous pinhole/fisheye camera rigs"};
  app.fallthrough();
  app.require_subcommand(1);
  GlobalFlags flags;
  app.add_option("--rig", flags.rig, "Rig JSON file (default: built-in front pinhole + fisheye)");
  app.add_option("--scene", flags.scene, "Scene JSON file (default: textured wall)");
  app.add_option("--out", flags.out, "Output directory")->capture_default_str();
  app.add_option("--seed", flags.seed, "Seed for transforms, ranking pairs and the Gaussian head");
  app.add_option("--grid", flags.grid, "Voxel counts X,Y,Z");
  app.add_option("--bins", flags.bins, "Depth bins D,dmin,dmax,spacing (uniform|inverse)");

  std::string camera;
  std::string point;
  std::string pixel;
  double depth = 1.0;
  auto* project = app.add_subcommand("project", "Project an ego point or back-project a pixel");
  project->add_option("--camera", camera, "Camera name (default: first)");
  project->add_option("--point", point, "Ego-frame point x,y,z");
  project->add_option("--pixel", pixel, "Pixel u,v");
  project->add_option("--depth", depth, "Camera-frame depth for --pixel");

  int samples = 100000;
  auto* roundtrip = app.add_subcommand("roundtrip-check", "Project/unproject round trips per camera");
  roundtrip->add_option("--samples", samples, "Samples per camera")->capture_default_str();

  bool slices = false;
  auto* overlap = app.add_subcommand("overlap", "Visibility masks and pairwise overlap CSV");
  overlap->add_flag("--slices", slices, "Also write per-z-slice mask PGMs");

  auto* fuse = app.add_subcommand("fuse", "Lift, mask and fuse the rig's features");

  auto* costvol = app.add_subcommand("costvol", "Cost volume depth for one camera");
  costvol->add_option("--camera", camera, "Camera name (default: first)");

  std::string source;
  std::string target;
  std::string depth_pfm;
  bool temporal = false;
  auto* warp = app.add_subcommand("warp", "Warp a view into another and report the photometric loss");
  warp->add_option("--source", source, "Source camera (spatial warp)");
  warp->add_option("--target", target, "Target camera")->required();
  warp->add_option("--depth", depth_pfm, "Target depth PFM (default: analytic depth)");
  warp->add_flag("--temporal", temporal, "Warp the target's next frame instead (rig ego motion)");

  std::string pred;
  std::string gt;
  std::string mask;
  auto* metrics = app.add_subcommand("metrics", "AbsRel/RMSE/delta1 of a predicted depth PFM");
  metrics->add_option("--pred", pred, "Predicted depth PFM")->required();
  metrics->add_option("--gt", gt, "Ground-truth depth PFM")->required();
  metrics->add_option("--mask", mask, "Mask PGM (nonzero = evaluated)");

  auto* render = app.add_subcommand("render", "Render analytic depth and color");
  render->add_option("--camera", camera, "Camera name (default: all)");

  bool baselines = false;
  auto* pipeline = app.add_subcommand("pipeline", "Run the full pipeline and write artifacts");
  pipeline->add_flag("--baselines", baselines, "Also run every camera alone for comparison");

  bool corrupt = false;
  int check_samples = 20000;
  auto* self_check = app.add_subcommand("self-check", "Run the built-in invariant checks");
  self_check->add_flag("--corrupt-lut", corrupt, "Inject a damaged KB inverse table");
  self_check->add_option("--samples", check_samples, "Round-trip samples")->capture_default_str();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*project) return CmdProject(flags, camera, point, pixel, depth);
    if (*roundtrip) return CmdRoundTrip(flags, samples);
    if (*overlap) return CmdOverlap(flags, slices);
    if (*fuse) return CmdFuse(flags);
    if (*costvol) return CmdCostVol(flags, camera);
    if (*warp) {
      if (!temporal && source.empty()) {
        throw Error(ErrorCode::kInvalidConfig, "spatial warp needs --source");
      }
      return CmdWarp(flags, source, target, depth_pfm, temporal);
    }
    if (*metrics) return CmdMetrics(pred, gt, mask);
    if (*render) return CmdRender(flags, camera);
    if (*pipeline) return CmdPipeline(flags, baselines);
    if (*self_check) return CmdSelfCheck(flags, corrupt, check_samples);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
