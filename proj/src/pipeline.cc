#include "hetdepth/pipeline.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "hetdepth/error.h"
#include "hetdepth/image_io.h"
#include "hetdepth/lifting.h"
#include "hetdepth/warp.h"

namespace hetdepth {
namespace {

// Runs `body`, prefixing module errors with the stage name.
template <typename F>
auto Stage(const std::string& name, F&& body) {
  try {
    return body();
  } catch (const Error& e) {
    throw Error(e.code(), "stage '" + name + "': " + e.message());
  }
}

FeatureMap Disparity(const FeatureMap& depth) {
  FeatureMap disp(depth.height(), depth.width(), 1, MapRole::kDisparity);
  for (size_t i = 0; i < depth.data().size(); ++i) {
    const double d = depth.data()[i];
    disp.data()[i] = d > 0.0 ? 1.0 / d : 0.0;
  }
  return disp;
}

std::vector<std::uint8_t> And(const std::vector<std::uint8_t>& a,
                              const std::vector<std::uint8_t>& b) {
  std::vector<std::uint8_t> out(a.size());
  for (size_t i = 0; i < a.size(); ++i) out[i] = a[i] && b[i];
  return out;
}

bool Any(const std::vector<std::uint8_t>& mask) {
  return std::any_of(mask.begin(), mask.end(), [](std::uint8_t m) { return m != 0; });
}

std::optional<DepthMetrics> MaybeMetrics(const FeatureMap& pred, const FeatureMap& gt,
                                         const std::vector<std::uint8_t>& mask) {
  if (!Any(mask)) return std::nullopt;
  return ComputeMetrics(pred, gt, mask);
}

LossTerms ComputeLosses(const RigConfig& rig, const SceneSpec& scene, const FusedScene& fused,
                        int view, const FeatureMap& pred_depth,
                        const std::vector<std::uint8_t>& supervised) {
  const CameraModel& cam = rig.cameras[view];
  const FeatureMap& gt = fused.renders[view].depth;
  const FeatureMap& color = fused.renders[view].color;
  LossTerms terms;
  if (!Any(supervised)) return terms;
  const FeatureMap pred_disp = Disparity(pred_depth);
  const FeatureMap gt_disp = Disparity(gt);
  terms.l1 = L1Loss(pred_disp, gt_disp, supervised);
  terms.silog = SilogLoss(pred_disp, gt_disp, supervised);
  const auto pairs = SampleRankingPairs(gt_disp, supervised, rig.ranking_pairs,
                                        rig.ranking_epsilon, rig.seeds.ranking + view);
  terms.ranking = PseudoRankingLoss(pred_disp, pairs);
  terms.smoothness = SmoothnessLoss(pred_disp, color);

  const double beta = rig.loss_weights.beta;
  // Spatial: the next view in rig order, resampled into this one.
  const int n = static_cast<int>(rig.cameras.size());
  if (n > 1) {
    const int source = (view + 1) % n;
    const WarpResult warped =
        SpatialWarp(fused.renders[source].color, rig.cameras[source], cam, pred_depth);
    const auto mask = And(warped.valid, supervised);
    if (Any(mask)) terms.spatial = PhotometricLoss(warped.image, color, mask, beta);
  }
  // Temporal: the same camera after the rig's ego motion.
  const PosePair pose(rig.ego_motion);
  const CameraModel later = cam.WithExtrinsics(cam.extrinsics().Compose(pose.matrix()));
  const RenderedView frame = RenderScene(scene, later);
  const WarpResult warped = TemporalWarp(frame.color, cam, pred_depth, pose);
  const auto mask = And(warped.valid, supervised);
  if (Any(mask)) terms.temporal = PhotometricLoss(warped.image, color, mask, beta);
  return terms;
}

void WriteText(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  os << text;
}

FeatureMap ArgmaxImage(const std::vector<int>& argmax, int height, int width) {
  FeatureMap image(height, width, 1);
  for (size_t i = 0; i < argmax.size(); ++i) image.data()[i] = argmax[i];
  return image;
}

void WriteArtifacts(const std::filesystem::path& dir, const RigConfig& rig,
                    const PipelineReport& report) {
  std::filesystem::create_directories(dir);
  std::ostringstream metrics;
  std::ostringstream losses;
  std::ostringstream gaussians;
  metrics << kMetricsCsvHeader << '\n';
  losses << kLossesCsvHeader << '\n';
  gaussians << kGaussiansCsvHeader << '\n';
  auto metric_row = [&](const std::string& view, const char* region,
                        const std::optional<DepthMetrics>& m, std::optional<double> acc) {
    if (!m) return;
    metrics << view << ',' << region << ',' << m->count << ',' << CsvNumber(m->abs_rel) << ','
            << CsvNumber(m->rmse) << ',' << CsvNumber(m->delta1) << ','
            << (acc ? CsvNumber(*acc) : std::string()) << '\n';
  };
  for (const ViewReport& view : report.views) {
    WritePfm(dir / (view.name + "_depth.pfm"), view.center_depth);
    WritePfm(dir / (view.name + "_gt.pfm"), view.gt_depth);
    WritePgm(dir / (view.name + "_density.pgm"), view.density, 255, 255.0);
    WritePgm(dir / (view.name + "_argmax.pgm"),
             ArgmaxImage(view.argmax, view.center_depth.height(), view.center_depth.width()),
             65535);
    metric_row(view.name, "all", view.metrics_all, std::nullopt);
    metric_row(view.name, "grid", view.metrics_grid, view.argmax_accuracy);
    metric_row(view.name, "overlap", view.metrics_overlap, std::nullopt);
    metric_row(view.name, "overlap_single_view", view.single_view_overlap, std::nullopt);
    losses << view.name;
    const LossTerms& t = view.loss_terms;
    for (const double value : {t.l1, t.silog, t.ranking, t.smoothness, t.temporal, t.spatial,
                               view.loss.total}) {
      losses << ',' << CsvNumber(value);
    }
    losses << '\n';
    gaussians << view.name << ',' << view.gaussian_centers << ',' << CsvNumber(view.mean_density)
              << '\n';
  }
  WriteText(dir / "overlap.csv", OverlapCsv(rig, report.masks));
  WriteText(dir / "metrics.csv", metrics.str());
  WriteText(dir / "losses.csv", losses.str());
  WriteText(dir / "gaussians.csv", gaussians.str());
}

}  // namespace

FeatureMap DescriptorFeatures(const FeatureMap& color, double gain) {
  const int channels = color.channels();
  FeatureMap out(color.height(), color.width(), channels, MapRole::kFeature);
  for (int v = 0; v < color.height(); ++v) {
    for (int u = 0; u < color.width(); ++u) {
      const auto in = color.at(v, u);
      auto f = out.at(v, u);
      double mean = 0.0;
      for (const double c : in) mean += c;
      mean /= channels;
      double norm2 = 0.0;
      for (int c = 0; c < channels; ++c) {
        f[c] = in[c] - mean;
        norm2 += f[c] * f[c];
      }
      const double norm = std::sqrt(norm2);
      const double s = norm > 1e-12 ? gain / norm : 0.0;
      for (double& value : f) value *= s;
    }
  }
  return out;
}

FusedScene BuildFusedScene(const RigConfig& rig, const SceneSpec& scene) {
  Stage("config", [&] {
    rig.Validate();
    scene.Validate();
    return 0;
  });
  FusedScene out{{}, {}, {}, VoxelGrid(rig.grid, scene.channels),
                 Stage("bins", [&] { return rig.bins.Make(); })};
  Stage("render", [&] {
    for (const auto& cam : rig.cameras) out.renders.push_back(RenderScene(scene, cam));
    return 0;
  });
  Stage("features", [&] {
    for (const auto& r : out.renders) out.features.push_back(DescriptorFeatures(r.color, rig.feature_gain));
    return 0;
  });
  const auto volumes =
      Stage("lift", [&] { return LiftFeatures(out.features, rig.cameras, rig.grid); });
  out.masks = Stage("masks", [&] { return ComputeMasks(rig.cameras, rig.grid); });
  out.fused = Stage("fuse", [&] {
    const FusionTransforms transforms =
        rig.transforms == TransformMode::kSeeded
            ? FusionTransforms::Seeded(scene.channels, rig.seeds.transforms)
            : FusionTransforms::Identity(scene.channels);
    return Fuse(volumes, out.masks, transforms, FusionOptions{rig.wrap_around});
  });
  return out;
}

ViewDepth EstimateViewDepth(const FusedScene& fused, const RigConfig& rig, int view) {
  if (view < 0 || view >= static_cast<int>(rig.cameras.size())) {
    throw Error(ErrorCode::kIndexOutOfRange, "view index " + std::to_string(view));
  }
  const CameraModel& cam = rig.cameras[view];
  CostVolume cv = Stage("cost volume", [&] {
    return ComputeCostVolume(fused.features[view], cam, fused.fused, fused.bins);
  });
  FeatureMap depth = Stage("center depth", [&] { return CenterDepth(cv, fused.bins); });
  FeatureMap density = Stage("density", [&] { return Density(cv); });
  for (int v = 0; v < cv.height(); ++v) {
    for (int u = 0; u < cv.width(); ++u) {
      if (!cv.valid(v, u)) depth(v, u) = 0.0;
    }
  }
  std::vector<int> argmax = ArgmaxBin(cv);
  return {std::move(cv), std::move(depth), std::move(density), std::move(argmax)};
}

ViewRegions ComputeViewRegions(const RigConfig& rig, const OverlapMask& masks,
                               const FeatureMap& gt_depth, int view) {
  const CameraModel& cam = rig.cameras[view];
  const size_t n = static_cast<size_t>(gt_depth.num_pixels());
  ViewRegions regions{std::vector<std::uint8_t>(n, 0), std::vector<std::uint8_t>(n, 0),
                      std::vector<std::uint8_t>(n, 0)};
  for (int v = 0; v < gt_depth.height(); ++v) {
    for (int u = 0; u < gt_depth.width(); ++u) {
      const size_t i = static_cast<size_t>(v) * gt_depth.width() + u;
      const double d = gt_depth(v, u);
      if (!(d > 0.0)) continue;
      regions.valid[i] = 1;
      const Unprojection p = cam.Unproject(Eigen::Vector2d(u, v), d);
      if (!p.ok()) continue;
      const int voxel = rig.grid.VoxelOf(p.point);
      if (voxel < 0) continue;
      regions.in_grid[i] = 1;
      if (!masks.views[view][voxel]) continue;
      for (int other = 0; other < masks.num_views(); ++other) {
        if (other != view && masks.views[other][voxel]) {
          regions.overlap[i] = 1;
          break;
        }
      }
    }
  }
  return regions;
}

double ArgmaxAccuracy(const std::vector<int>& argmax, const FeatureMap& gt_depth,
                      const DepthBins& bins, BinSpacing spacing, PixelMask mask) {
  int total = 0;
  int hits = 0;
  for (size_t i = 0; i < argmax.size(); ++i) {
    if (!mask.empty() && !mask[i]) continue;
    const double d = gt_depth.data()[i];
    if (!(d > 0.0)) continue;
    ++total;
    if (argmax[i] == bins.Nearest(d, spacing)) ++hits;
  }
  if (total == 0) throw Error(ErrorCode::kEmptyMask, "no pixels for argmax accuracy");
  return static_cast<double>(hits) / total;
}

PipelineReport RunPipeline(const RigConfig& rig, const SceneSpec& scene,
                           const PipelineOptions& options) {
  const FusedScene fused = BuildFusedScene(rig, scene);
  PipelineReport report;
  report.masks = fused.masks;
  for (int i = 0; i < static_cast<int>(rig.cameras.size()); ++i) {
    const CameraModel& cam = rig.cameras[i];
    ViewDepth est = EstimateViewDepth(fused, rig, i);
    ViewReport view;
    view.name = cam.name();
    view.gt_depth = fused.renders[i].depth;
    view.regions = ComputeViewRegions(rig, fused.masks, view.gt_depth, i);
    const FeatureMap pooled =
        Stage("ray pool", [&] { return RayPool(fused.fused, cam, fused.bins); });
    const GaussianField field = Stage("gaussian head", [&] {
      return GaussianHeadStub(pooled, est.cost_volume, est.density, est.center_depth, cam,
                              rig.seeds.head + i);
    });
    view.gaussian_centers = static_cast<int>(std::count(field.valid.begin(), field.valid.end(), 1));
    double density_sum = 0.0;
    for (const double rho : est.density.data()) density_sum += rho;
    view.mean_density = density_sum / std::max(1, est.density.num_pixels());

    Stage("metrics", [&] {
      view.metrics_all = MaybeMetrics(est.center_depth, view.gt_depth, view.regions.valid);
      view.metrics_grid = MaybeMetrics(est.center_depth, view.gt_depth, view.regions.in_grid);
      view.metrics_overlap = MaybeMetrics(est.center_depth, view.gt_depth, view.regions.overlap);
      if (Any(view.regions.in_grid)) {
        view.argmax_accuracy = ArgmaxAccuracy(est.argmax, view.gt_depth, fused.bins,
                                              rig.bins.spacing, view.regions.in_grid);
      }
      return 0;
    });
    const auto supervised = And(view.regions.valid, est.cost_volume.valid_mask());
    view.loss_terms = Stage("losses", [&] {
      return ComputeLosses(rig, scene, fused, i, est.center_depth, supervised);
    });
    view.loss = Stage("total loss", [&] { return ComputeTotalLoss(view.loss_terms, rig.loss_weights); });
    if (options.single_view_baselines && rig.cameras.size() > 1 && view.metrics_overlap) {
      const RigConfig alone = rig.Subset({i});
      const FusedScene single = BuildFusedScene(alone, scene);
      const ViewDepth baseline = EstimateViewDepth(single, alone, 0);
      view.single_view_overlap =
          ComputeMetrics(baseline.center_depth, view.gt_depth, view.regions.overlap);
    }
    view.center_depth = std::move(est.center_depth);
    view.density = std::move(est.density);
    view.argmax = std::move(est.argmax);
    report.views.push_back(std::move(view));
  }

  for (const ViewReport& view : report.views) {
    if (rig.abs_rel_max && view.metrics_grid && view.metrics_grid->abs_rel >= *rig.abs_rel_max) {
      report.failures.push_back(view.name + ": in-grid AbsRel " + CsvNumber(view.metrics_grid->abs_rel) +
                                " >= " + CsvNumber(*rig.abs_rel_max));
    }
    if (view.single_view_overlap && view.metrics_overlap &&
        view.metrics_overlap->abs_rel > kHeterogeneousSlack * view.single_view_overlap->abs_rel) {
      report.failures.push_back(view.name + ": fused overlap AbsRel " +
                                CsvNumber(view.metrics_overlap->abs_rel) +
                                " exceeds 1.05x single-view " +
                                CsvNumber(view.single_view_overlap->abs_rel));
    }
  }
  if (!options.out_dir.empty()) {
    Stage("write", [&] {
      WriteArtifacts(options.out_dir, rig, report);
      return 0;
    });
  }
  return report;
}

RigConfig ReferenceRig() {
  RigConfig rig = MakeRig(RigArrangement::kFrontPair);
  // About 0.1 m voxels around the wall: coarser cells blur the texture
  // across the epipolar shift that separates neighbouring bins.
  rig.grid.min = Eigen::Vector3d(4.0, -6.5, -2.0);
  rig.grid.max = Eigen::Vector3d(7.5, 6.5, 5.0);
  rig.grid.resolution = {36, 130, 70};
  rig.abs_rel_max = kReferenceAbsRelMax;
  rig.ego_motion.topRightCorner<3, 1>() = Eigen::Vector3d(-0.3, 0.0, 0.0);
  rig.Validate();
  return rig;
}

double ReferencePlaneDistance() { return BinConfig{}.Make()[kReferencePlaneBin]; }

SceneSpec ReferenceScene(bool with_box) {
  return with_box ? PlaneAndBoxScene(ReferencePlaneDistance(), kReferenceChannels)
                  : PlaneScene(ReferencePlaneDistance(), kReferenceChannels);
}

std::string CsvNumber(double value) {
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, result.ptr);
}

std::string OverlapCsv(const RigConfig& rig, const OverlapMask& masks) {
  std::ostringstream os;
  os << kOverlapCsvHeader << '\n';
  const int n = masks.num_views();
  const double voxels = std::max(1, masks.num_voxels());
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      const int overlap = i == j ? masks.CountVisible(i) : masks.CountOverlap(i, j);
      os << rig.cameras[i].name() << ',' << rig.cameras[j].name() << ',' << masks.CountVisible(i)
         << ',' << masks.CountVisible(j) << ',' << overlap << ','
         << CsvNumber(100.0 * overlap / voxels) << '\n';
    }
  }
  return os.str();
}

}  // namespace hetdepth
