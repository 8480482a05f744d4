#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hetdepth/cost_volume.h"
#include "hetdepth/feature_map.h"
#include "hetdepth/hsf.h"
#include "hetdepth/losses.h"
#include "hetdepth/metrics.h"
#include "hetdepth/rig.h"
#include "hetdepth/scene.h"
#include "hetdepth/voxel_grid.h"

namespace hetdepth {

// Per-pixel image descriptor fed to lifting and the cost volume: the color
// vector minus its channel mean, rescaled to norm `gain`. Flat pixels (no
// texture contrast) get the zero vector.
FeatureMap DescriptorFeatures(const FeatureMap& color, double gain);

// Everything up to the fused volume, shared by all views.
struct FusedScene {
  std::vector<RenderedView> renders;   // rig order
  std::vector<FeatureMap> features;    // rig order
  OverlapMask masks;
  VoxelGrid fused;
  DepthBins bins;
};

FusedScene BuildFusedScene(const RigConfig& rig, const SceneSpec& scene);

struct ViewDepth {
  CostVolume cost_volume;
  FeatureMap center_depth;  // 0 where the pixel cannot be back-projected
  FeatureMap density;
  std::vector<int> argmax;
};

ViewDepth EstimateViewDepth(const FusedScene& fused, const RigConfig& rig, int view);

// Pixel masks of one view (row-major, 1 = selected).
struct ViewRegions {
  std::vector<std::uint8_t> valid;    // analytic depth available
  std::vector<std::uint8_t> in_grid;  // ... and the surface point lies in the grid
  std::vector<std::uint8_t> overlap;  // ... and its voxel is seen by another view too
};

ViewRegions ComputeViewRegions(const RigConfig& rig, const OverlapMask& masks,
                               const FeatureMap& gt_depth, int view);

// Fraction of selected pixels whose argmax bin is the bin nearest to the
// analytic depth. Throws Error(kEmptyMask).
double ArgmaxAccuracy(const std::vector<int>& argmax, const FeatureMap& gt_depth,
                      const DepthBins& bins, BinSpacing spacing, PixelMask mask);

struct ViewReport {
  std::string name;
  FeatureMap gt_depth;
  FeatureMap center_depth;
  FeatureMap density;
  std::vector<int> argmax;
  ViewRegions regions;
  std::optional<DepthMetrics> metrics_all;
  std::optional<DepthMetrics> metrics_grid;
  std::optional<DepthMetrics> metrics_overlap;
  std::optional<double> argmax_accuracy;  // over in-grid pixels
  // Same view run alone (rig reduced to this camera), on the fused run's
  // overlap pixels. Filled only when baselines are requested.
  std::optional<DepthMetrics> single_view_overlap;
  LossTerms loss_terms;
  TotalLoss loss;
  int gaussian_centers = 0;
  double mean_density = 0.0;
};

struct PipelineOptions {
  std::filesystem::path out_dir;  // empty: nothing is written
  bool single_view_baselines = false;
};

struct PipelineReport {
  std::vector<ViewReport> views;
  OverlapMask masks;
  std::vector<std::string> failures;  // violated thresholds

  bool passed() const { return failures.empty(); }
};

// lift -> masks -> fuse -> cost volume -> center depth / density -> ray pool
// -> Gaussian head -> losses and metrics against the analytic depth. Module
// errors are re-thrown with the failing stage in the message. Thresholds:
// rig.abs_rel_max bounds every view's in-grid AbsRel; with baselines, every
// view's overlap AbsRel must stay within 1.05x of its single-view run.
PipelineReport RunPipeline(const RigConfig& rig, const SceneSpec& scene,
                           const PipelineOptions& options = {});

inline constexpr double kHeterogeneousSlack = 1.05;

// Output files written by RunPipeline, relative to the output directory.
// Per view: <name>_depth.pfm, <name>_gt.pfm, <name>_density.pgm,
// <name>_argmax.pgm (16 bit). Shared: overlap.csv, metrics.csv, losses.csv,
// gaussians.csv.
inline constexpr const char* kOverlapCsvHeader =
    "view_i,view_j,visible_i,visible_j,overlap,overlap_pct";
inline constexpr const char* kMetricsCsvHeader =
    "view,region,count,abs_rel,rmse,delta1,argmax_acc";
inline constexpr const char* kLossesCsvHeader =
    "view,l1,silog,ranking,smoothness,temporal,spatial,total";
inline constexpr const char* kGaussiansCsvHeader = "view,valid_centers,mean_density";

// Reference setup used by the CLI defaults and the acceptance suite: the
// front pinhole + fisheye pair with a fine grid around a textured wall that
// sits exactly on bin kReferencePlaneBin of the default bins, 24 channels.
inline constexpr int kReferencePlaneBin = 58;
inline constexpr int kReferenceChannels = 24;
inline constexpr double kReferenceAbsRelMax = 0.02;

RigConfig ReferenceRig();
double ReferencePlaneDistance();
SceneSpec ReferenceScene(bool with_box);

// Formats a double for CSV output with round-trip precision.
std::string CsvNumber(double value);

// Overlap summary as CSV rows (header included).
std::string OverlapCsv(const RigConfig& rig, const OverlapMask& masks);

}  // namespace hetdepth
