#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "hetdepth/camera.h"
#include "hetdepth/hsf.h"
#include "hetdepth/voxel_grid.h"

namespace hetdepth {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct SelfCheckOptions {
  std::uint64_t seed = 2024;
  int samples = 20000;  // per round-trip check
  // Also load and validate this rig file (a failure is reported, not thrown).
  std::optional<std::filesystem::path> rig_path;
  // Replace the KB test camera's inverse table with a damaged one; the KB
  // round-trip check must then fail.
  bool corrupt_lut = false;
};

struct SelfCheckReport {
  std::vector<CheckResult> checks;

  bool passed() const;
  // One "PASS <name>: <detail>" / "FAIL ..." line per check.
  void Print(std::ostream& os) const;
};

SelfCheckReport RunSelfCheck(const SelfCheckOptions& options = {});

// Round-trip statistics of one camera over random in-image pixels and depths
// in [0.5, 50] m: pixel error of project(unproject(uv, d)), and 3D error of
// unproject(project(p)) for points p on the same rays at ranges in
// [0.5, 50] m. For fisheye cameras also the largest error of the raw
// inverse-table seed against the forward model.
struct RoundTripStats {
  int samples = 0;
  int failures = 0;  // back-projection or re-projection refused
  double max_pixel_error = 0.0;
  double max_point_error = 0.0;
  double max_seed_error = 0.0;
};

RoundTripStats MeasureRoundTrip(const CameraModel& cam, int samples, std::uint64_t seed);

inline constexpr double kRoundTripPixelTol = 1e-6;
inline constexpr double kRoundTripPointTol = 1e-6;
inline constexpr double kLutSeedTol = 1e-6;

// Visibility recomputed per voxel center from the raw 4x4 extrinsics and the
// closed-form projection of each model, without CameraModel::Project.
std::vector<std::uint8_t> BruteForceVisibility(const CameraModel& cam, const GridSpec& spec);

// A LUT with a smooth relative distortion applied to its inputs, for fault
// injection.
InverseLut CorruptLut(const InverseLut& lut, double amount = 0.02);

// The KB test camera used by the self-check.
CameraModel SelfCheckKbCamera();
CameraModel SelfCheckMeiCamera();
CameraModel SelfCheckPinholeCamera();

}  // namespace hetdepth
