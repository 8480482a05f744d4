#include "hetdepth/pipeline.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "hetdepth/error.h"
#include "hetdepth/self_check.h"

namespace hetdepth {
namespace {

namespace fs = std::filesystem;

std::string Slurp(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::string FirstLine(const fs::path& path) {
  std::ifstream is(path);
  std::string line;
  std::getline(is, line);
  return line;
}

// One pinhole sees every voxel on a pixel's ray with that pixel's own
// feature, so its cost is flat along the ray and the wall depth cannot be
// singled out; a second, displaced view breaks the tie.
TEST(Pipeline, SingleViewIsDegenerateTwoViewsAreNot) {
  const RigConfig rig = ReferenceRig();
  const SceneSpec scene = ReferenceScene(false);
  const PipelineReport both = RunPipeline(rig, scene);
  const PipelineReport alone = RunPipeline(rig.Subset({0}), scene);
  ASSERT_TRUE(both.views[0].metrics_grid.has_value());
  ASSERT_TRUE(alone.views[0].metrics_grid.has_value());
  EXPECT_LT(both.views[0].metrics_grid->abs_rel, kReferenceAbsRelMax);
  EXPECT_GT(alone.views[0].metrics_grid->abs_rel, kReferenceAbsRelMax);
  EXPECT_GT(*both.views[0].argmax_accuracy, 0.99);
  EXPECT_LT(*alone.views[0].argmax_accuracy, 0.5);
  EXPECT_TRUE(both.passed());
  EXPECT_FALSE(alone.passed());
}

TEST(Pipeline, OutputsAreDeterministic) {
  RigConfig rig = ReferenceRig();
  rig.grid.resolution = {12, 40, 20};  // coarse is enough here
  rig.abs_rel_max.reset();
  rig.transforms = TransformMode::kSeeded;
  const SceneSpec scene = ReferenceScene(true);
  const fs::path root = fs::temp_directory_path() / "hetdepth_pipeline_determinism";
  fs::remove_all(root);
  RunPipeline(rig, scene, {.out_dir = root / "a"});
  RunPipeline(rig, scene, {.out_dir = root / "b"});
  int files = 0;
  for (const auto& entry : fs::directory_iterator(root / "a")) {
    const fs::path other = root / "b" / entry.path().filename();
    ASSERT_TRUE(fs::exists(other)) << other;
    EXPECT_EQ(Slurp(entry.path()), Slurp(other)) << entry.path().filename();
    ++files;
  }
  EXPECT_EQ(files, 4 * 2 + 4);
  EXPECT_EQ(FirstLine(root / "a" / "overlap.csv"), kOverlapCsvHeader);
  EXPECT_EQ(FirstLine(root / "a" / "metrics.csv"), kMetricsCsvHeader);
  EXPECT_EQ(FirstLine(root / "a" / "losses.csv"), kLossesCsvHeader);
  EXPECT_EQ(FirstLine(root / "a" / "gaussians.csv"), kGaussiansCsvHeader);
  fs::remove_all(root);
}

TEST(Pipeline, ErrorsNameTheStage) {
  RigConfig rig = ReferenceRig();
  rig.bins.d_min = 50;  // above d_max; caught while validating the rig
  try {
    RunPipeline(rig, ReferenceScene(false));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kBadRange);
    EXPECT_EQ(std::string(e.what()).rfind("BadRange: stage 'config': depth bins", 0), 0u)
        << e.what();
  }
  SceneSpec scene = ReferenceScene(false);
  scene.primitives[0].texture.scale = 0;
  try {
    RunPipeline(ReferenceRig(), scene);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidConfig);
    EXPECT_NE(std::string(e.what()).find("stage 'config'"), std::string::npos) << e.what();
  }
}

TEST(Pipeline, ArgmaxAccuracyNeedsPixels) {
  const FeatureMap gt(2, 2, 1, MapRole::kDepth, 3.0);
  const DepthBins bins({1, 3, 5});
  const std::vector<int> argmax{1, 1, 0, 2};
  EXPECT_DOUBLE_EQ(ArgmaxAccuracy(argmax, gt, bins, BinSpacing::kUniform, {}), 0.5);
  const std::vector<std::uint8_t> none(4, 0);
  EXPECT_THROW(ArgmaxAccuracy(argmax, gt, bins, BinSpacing::kUniform, none), Error);
}

TEST(SelfCheck, PassesAndCatchesCorruptTable) {
  SelfCheckOptions options;
  options.samples = 2000;
  EXPECT_TRUE(RunSelfCheck(options).passed());
  options.corrupt_lut = true;
  const SelfCheckReport report = RunSelfCheck(options);
  EXPECT_FALSE(report.passed());
  for (const auto& check : report.checks) {
    if (check.name == "kb_roundtrip") {
      EXPECT_FALSE(check.passed);
    }
  }
}

TEST(CsvNumber, ShortestRoundTrip) {
  EXPECT_EQ(CsvNumber(0.5), "0.5");
  EXPECT_EQ(std::stod(CsvNumber(1.0 / 3.0)), 1.0 / 3.0);
}

}  // namespace
}  // namespace hetdepth
