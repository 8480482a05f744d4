#include "hetdepth/image_io.h"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "hetdepth/error.h"
#include "hetdepth/feature_map.h"
#include "hetdepth/rig.h"
#include "hetdepth/scene.h"

namespace hetdepth {
namespace {

namespace fs = std::filesystem;

class IoTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("hetdepth_io_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
};

std::string Slurp(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

FeatureMap Gradient(int h, int w, int c) {
  FeatureMap m(h, w, c, MapRole::kDepth);
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      for (int k = 0; k < c; ++k) m(v, u, k) = 0.5 + 0.25 * u + 10.0 * v + 100.0 * k;
    }
  }
  return m;
}

TEST_F(IoTest, PfmLayoutAndRoundTrip) {
  const FeatureMap m = Gradient(3, 4, 1);
  WritePfm(dir_ / "a.pfm", m);
  const std::string bytes = Slurp(dir_ / "a.pfm");
  const std::string header = "Pf\n4 3\n-1.0\n";
  ASSERT_EQ(bytes.substr(0, header.size()), header);
  ASSERT_EQ(bytes.size(), header.size() + 12 * 4);
  static_assert(std::endian::native == std::endian::little);
  // First stored row is the bottom image row.
  float first;
  std::memcpy(&first, bytes.data() + header.size(), 4);
  EXPECT_EQ(first, static_cast<float>(m(2, 0)));
  const FeatureMap back = ReadPfm(dir_ / "a.pfm");
  ASSERT_TRUE(back.SameShape(m));
  for (size_t k = 0; k < m.data().size(); ++k) {
    EXPECT_EQ(back.data()[k], static_cast<double>(static_cast<float>(m.data()[k])));
  }
}

TEST_F(IoTest, PfmChannelSelection) {
  const FeatureMap m = Gradient(2, 2, 3);
  WritePfm(dir_ / "c.pfm", m, 2);
  EXPECT_EQ(ReadPfm(dir_ / "c.pfm")(1, 1), m(1, 1, 2));
  EXPECT_THROW(WritePfm(dir_ / "d.pfm", m, 3), Error);
}

TEST_F(IoTest, PgmEightAndSixteenBit) {
  FeatureMap m(2, 3, 1);
  const double values[] = {0, 1.4, 1.6, 254.6, 300, -5};
  std::copy(std::begin(values), std::end(values), m.data().begin());
  WritePgm(dir_ / "a.pgm", m);
  const std::string bytes = Slurp(dir_ / "a.pgm");
  const std::string header = "P5\n3 2\n255\n";
  ASSERT_EQ(bytes.substr(0, header.size()), header);
  const std::vector<int> expected{0, 1, 2, 255, 255, 0};
  for (int k = 0; k < 6; ++k) {
    EXPECT_EQ(static_cast<unsigned char>(bytes[header.size() + k]), expected[k]);
  }
  const FeatureMap back = ReadPgm(dir_ / "a.pgm");
  for (int k = 0; k < 6; ++k) EXPECT_EQ(back.data()[k], expected[k]);

  FeatureMap wide(1, 2, 1);
  wide.data() = {513, 0.25};
  WritePgm(dir_ / "b.pgm", wide, 65535, 4.0);
  const std::string wbytes = Slurp(dir_ / "b.pgm");
  const std::string wheader = "P5\n2 1\n65535\n";
  ASSERT_EQ(wbytes.substr(0, wheader.size()), wheader);
  // 2052 big-endian, then 1.
  EXPECT_EQ(static_cast<unsigned char>(wbytes[wheader.size()]), 0x08);
  EXPECT_EQ(static_cast<unsigned char>(wbytes[wheader.size() + 1]), 0x04);
  EXPECT_EQ(ReadPgm(dir_ / "b.pgm").data()[1], 1.0);
}

TEST_F(IoTest, FeatureBlobIsExact) {
  FeatureMap m = Gradient(5, 3, 4);
  m(1, 1, 1) = 1.0 / 3.0;
  WriteFeatureBlob(dir_ / "f.blob", m);
  const std::string bytes = Slurp(dir_ / "f.blob");
  EXPECT_EQ(bytes.substr(0, 19), "HDFEAT 5 3 4 f64le\n");
  const FeatureMap back = ReadFeatureBlob(dir_ / "f.blob");
  ASSERT_TRUE(back.SameShape(m));
  EXPECT_EQ(back.data(), m.data());
}

TEST_F(IoTest, MalformedFilesRaiseIoErrors) {
  std::ofstream(dir_ / "junk.pfm") << "P6\n1 1\n255\nx";
  std::ofstream(dir_ / "short.blob") << "HDFEAT 2 2 2 f64le\nabc";
  for (const auto& fn : std::vector<std::function<void()>>{
           [&] { ReadPfm(dir_ / "junk.pfm"); }, [&] { ReadPgm(dir_ / "junk.pfm"); },
           [&] { ReadFeatureBlob(dir_ / "short.blob"); },
           [&] { ReadPfm(dir_ / "missing.pfm"); }}) {
    try {
      fn();
      ADD_FAILURE() << "no error";
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kIo);
    }
  }
}

TEST_F(IoTest, RigJsonRoundTrip) {
  for (const auto arrangement :
       {RigArrangement::kFrontPair, RigArrangement::kTwoPinholeSideFisheye,
        RigArrangement::kFrontPinholeSideMei}) {
    RigConfig rig = MakeRig(arrangement);
    rig.abs_rel_max = 0.05;
    rig.wrap_around = true;
    rig.transforms = TransformMode::kSeeded;
    rig.ego_motion(0, 3) = -0.3;
    SaveRig(dir_ / "rig.json", rig);
    const RigConfig back = LoadRig(dir_ / "rig.json");
    ASSERT_EQ(back.cameras.size(), rig.cameras.size());
    for (size_t i = 0; i < rig.cameras.size(); ++i) {
      const CameraModel& a = rig.cameras[i];
      const CameraModel& b = back.cameras[i];
      EXPECT_EQ(a.name(), b.name());
      EXPECT_EQ(a.kind(), b.kind());
      EXPECT_LT((a.extrinsics().matrix() - b.extrinsics().matrix()).norm(), 1e-15);
      EXPECT_EQ(a.intrinsics().fx, b.intrinsics().fx);
      EXPECT_NEAR(a.fov_max(), b.fov_max(), 1e-12);
      const Eigen::Vector3d p(6, 0.3, 1.2);
      EXPECT_EQ(a.Project(p).status, b.Project(p).status);
      EXPECT_LT((a.Project(p).uv - b.Project(p).uv).norm(), 1e-9);
    }
    EXPECT_TRUE(back.grid == rig.grid);
    EXPECT_EQ(back.bins.count, rig.bins.count);
    EXPECT_EQ(back.abs_rel_max, rig.abs_rel_max);
    EXPECT_TRUE(back.wrap_around);
    EXPECT_EQ(back.transforms, TransformMode::kSeeded);
    EXPECT_EQ(back.ego_motion, rig.ego_motion);
  }
}

TEST(RigJson, ErrorsNameTheCamera) {
  nlohmann::json doc = RigToJson(MakeRig(RigArrangement::kFrontPair));
  doc["cameras"][1]["distortion"]["omega"] = {-0.5, 0, 0, 0};
  doc["cameras"][1]["fov_max_deg"] = 86;
  try {
    RigFromJson(doc);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNonMonotoneDistortion);
    EXPECT_NE(std::string(e.what()).find("front_fisheye"), std::string::npos);
  }
  doc = RigToJson(MakeRig(RigArrangement::kFrontPair));
  doc["cameras"][0]["kind"] = "orthographic";
  EXPECT_THROW(RigFromJson(doc), Error);
  doc = RigToJson(MakeRig(RigArrangement::kFrontPair));
  doc["cameras"][1]["name"] = doc["cameras"][0]["name"];
  EXPECT_THROW(RigFromJson(doc), Error);
  doc = RigToJson(MakeRig(RigArrangement::kFrontPair));
  doc["cameras"][0]["extrinsics"][0] = 2.0;
  EXPECT_THROW(RigFromJson(doc), Error);
  doc = RigToJson(MakeRig(RigArrangement::kFrontPair));
  doc["cameras"][0]["intrinsics"].erase("fx");
  EXPECT_THROW(RigFromJson(doc), Error);
}

TEST_F(IoTest, SceneJsonRoundTrip) {
  SceneSpec scene = PlaneAndBoxScene(6.0, 4);
  Primitive ball;
  ball.name = "ball";
  ball.kind = PrimitiveKind::kSphere;
  ball.center = {4, 1, 1};
  ball.radius = 0.5;
  scene.primitives.push_back(ball);
  SaveScene(dir_ / "scene.json", scene);
  const SceneSpec back = LoadScene(dir_ / "scene.json");
  ASSERT_EQ(back.primitives.size(), scene.primitives.size());
  EXPECT_EQ(back.channels, 4);
  const Eigen::Vector3d origin(0, 0, 1.5);
  for (const Eigen::Vector3d& dir : {Eigen::Vector3d(1, 0, 0), Eigen::Vector3d(1, 0.2, -0.1),
                                    Eigen::Vector3d(1, 0.25, -0.125)}) {
    const auto a = IntersectScene(scene, origin, dir);
    const auto b = IntersectScene(back, origin, dir);
    ASSERT_EQ(a.has_value(), b.has_value());
    if (a) {
      EXPECT_EQ(a->primitive, b->primitive);
      EXPECT_NEAR(a->t, b->t, 1e-12);
    }
  }
  nlohmann::json doc = SceneToJson(scene);
  doc["primitives"][0]["type"] = "torus";
  EXPECT_THROW(SceneFromJson(doc), Error);
}

}  // namespace
}  // namespace hetdepth
