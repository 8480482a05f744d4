#include "hetdepth/rig.h"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>

#include "hetdepth/error.h"

namespace hetdepth {
namespace {

using nlohmann::json;

constexpr double kDegToRad = std::numbers::pi / 180.0;

[[noreturn]] void Fail(const std::string& message) {
  throw Error(ErrorCode::kInvalidConfig, message);
}

template <typename T>
T Required(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) Fail(where + ": missing '" + key + "'");
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    Fail(where + ": bad '" + key + "': " + e.what());
  }
}

template <typename T>
T Optional(const json& obj, const char* key, T fallback) {
  if (!obj.is_object() || !obj.contains(key)) return fallback;
  return obj.at(key).get<T>();
}

Eigen::Vector3d Vec3(const json& value, const std::string& where) {
  if (!value.is_array() || value.size() != 3) Fail(where + ": expected 3 numbers");
  return {value[0].get<double>(), value[1].get<double>(), value[2].get<double>()};
}

json Vec3Json(const Eigen::Vector3d& v) { return json::array({v.x(), v.y(), v.z()}); }

Eigen::Matrix4d Matrix16(const json& value, const std::string& where) {
  if (!value.is_array() || value.size() != 16) Fail(where + ": expected 16 row-major numbers");
  Eigen::Matrix4d m;
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) m(r, c) = value[r * 4 + c].get<double>();
  }
  return m;
}

json Matrix16Json(const Eigen::Matrix4d& m) {
  json out = json::array();
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) out.push_back(m(r, c));
  }
  return out;
}

CameraModel CameraFromJson(const json& entry, int index) {
  std::string where = "camera #" + std::to_string(index);
  const auto name = Required<std::string>(entry, "name", where);
  where = "camera '" + name + "'";
  try {
    const auto kind_name = Required<std::string>(entry, "kind", where);
    const auto kind = CameraKindFromName(kind_name);
    if (!kind) Fail(where + ": unknown kind '" + kind_name + "'");
    const json& in = entry.contains("intrinsics") ? entry["intrinsics"] : json();
    Intrinsics intrinsics;
    intrinsics.fx = Required<double>(in, "fx", where + " intrinsics");
    intrinsics.fy = Required<double>(in, "fy", where + " intrinsics");
    intrinsics.cx = Required<double>(in, "cx", where + " intrinsics");
    intrinsics.cy = Required<double>(in, "cy", where + " intrinsics");
    intrinsics.width = Required<int>(in, "width", where + " intrinsics");
    intrinsics.height = Required<int>(in, "height", where + " intrinsics");
    if (!entry.contains("extrinsics")) Fail(where + ": missing 'extrinsics'");
    const Extrinsics extrinsics(Matrix16(entry["extrinsics"], where + " extrinsics"));
    const json& dist = entry.contains("distortion") ? entry["distortion"] : json::object();
    switch (*kind) {
      case CameraKind::kPinhole:
        return CameraModel::Pinhole(name, intrinsics, extrinsics);
      case CameraKind::kKbFisheye: {
        KbDistortion kb;
        const auto omega = Optional<std::vector<double>>(dist, "omega", {0, 0, 0, 0});
        if (omega.size() != 4) Fail(where + ": KB distortion needs 4 coefficients");
        std::copy(omega.begin(), omega.end(), kb.omega.begin());
        const double fov = Required<double>(entry, "fov_max_deg", where) * kDegToRad;
        return CameraModel::KbFisheye(name, intrinsics, extrinsics, kb, fov,
                                      Optional<int>(entry, "lut_resolution", kDefaultLutResolution));
      }
      case CameraKind::kMeiFisheye: {
        MeiDistortion mei;
        mei.omega1 = Optional<double>(dist, "omega1", 0.0);
        mei.omega2 = Optional<double>(dist, "omega2", 0.0);
        mei.epsilon = Optional<double>(dist, "epsilon", 0.0);
        const double fov = Required<double>(entry, "fov_max_deg", where) * kDegToRad;
        return CameraModel::MeiFisheye(name, intrinsics, extrinsics, mei, fov,
                                       Optional<int>(entry, "lut_resolution", kDefaultLutResolution));
      }
    }
  } catch (const Error& e) {
    const std::string& message = e.message();
    if (message.find(where) != std::string::npos) throw;
    throw Error(e.code(), where + ": " + message);
  } catch (const json::exception& e) {
    Fail(where + ": " + e.what());
  }
  Fail(where + ": unreachable camera kind");
}

json CameraToJson(const CameraModel& cam) {
  const Intrinsics& k = cam.intrinsics();
  json entry = {{"name", cam.name()},
                {"kind", std::string(CameraKindName(cam.kind()))},
                {"intrinsics",
                 {{"fx", k.fx}, {"fy", k.fy}, {"cx", k.cx}, {"cy", k.cy}, {"width", k.width},
                  {"height", k.height}}},
                {"extrinsics", Matrix16Json(cam.extrinsics().matrix())}};
  if (cam.kind() == CameraKind::kKbFisheye) {
    entry["distortion"] = {{"omega", std::vector<double>(cam.kb().omega.begin(), cam.kb().omega.end())}};
  } else if (cam.kind() == CameraKind::kMeiFisheye) {
    entry["distortion"] = {{"omega1", cam.mei().omega1},
                           {"omega2", cam.mei().omega2},
                           {"epsilon", cam.mei().epsilon}};
  }
  if (cam.is_fisheye()) {
    entry["fov_max_deg"] = cam.fov_max() / kDegToRad;
    entry["lut_resolution"] = cam.lut()->resolution();
  }
  return entry;
}

json ReadJsonFile(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  try {
    return json::parse(is);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, path.string() + ": " + e.what());
  }
}

void WriteJsonFile(const std::filesystem::path& path, const json& doc) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  os << doc.dump(2) << '\n';
}

Texture TextureFromJson(const json& obj) {
  Texture t;
  t.seed = Optional<std::uint64_t>(obj, "seed", t.seed);
  t.scale = Optional<double>(obj, "scale", t.scale);
  t.octaves = Optional<int>(obj, "octaves", t.octaves);
  return t;
}

}  // namespace

void RigConfig::Validate() const {
  if (cameras.empty()) Fail("rig has no cameras");
  std::set<std::string> names;
  for (const auto& cam : cameras) {
    if (cam.name().empty()) Fail("rig camera without a name");
    if (!names.insert(cam.name()).second) Fail("duplicate camera name '" + cam.name() + "'");
  }
  grid.Validate();
  bins.Make();
  if (!(feature_gain > 0.0)) Fail("feature gain must be positive");
  if (ranking_pairs < 0) Fail("ranking pair count must be non-negative");
  Extrinsics{ego_motion};
}

int RigConfig::IndexOf(const std::string& name) const {
  for (int i = 0; i < static_cast<int>(cameras.size()); ++i) {
    if (cameras[i].name() == name) return i;
  }
  return -1;
}

RigConfig RigConfig::Subset(const std::vector<int>& camera_indices) const {
  RigConfig out = *this;
  out.cameras.clear();
  for (const int i : camera_indices) {
    if (i < 0 || i >= static_cast<int>(cameras.size())) {
      throw Error(ErrorCode::kIndexOutOfRange, "camera index " + std::to_string(i));
    }
    out.cameras.push_back(cameras[i]);
  }
  return out;
}

RigConfig RigFromJson(const json& doc) {
  if (!doc.is_object() || !doc.contains("cameras") || !doc["cameras"].is_array()) {
    Fail("rig file needs a 'cameras' array");
  }
  RigConfig rig;
  int index = 0;
  for (const auto& entry : doc["cameras"]) rig.cameras.push_back(CameraFromJson(entry, index++));
  try {
    if (doc.contains("grid")) {
      const json& g = doc["grid"];
      rig.grid.min = Vec3(g.at("min"), "grid.min");
      rig.grid.max = Vec3(g.at("max"), "grid.max");
      const auto res = g.at("resolution").get<std::vector<int>>();
      if (res.size() != 3) Fail("grid.resolution: expected 3 integers");
      rig.grid.resolution = {res[0], res[1], res[2]};
    }
    if (doc.contains("bins")) {
      const json& b = doc["bins"];
      rig.bins.count = Optional<int>(b, "count", rig.bins.count);
      rig.bins.d_min = Optional<double>(b, "d_min", rig.bins.d_min);
      rig.bins.d_max = Optional<double>(b, "d_max", rig.bins.d_max);
      const auto spacing = BinSpacingFromName(Optional<std::string>(b, "spacing", "inverse"));
      if (!spacing) Fail("bins.spacing must be 'uniform' or 'inverse'");
      rig.bins.spacing = *spacing;
    }
    if (doc.contains("loss_weights")) {
      const json& w = doc["loss_weights"];
      LossWeights& lw = rig.loss_weights;
      lw.l1 = Optional<double>(w, "l1", lw.l1);
      lw.silog = Optional<double>(w, "silog", lw.silog);
      lw.ranking = Optional<double>(w, "ranking", lw.ranking);
      lw.smoothness = Optional<double>(w, "smoothness", lw.smoothness);
      lw.temporal = Optional<double>(w, "temporal", lw.temporal);
      lw.spatial = Optional<double>(w, "spatial", lw.spatial);
      lw.beta = Optional<double>(w, "beta", lw.beta);
    }
    if (doc.contains("seeds")) {
      const json& s = doc["seeds"];
      rig.seeds.transforms = Optional<std::uint64_t>(s, "transforms", rig.seeds.transforms);
      rig.seeds.ranking = Optional<std::uint64_t>(s, "ranking", rig.seeds.ranking);
      rig.seeds.head = Optional<std::uint64_t>(s, "head", rig.seeds.head);
    }
    if (doc.contains("fusion")) {
      const json& f = doc["fusion"];
      const auto mode = Optional<std::string>(f, "transforms", "identity");
      if (mode == "identity") {
        rig.transforms = TransformMode::kIdentity;
      } else if (mode == "seeded") {
        rig.transforms = TransformMode::kSeeded;
      } else {
        Fail("fusion.transforms must be 'identity' or 'seeded'");
      }
      rig.wrap_around = Optional<bool>(f, "wrap_around", false);
    }
    if (doc.contains("features")) {
      rig.feature_gain = Optional<double>(doc["features"], "gain", rig.feature_gain);
    }
    if (doc.contains("ranking")) {
      rig.ranking_pairs = Optional<int>(doc["ranking"], "pairs", rig.ranking_pairs);
      rig.ranking_epsilon = Optional<double>(doc["ranking"], "epsilon", rig.ranking_epsilon);
    }
    if (doc.contains("ego_motion")) rig.ego_motion = Matrix16(doc["ego_motion"], "ego_motion");
    if (doc.contains("thresholds") && doc["thresholds"].contains("abs_rel_max")) {
      rig.abs_rel_max = doc["thresholds"]["abs_rel_max"].get<double>();
    }
  } catch (const json::exception& e) {
    Fail(std::string("rig file: ") + e.what());
  }
  rig.Validate();
  return rig;
}

json RigToJson(const RigConfig& rig) {
  json doc;
  doc["cameras"] = json::array();
  for (const auto& cam : rig.cameras) doc["cameras"].push_back(CameraToJson(cam));
  doc["grid"] = {{"min", Vec3Json(rig.grid.min)},
                 {"max", Vec3Json(rig.grid.max)},
                 {"resolution", rig.grid.resolution}};
  doc["bins"] = {{"count", rig.bins.count},
                 {"d_min", rig.bins.d_min},
                 {"d_max", rig.bins.d_max},
                 {"spacing", std::string(BinSpacingName(rig.bins.spacing))}};
  const LossWeights& lw = rig.loss_weights;
  doc["loss_weights"] = {{"l1", lw.l1},           {"silog", lw.silog},
                         {"ranking", lw.ranking}, {"smoothness", lw.smoothness},
                         {"temporal", lw.temporal}, {"spatial", lw.spatial},
                         {"beta", lw.beta}};
  doc["seeds"] = {{"transforms", rig.seeds.transforms},
                  {"ranking", rig.seeds.ranking},
                  {"head", rig.seeds.head}};
  doc["fusion"] = {{"transforms", rig.transforms == TransformMode::kSeeded ? "seeded" : "identity"},
                   {"wrap_around", rig.wrap_around}};
  doc["features"] = {{"gain", rig.feature_gain}};
  doc["ranking"] = {{"pairs", rig.ranking_pairs}, {"epsilon", rig.ranking_epsilon}};
  doc["ego_motion"] = Matrix16Json(rig.ego_motion);
  if (rig.abs_rel_max) doc["thresholds"] = {{"abs_rel_max", *rig.abs_rel_max}};
  return doc;
}

RigConfig LoadRig(const std::filesystem::path& path) { return RigFromJson(ReadJsonFile(path)); }

void SaveRig(const std::filesystem::path& path, const RigConfig& rig) {
  WriteJsonFile(path, RigToJson(rig));
}

SceneSpec SceneFromJson(const json& doc) {
  SceneSpec scene;
  try {
    scene.name = Optional<std::string>(doc, "name", scene.name);
    scene.channels = Optional<int>(doc, "channels", scene.channels);
    scene.background = Optional<double>(doc, "background", scene.background);
    if (doc.contains("primitives")) {
      int index = 0;
      for (const auto& entry : doc["primitives"]) {
        Primitive p;
        p.name = Optional<std::string>(entry, "name", "primitive" + std::to_string(index++));
        const std::string where = "primitive '" + p.name + "'";
        const auto type = Required<std::string>(entry, "type", where);
        if (entry.contains("texture")) p.texture = TextureFromJson(entry["texture"]);
        if (type == "plane") {
          p.kind = PrimitiveKind::kPlane;
          p.center = Vec3(entry.at("center"), where + " center");
          p.normal = Vec3(entry.at("normal"), where + " normal").normalized();
          p.u_axis = Vec3(entry.at("u_axis"), where + " u_axis").normalized();
          const auto half = entry.at("half_extent").get<std::vector<double>>();
          if (half.size() != 2) Fail(where + ": half_extent needs 2 numbers");
          p.half_extent = {half[0], half[1]};
        } else if (type == "box") {
          p.kind = PrimitiveKind::kBox;
          p.box_min = Vec3(entry.at("min"), where + " min");
          p.box_max = Vec3(entry.at("max"), where + " max");
          p.interior = Optional<bool>(entry, "interior", false);
        } else if (type == "sphere") {
          p.kind = PrimitiveKind::kSphere;
          p.center = Vec3(entry.at("center"), where + " center");
          p.radius = Required<double>(entry, "radius", where);
        } else {
          Fail(where + ": unknown type '" + type + "'");
        }
        scene.primitives.push_back(p);
      }
    }
  } catch (const json::exception& e) {
    Fail(std::string("scene file: ") + e.what());
  }
  scene.Validate();
  return scene;
}

json SceneToJson(const SceneSpec& scene) {
  json doc = {{"name", scene.name},
              {"channels", scene.channels},
              {"background", scene.background},
              {"primitives", json::array()}};
  for (const auto& p : scene.primitives) {
    json entry = {{"name", p.name},
                  {"texture",
                   {{"seed", p.texture.seed}, {"scale", p.texture.scale},
                    {"octaves", p.texture.octaves}}}};
    switch (p.kind) {
      case PrimitiveKind::kPlane:
        entry["type"] = "plane";
        entry["center"] = Vec3Json(p.center);
        entry["normal"] = Vec3Json(p.normal);
        entry["u_axis"] = Vec3Json(p.u_axis);
        entry["half_extent"] = {p.half_extent.x(), p.half_extent.y()};
        break;
      case PrimitiveKind::kBox:
        entry["type"] = "box";
        entry["min"] = Vec3Json(p.box_min);
        entry["max"] = Vec3Json(p.box_max);
        entry["interior"] = p.interior;
        break;
      case PrimitiveKind::kSphere:
        entry["type"] = "sphere";
        entry["center"] = Vec3Json(p.center);
        entry["radius"] = p.radius;
        break;
    }
    doc["primitives"].push_back(entry);
  }
  return doc;
}

SceneSpec LoadScene(const std::filesystem::path& path) { return SceneFromJson(ReadJsonFile(path)); }

void SaveScene(const std::filesystem::path& path, const SceneSpec& scene) {
  WriteJsonFile(path, SceneToJson(scene));
}

Eigen::Matrix3d FrontLooking() {
  // Columns: camera x (right) = ego -y, camera y (down) = ego -z, camera z = ego +x.
  Eigen::Matrix3d r;
  r << 0, 0, 1,  //
      -1, 0, 0,  //
      0, -1, 0;
  return r;
}

Eigen::Matrix3d RightLooking() {
  // Camera x (right) = ego -x, camera y (down) = ego -z, camera z = ego -y.
  Eigen::Matrix3d r;
  r << -1, 0, 0,  //
      0, 0, -1,   //
      0, -1, 0;
  return r;
}

namespace {

Intrinsics RigIntrinsics(double focal) {
  return {focal, focal, (kRigWidth - 1) / 2.0, (kRigHeight - 1) / 2.0, kRigWidth, kRigHeight};
}

}  // namespace

CameraModel FrontPinhole(std::string name, const Eigen::Vector3d& position) {
  return CameraModel::Pinhole(std::move(name), RigIntrinsics(320.0),
                              Extrinsics::FromPose(FrontLooking(), position));
}

CameraModel FrontKbFisheye(std::string name, const Eigen::Vector3d& position) {
  return CameraModel::KbFisheye(std::move(name), RigIntrinsics(204.0),
                                Extrinsics::FromPose(FrontLooking(), position),
                                KbDistortion{{-0.01, 0.002, 0.0, 0.0}}, 92.5 * kDegToRad);
}

CameraModel RightKbFisheye(std::string name, const Eigen::Vector3d& position) {
  return CameraModel::KbFisheye(std::move(name), RigIntrinsics(204.0),
                                Extrinsics::FromPose(RightLooking(), position),
                                KbDistortion{{-0.01, 0.002, 0.0, 0.0}}, 80.0 * kDegToRad);
}

CameraModel RightMeiFisheye(std::string name, const Eigen::Vector3d& position) {
  return CameraModel::MeiFisheye(std::move(name), RigIntrinsics(611.0),
                                 Extrinsics::FromPose(RightLooking(), position),
                                 MeiDistortion{0.0166, 0.0012, 2.2}, 92.5 * kDegToRad);
}

RigConfig MakeRig(RigArrangement arrangement) {
  RigConfig rig;
  switch (arrangement) {
    case RigArrangement::kFrontPair:
      rig.cameras = {FrontPinhole("front_pinhole", {0.0, 0.0, 1.5}),
                     FrontKbFisheye("front_fisheye", {0.0, -2.0, 1.5})};
      break;
    case RigArrangement::kTwoPinholeSideFisheye:
      rig.cameras = {FrontPinhole("front_left", {0.0, 0.5, 1.5}),
                     FrontPinhole("front_right", {0.0, -0.5, 1.5}),
                     RightKbFisheye("right_fisheye", {-0.5, -0.9, 1.2})};
      break;
    case RigArrangement::kFrontPinholeSideMei:
      rig.cameras = {FrontPinhole("front_pinhole", {0.0, 0.0, 1.5}),
                     RightMeiFisheye("right_mei", {-0.5, -0.9, 1.2})};
      break;
  }
  rig.Validate();
  return rig;
}

}  // namespace hetdepth
