#include "tofmpi/scene_io.hpp"

#include <fstream>

#include "tofmpi/error.hpp"

namespace tofmpi {

namespace {

nlohmann::json MaterialToJson(const WardMaterial& m) {
  return {{"sigma", m.sigma}, {"mu", m.mu}, {"kd", m.kd}, {"ks", m.ks}};
}

WardMaterial MaterialFromJson(const nlohmann::json& j) {
  WardMaterial m;
  m.sigma = j.at("sigma").get<double>();
  m.mu = j.at("mu").get<double>();
  m.kd = j.at("kd").get<double>();
  m.ks = j.at("ks").get<double>();
  return m;
}

}  // namespace

nlohmann::json SceneToJson(const CornerScene& scene) {
  nlohmann::json materials = nlohmann::json::array();
  for (const auto& m : scene.materials) materials.push_back(MaterialToJson(m));
  return {
      {"kind", CornerKindName(scene.kind)},
      {"alpha", scene.alpha},
      {"theta", scene.theta},
      {"phi", scene.phi},
      {"gamma", scene.gamma},
      {"camera_distance", scene.camera_distance},
      {"materials", materials},
      {"resolution", {{"width", scene.resolution.width}, {"height", scene.resolution.height}}},
      {"fov", scene.fov},
      {"seed", scene.seed},
  };
}

CornerScene SceneFromJson(const nlohmann::json& j) {
  try {
    CornerScene scene;
    scene.kind = ParseCornerKind(j.at("kind").get<std::string>());
    scene.alpha = j.at("alpha").get<double>();
    scene.theta = j.at("theta").get<double>();
    scene.phi = j.at("phi").get<double>();
    scene.gamma = j.at("gamma").get<double>();
    scene.camera_distance = j.at("camera_distance").get<double>();
    scene.materials.clear();
    for (const auto& m : j.at("materials")) scene.materials.push_back(MaterialFromJson(m));
    scene.resolution.width = j.at("resolution").at("width").get<int>();
    scene.resolution.height = j.at("resolution").at("height").get<int>();
    scene.fov = j.at("fov").get<double>();
    scene.seed = j.at("seed").get<std::uint64_t>();
    return scene;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidScene, std::string("malformed scene manifest: ") + e.what());
  }
}

std::vector<CornerScene> ReadSceneManifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidScene, path.string() + ": " + e.what());
  }
  std::vector<CornerScene> scenes;
  if (j.is_array()) {
    for (const auto& item : j) scenes.push_back(SceneFromJson(item));
  } else {
    scenes.push_back(SceneFromJson(j));
  }
  return scenes;
}

void WriteSceneManifest(const std::filesystem::path& path, const CornerScene& scene) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out << SceneToJson(scene).dump(2) << '\n';
  if (!out) throw Error(ErrorCode::kIoError, "write failed for " + path.string());
}

}  // namespace tofmpi
