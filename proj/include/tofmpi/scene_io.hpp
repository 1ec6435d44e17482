#pragma once

#include <filesystem>
#include <vector>

#include "json.hpp"
#include "tofmpi/scene.hpp"

namespace tofmpi {

inline constexpr int kSceneManifestVersion = 1;
inline constexpr const char* kEulerConvention =
    "zyz: R = Rz(phi) * Ry(theta) * Rz(gamma) applied to camera at (0,0,d) looking -z";

nlohmann::json SceneToJson(const CornerScene& scene);
CornerScene SceneFromJson(const nlohmann::json& j);

// Accepts either a single scene object or an array of scenes.
std::vector<CornerScene> ReadSceneManifest(const std::filesystem::path& path);
void WriteSceneManifest(const std::filesystem::path& path, const CornerScene& scene);

}  // namespace tofmpi
