#include "tofmpi/scene.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Geometry>

#include "tofmpi/error.hpp"
#include "tofmpi/rng.hpp"

namespace tofmpi {

namespace {

constexpr double kPi = std::numbers::pi;

bool InUnit(double v) { return v >= 0.0 && v <= 1.0; }

Eigen::Matrix3d EulerZyz(double phi, double theta, double gamma) {
  return (Eigen::AngleAxisd(phi, Eigen::Vector3d::UnitZ()) *
          Eigen::AngleAxisd(theta, Eigen::Vector3d::UnitY()) *
          Eigen::AngleAxisd(gamma, Eigen::Vector3d::UnitZ()))
      .toRotationMatrix();
}

// Pose rejection keeps the camera at least this far in front of each plane.
constexpr double kInsideMargin = 1e-6;
constexpr int kMaxPoseAttempts = 1'000'000;

}  // namespace

bool WardMaterial::IsValid() const {
  return InUnit(sigma) && InUnit(mu) && InUnit(kd) && InUnit(ks);
}

const std::vector<NamedMaterial>& BuiltinMaterials() {
  static const std::vector<NamedMaterial> kMaterials = {
      {"Concrete", {0.600672, 0.668533, 0.994044, 1.0}},
      {"Wood", {0.598438, 0.132031, 0.965061, 1.0}},
      {"Rough Plastic", {0.278057, 0.480943, 0.969021, 1.0}},
      {"Limestone", {0.413544, 0.292841, 0.972684, 1.0}},
      {"Rough Paper", {0.311376, 0.644926, 0.937665, 1.0}},
      {"Foil", {0.252702, 0.581514, 0.891302, 1.0}},
  };
  return kMaterials;
}

std::string CornerKindName(CornerKind kind) {
  return kind == CornerKind::kTwoPlane ? "two_plane" : "three_plane";
}

CornerKind ParseCornerKind(const std::string& name) {
  if (name == "two_plane") return CornerKind::kTwoPlane;
  if (name == "three_plane") return CornerKind::kThreePlane;
  throw Error(ErrorCode::kInvalidScene, "unknown corner kind '" + name + "'");
}

void ValidateScene(const CornerScene& scene) {
  if (!(scene.alpha > 0.0 && scene.alpha < kPi)) {
    throw Error(ErrorCode::kDegenerateScene, "alpha must lie in (0, pi)");
  }
  if (!(scene.camera_distance > 0.0)) {
    throw Error(ErrorCode::kInvalidScene, "camera_distance must be positive");
  }
  if (scene.resolution.width < 8 || scene.resolution.height < 8) {
    throw Error(ErrorCode::kInvalidScene, "resolution must be at least 8x8");
  }
  if (!(scene.fov > 0.0 && scene.fov < kPi)) {
    throw Error(ErrorCode::kInvalidScene, "fov must lie in (0, pi)");
  }
  const std::size_t expected = scene.kind == CornerKind::kTwoPlane ? 2 : 3;
  if (scene.materials.size() != expected) {
    throw Error(ErrorCode::kInvalidScene, "material count does not match corner kind");
  }
  for (const auto& m : scene.materials) {
    if (!m.IsValid()) {
      throw Error(ErrorCode::kInvalidScene, "material parameters must lie in [0, 1]");
    }
  }
}

CornerScene SampleSimpleScene(std::uint64_t rng_seed) {
  Rng rng(rng_seed);
  const auto& materials = BuiltinMaterials();
  const auto& material = materials[rng.UniformIndex(materials.size())].material;

  CornerScene scene;
  scene.kind = CornerKind::kTwoPlane;
  scene.alpha = rng.Uniform(kPi / 6.0, 2.0 * kPi / 3.0);
  scene.theta = (kPi - scene.alpha) / 2.0;
  scene.phi = rng.Uniform(kPi / 6.0, 2.0 * kPi / 3.0);
  scene.gamma = 0.0;
  scene.camera_distance = kDefaultCameraDistance;
  scene.materials = {material, material};
  scene.seed = rng_seed;
  return scene;
}

CornerScene SampleChallengingScene(std::uint64_t rng_seed, CornerKind kind) {
  Rng rng(rng_seed);
  CornerScene scene;
  scene.kind = kind;
  scene.camera_distance = kDefaultCameraDistance;
  scene.seed = rng_seed;

  const int planes = kind == CornerKind::kTwoPlane ? 2 : 3;
  for (int i = 0; i < planes; ++i) {
    WardMaterial m;
    m.sigma = rng.Uniform01();
    m.mu = rng.Uniform01();
    m.kd = rng.Uniform01();
    m.ks = 1.0;
    scene.materials.push_back(m);
  }

  for (;;) {
    do {
      scene.alpha = rng.Uniform(0.0, kPi);
    } while (scene.alpha <= 0.0);

    for (int attempt = 0; attempt < kMaxPoseAttempts; ++attempt) {
      scene.theta = rng.Uniform(0.0, kPi);
      scene.phi = rng.Uniform(0.0, 2.0 * kPi);
      scene.gamma = rng.Uniform(0.0, 2.0 * kPi);
      if (CameraInsideCorner(ComputeSceneGeometry(scene))) return scene;
    }
    // Vanishingly thin corner; draw a new opening angle.
  }
}

double PlanePatch::Area() const {
  if (shape == Shape::kSector) return 0.5 * sector_angle * radius * radius;
  return (u_max - u_min) * (v_max - v_min);
}

bool PlanePatch::Contains(double u, double v) const {
  if (shape == Shape::kSector) {
    if (u * u + v * v > radius * radius) return false;
    const double angle = std::atan2(v, u);
    return angle >= 0.0 && angle <= sector_angle;
  }
  return u >= u_min && u <= u_max && v >= v_min && v <= v_max;
}

Eigen::Vector3d PlanePatch::SampleUniform(double a, double b) const {
  if (shape == Shape::kSector) {
    const double r = radius * std::sqrt(a);
    const double angle = sector_angle * b;
    return origin + r * std::cos(angle) * axis_u + r * std::sin(angle) * axis_v;
  }
  return origin + (u_min + a * (u_max - u_min)) * axis_u + (v_min + b * (v_max - v_min)) * axis_v;
}

double PlanePatch::Intersect(const Eigen::Vector3d& ray_origin,
                             const Eigen::Vector3d& ray_dir) const {
  const double denom = normal.dot(ray_dir);
  // Only front faces are visible from inside the corner.
  if (denom >= 0.0) return -1.0;
  const double t = normal.dot(origin - ray_origin) / denom;
  if (!(t > 0.0)) return -1.0;
  const Eigen::Vector3d rel = ray_origin + t * ray_dir - origin;
  return Contains(rel.dot(axis_u), rel.dot(axis_v)) ? t : -1.0;
}

Eigen::Vector3d SceneGeometry::PixelRay(int x, int y, const Resolution& res, double fov) const {
  const double tan_half = std::tan(0.5 * fov);
  const double px = ((x + 0.5) / res.width * 2.0 - 1.0) * tan_half;
  const double py = (1.0 - (y + 0.5) / res.height * 2.0) * tan_half *
                    static_cast<double>(res.height) / res.width;
  return (camera.forward + px * camera.right + py * camera.up).normalized();
}

SceneGeometry ComputeSceneGeometry(const CornerScene& scene) {
  if (!(scene.alpha > 0.0 && scene.alpha < kPi)) {
    throw Error(ErrorCode::kDegenerateScene, "alpha must lie in (0, pi)");
  }
  const double ca = std::cos(scene.alpha);
  const double sa = std::sin(scene.alpha);
  const bool three = scene.kind == CornerKind::kThreePlane;
  const double u_lo = three ? 0.0 : -kPlaneExtent;

  SceneGeometry geo;

  PlanePatch floor;
  floor.axis_u = Eigen::Vector3d::UnitX();
  floor.axis_v = Eigen::Vector3d::UnitY();
  floor.normal = Eigen::Vector3d::UnitZ();
  floor.u_min = u_lo;
  floor.u_max = kPlaneExtent;
  floor.v_min = 0.0;
  floor.v_max = kPlaneExtent;
  geo.planes.push_back(floor);

  PlanePatch wall;
  wall.axis_u = Eigen::Vector3d::UnitX();
  wall.axis_v = Eigen::Vector3d(0.0, ca, sa);
  wall.normal = Eigen::Vector3d(0.0, sa, -ca);
  wall.u_min = u_lo;
  wall.u_max = kPlaneExtent;
  wall.v_min = 0.0;
  wall.v_max = kPlaneExtent;
  geo.planes.push_back(wall);

  if (three) {
    PlanePatch side;
    side.shape = PlanePatch::Shape::kSector;
    side.axis_u = Eigen::Vector3d::UnitY();
    side.axis_v = Eigen::Vector3d::UnitZ();
    side.normal = Eigen::Vector3d::UnitX();
    side.radius = kPlaneExtent;
    side.sector_angle = scene.alpha;
    geo.planes.push_back(side);
  }

  const Eigen::Matrix3d rot = EulerZyz(scene.phi, scene.theta, scene.gamma);
  geo.camera.position = rot * Eigen::Vector3d(0.0, 0.0, scene.camera_distance);
  geo.camera.forward = rot * Eigen::Vector3d(0.0, 0.0, -1.0);
  geo.camera.right = rot * Eigen::Vector3d::UnitX();
  geo.camera.up = rot * Eigen::Vector3d::UnitY();
  geo.look_at = Eigen::Vector3d::Zero();
  return geo;
}

bool CameraInsideCorner(const SceneGeometry& geometry) {
  for (const auto& plane : geometry.planes) {
    if (!(plane.SignedDistance(geometry.camera.position) > kInsideMargin)) return false;
  }
  return true;
}

}  // namespace tofmpi
