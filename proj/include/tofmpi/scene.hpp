#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace tofmpi {

// Isotropic Ward material. ks is the specular colour, kd the lambertian
// albedo; mu weights the lambertian term (mu = 1 is purely diffuse).
struct WardMaterial {
  double sigma = 0.5;
  double mu = 0.5;
  double kd = 1.0;
  double ks = 1.0;

  bool IsValid() const;
  bool operator==(const WardMaterial&) const = default;
};

struct NamedMaterial {
  std::string name;
  WardMaterial material;
};

// The six measured materials of the simple dataset, in fixed order:
// Concrete, Wood, Rough Plastic, Limestone, Rough Paper, Foil.
const std::vector<NamedMaterial>& BuiltinMaterials();

enum class CornerKind { kTwoPlane, kThreePlane };

std::string CornerKindName(CornerKind kind);
CornerKind ParseCornerKind(const std::string& name);

struct Resolution {
  int width = 200;
  int height = 200;
  bool operator==(const Resolution&) const = default;
};

inline constexpr double kDefaultCameraDistance = 3.0;
inline constexpr double kDefaultFov = 1.0471975511965976;  // 60 degrees

// Parametric corner scene.
//
// World frame: the first plane is the floor z = 0 (y >= 0); the second
// plane contains the x axis and the direction (0, cos(alpha), sin(alpha)),
// so alpha is the opening angle of the corner and the x axis is the
// intersection line. For kThreePlane both are restricted to x >= 0 and the
// third plane is x = 0, perpendicular to the other two; the corner vertex is
// the origin.
//
// Camera pose: ZYZ Euler angles (phi, theta, gamma). The camera starts at
// (0, 0, camera_distance) looking down -z with right = +x and up = +y, and is
// rotated by Rz(phi) * Ry(theta) * Rz(gamma) about the origin. theta is thus
// the polar angle from the floor normal, phi the azimuth about it and gamma
// the roll about the optical axis. The camera always looks at the origin.
struct CornerScene {
  CornerKind kind = CornerKind::kTwoPlane;
  double alpha = 1.5707963267948966;
  double theta = 0.7853981633974483;
  double phi = 1.5707963267948966;
  double gamma = 0.0;
  double camera_distance = kDefaultCameraDistance;
  std::vector<WardMaterial> materials;
  Resolution resolution;
  double fov = kDefaultFov;
  std::uint64_t seed = 0;

  bool operator==(const CornerScene&) const = default;
};

// Throws kInvalidScene / kDegenerateScene when a CornerScene invariant fails.
void ValidateScene(const CornerScene& scene);

// Simple dataset: one shared builtin material, alpha ~ U[pi/6, 2pi/3],
// theta = (pi - alpha) / 2, phi ~ U[pi/6, 2pi/3], gamma = 0.
CornerScene SampleSimpleScene(std::uint64_t rng_seed);

// Challenging dataset: independent uniform materials (ks = 1), angles
// uniform over their full domains; poses where the camera is not in front of
// every plane are rejected and redrawn.
CornerScene SampleChallengingScene(std::uint64_t rng_seed, CornerKind kind);

// Half-extent of the rendered planes along the intersection line and their
// length away from it, in scene units.
inline constexpr double kPlaneExtent = 4.0;

// Finite planar patch with an orthonormal in-plane frame (axis_u, axis_v);
// normal faces into the corner. A rectangle covers
// [u_min, u_max] x [v_min, v_max]; a sector is centred on origin with the
// given radius and spans polar angles [0, sector_angle] from axis_u.
struct PlanePatch {
  enum class Shape { kRectangle, kSector };

  Shape shape = Shape::kRectangle;
  Eigen::Vector3d origin = Eigen::Vector3d::Zero();
  Eigen::Vector3d axis_u = Eigen::Vector3d::UnitX();
  Eigen::Vector3d axis_v = Eigen::Vector3d::UnitY();
  Eigen::Vector3d normal = Eigen::Vector3d::UnitZ();
  double u_min = 0, u_max = 0;
  double v_min = 0, v_max = 0;
  double radius = 0;
  double sector_angle = 0;

  double Area() const;
  bool Contains(double u, double v) const;
  // Maps (a, b) in [0,1)^2 to a point on the patch, uniformly by area.
  Eigen::Vector3d SampleUniform(double a, double b) const;
  double SignedDistance(const Eigen::Vector3d& p) const { return normal.dot(p - origin); }
  // Ray parameter of a hit on this patch, or a negative value on a miss.
  double Intersect(const Eigen::Vector3d& ray_origin, const Eigen::Vector3d& ray_dir) const;
};

struct CameraPose {
  Eigen::Vector3d position;
  Eigen::Vector3d forward;
  Eigen::Vector3d right;
  Eigen::Vector3d up;
};

struct SceneGeometry {
  std::vector<PlanePatch> planes;
  CameraPose camera;
  // Point the camera looks at (centre of the plane intersection).
  Eigen::Vector3d look_at = Eigen::Vector3d::Zero();

  // Unit ray direction through the centre of pixel (x, y).
  Eigen::Vector3d PixelRay(int x, int y, const Resolution& res, double fov) const;
};

// Throws kDegenerateScene if alpha is outside (0, pi).
SceneGeometry ComputeSceneGeometry(const CornerScene& scene);

// Camera-inside-corner test used by rejection sampling.
bool CameraInsideCorner(const SceneGeometry& geometry);

}  // namespace tofmpi
