#include "tofmpi/tofsim.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "tofmpi/error.hpp"
#include "tofmpi/parallel.hpp"
#include "tofmpi/rng.hpp"

namespace tofmpi {

namespace {

constexpr double kPi = std::numbers::pi;

// Stream ids for DeriveSeed so that sampling and noise never share draws.
constexpr std::uint64_t kBounceStream = 0x6f6e65626f756e63ull;
constexpr std::uint64_t kNoiseStream = 0x6e6f697365ull;

struct BounceSample {
  Eigen::Vector3d point;
  // L cos / |cam - q|^2 at q, times the patch area represented by the sample.
  double weighted_irradiance = 0.0;
  double camera_distance = 0.0;
  Eigen::Vector3d to_camera;
  double cos_to_camera = 0.0;
};

struct PlaneSamples {
  std::vector<BounceSample> samples;
  // Lower bound on |q - p|^2: the patch area represented by one sample.
  double min_distance2 = 0.0;
};

// Latin-hypercube stratified, jittered sample set on each plane.
std::vector<PlaneSamples> BuildBounceSamples(const CornerScene& scene, const SceneGeometry& geo,
                                             const ToFConfig& cfg) {
  const int planes = static_cast<int>(geo.planes.size());
  const int per_plane = std::max(1, cfg.bounce_samples / (planes - 1));
  std::vector<PlaneSamples> out(planes);
  for (int j = 0; j < planes; ++j) {
    const PlanePatch& patch = geo.planes[j];
    Rng rng(DeriveSeed(scene.seed ^ kBounceStream, static_cast<std::uint64_t>(j)));
    const auto perm_u = rng.Permutation(static_cast<std::uint32_t>(per_plane));
    const auto perm_v = rng.Permutation(static_cast<std::uint32_t>(per_plane));
    const double sample_area = patch.Area() / per_plane;
    out[j].min_distance2 = sample_area;
    for (int s = 0; s < per_plane; ++s) {
      const double a = (perm_u[s] + rng.Uniform01()) / per_plane;
      const double b = (perm_v[s] + rng.Uniform01()) / per_plane;
      BounceSample bs;
      bs.point = patch.SampleUniform(a, b);
      const Eigen::Vector3d to_cam = geo.camera.position - bs.point;
      bs.camera_distance = to_cam.norm();
      bs.to_camera = to_cam / bs.camera_distance;
      bs.cos_to_camera = patch.normal.dot(bs.to_camera);
      if (bs.cos_to_camera <= 0.0) continue;
      bs.weighted_irradiance = cfg.source_intensity * bs.cos_to_camera /
                               (bs.camera_distance * bs.camera_distance) * sample_area;
      out[j].samples.push_back(bs);
    }
  }
  return out;
}

}  // namespace

void ToFConfig::Validate() const {
  if (!(modulation_frequency > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "modulation_frequency must be positive");
  }
  if (bounce_samples < 1) {
    throw Error(ErrorCode::kInvalidArgument, "bounce_samples must be at least 1");
  }
  if (!(noise_stddev >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "noise_stddev must be non-negative");
  }
}

void FrameSet::CheckShapes() const {
  if (!depth.SameShape(amplitude) || !depth.SameShape(intensity) ||
      !depth.SameShape(ground_truth) || !depth.SameShape(valid)) {
    throw Error(ErrorCode::kDimensionMismatch, "frame rasters differ in shape");
  }
}

PhasorSum CombinePhasors(std::span<const PhasorReturn> returns, const ToFConfig& cfg) {
  const double k = 4.0 * kPi * cfg.modulation_frequency / kSpeedOfLight;
  std::complex<double> z{0.0, 0.0};
  bool any_signal = false;
  for (const auto& r : returns) {
    if (r.amplitude > 0.0) any_signal = true;
    z += std::polar(r.amplitude, k * r.path_distance);
  }
  if (!any_signal) throw Error(ErrorCode::kZeroSignal, "all return amplitudes are zero");

  const double range = cfg.UnambiguousRange();
  double depth = std::arg(z) / k;
  if (depth < 0.0) depth += range;
  if (depth >= range) depth -= range;
  return {depth, std::abs(z)};
}

FrameSet Render(const CornerScene& scene, const ToFConfig& cfg) {
  ValidateScene(scene);
  cfg.Validate();
  const SceneGeometry geo = ComputeSceneGeometry(scene);
  const int width = scene.resolution.width;
  const int height = scene.resolution.height;

  FrameSet frames{Raster(width, height), Raster(width, height), Raster(width, height),
                  Raster(width, height), Mask(width, height)};

  std::vector<PlaneSamples> bounce;
  if (cfg.multipath_enabled && geo.planes.size() > 1) {
    bounce = BuildBounceSamples(scene, geo, cfg);
  }
  const double range = cfg.UnambiguousRange();
  const Eigen::Vector3d& cam = geo.camera.position;

  ParallelFor(static_cast<std::size_t>(height), cfg.threads, [&](std::size_t row) {
    const int y = static_cast<int>(row);
    std::vector<PhasorReturn> returns;
    for (int x = 0; x < width; ++x) {
      const Eigen::Vector3d dir = geo.PixelRay(x, y, scene.resolution, scene.fov);
      double t_hit = -1.0;
      int hit_plane = -1;
      for (int k = 0; k < static_cast<int>(geo.planes.size()); ++k) {
        const double t = geo.planes[k].Intersect(cam, dir);
        if (t > 0.0 && (hit_plane < 0 || t < t_hit)) {
          t_hit = t;
          hit_plane = k;
        }
      }
      if (hit_plane < 0) continue;

      const PlanePatch& plane = geo.planes[hit_plane];
      const WardMaterial& mat = scene.materials[hit_plane];
      const Eigen::Vector3d p = cam + t_hit * dir;
      const Eigen::Vector3d to_cam = -dir;
      const double cos_p = plane.normal.dot(to_cam);
      frames.ground_truth(x, y) = t_hit;

      returns.clear();
      const double f_direct =
          WardReflectance(mat, plane.normal, to_cam, to_cam, cos_p, cos_p, cfg.normalization);
      returns.push_back({cfg.source_intensity * f_direct * cos_p / (t_hit * t_hit), t_hit});

      for (int j = 0; j < static_cast<int>(bounce.size()); ++j) {
        if (j == hit_plane) continue;
        const PlanePatch& other = geo.planes[j];
        const WardMaterial& other_mat = scene.materials[j];
        for (const BounceSample& q : bounce[j].samples) {
          const Eigen::Vector3d qp = p - q.point;
          const double dist2 = qp.squaredNorm();
          const double dist = std::sqrt(dist2);
          const Eigen::Vector3d q_to_p = qp / dist;
          const double cos_q = other.normal.dot(q_to_p);
          const double cos_p_in = -plane.normal.dot(q_to_p);
          if (cos_q <= 0.0 || cos_p_in <= 0.0) continue;
          const double f_q = WardReflectance(other_mat, other.normal, q.to_camera, q_to_p,
                                             q.cos_to_camera, cos_q, cfg.normalization);
          const Eigen::Vector3d p_to_q = -q_to_p;
          const double f_p = WardReflectance(mat, plane.normal, p_to_q, to_cam, cos_p_in, cos_p,
                                             cfg.normalization);
          const double irradiance = q.weighted_irradiance * f_q * cos_q * cos_p_in /
                                    std::max(dist2, bounce[j].min_distance2);
          returns.push_back({f_p * irradiance, 0.5 * (q.camera_distance + dist + t_hit)});
        }
      }

      double intensity = 0.0;
      for (const auto& r : returns) intensity += r.amplitude;
      if (!(intensity > 0.0)) continue;

      const PhasorSum sum = CombinePhasors(returns, cfg);
      double depth = sum.depth;
      if (cfg.noise_stddev > 0.0) {
        Rng noise(DeriveSeed(scene.seed ^ kNoiseStream,
                             static_cast<std::uint64_t>(y) * width + x));
        depth = std::fmod(depth + cfg.noise_stddev * noise.Normal(), range);
        if (depth < 0.0) depth += range;
      }
      frames.depth(x, y) = depth;
      frames.amplitude(x, y) = sum.amplitude;
      frames.intensity(x, y) = intensity;
      frames.valid(x, y) = 1;
    }
  });
  return frames;
}

}  // namespace tofmpi
