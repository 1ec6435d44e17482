#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tofmpi/brdf.hpp"
#include "tofmpi/raster.hpp"
#include "tofmpi/scene.hpp"

namespace tofmpi {

inline constexpr double kSpeedOfLight = 299'792'458.0;

struct ToFConfig {
  double modulation_frequency = 2.0e7;
  // Secondary-path samples per pixel, spread evenly over the other planes.
  int bounce_samples = 64;
  bool multipath_enabled = true;
  // Additive zero-mean Gaussian depth noise, metres.
  double noise_stddev = 0.0;
  // Radiant intensity of the point source co-located with the camera.
  double source_intensity = 1.0;
  WardNormalization normalization = WardNormalization::kClassic;
  // Worker threads for rendering; 0 = hardware concurrency.
  unsigned threads = 0;

  double UnambiguousRange() const { return kSpeedOfLight / (2.0 * modulation_frequency); }
  void Validate() const;
};

// Co-registered rasters of one rendered scene. valid marks pixels whose ray
// hit a plane and returned a non-zero signal.
struct FrameSet {
  Raster depth;
  Raster amplitude;
  Raster intensity;
  Raster ground_truth;
  Mask valid;

  int width() const { return depth.width(); }
  int height() const { return depth.height(); }
  // Throws kDimensionMismatch unless all rasters share one shape.
  void CheckShapes() const;
};

struct PhasorReturn {
  double amplitude = 0.0;
  double path_distance = 0.0;
};

struct PhasorSum {
  double depth = 0.0;
  double amplitude = 0.0;
};

// Coherent sum z = sum_k a_k exp(i 4 pi f d_k / c); depth = arg(z) c / (4 pi f)
// wrapped into [0, unambiguous range), amplitude = |z|.
// Throws kZeroSignal if no return has a positive amplitude.
PhasorSum CombinePhasors(std::span<const PhasorReturn> returns, const ToFConfig& cfg);

// Renders measured depth, amplitude, intensity and ground truth (radial
// distance) with direct returns plus one-bounce camera -> q -> p -> camera
// paths. Deterministic given scene.seed and cfg.
FrameSet Render(const CornerScene& scene, const ToFConfig& cfg);

}  // namespace tofmpi
