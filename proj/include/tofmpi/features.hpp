#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "tofmpi/tofsim.hpp"

namespace tofmpi {

inline constexpr int kFeatureLayoutVersion = 1;
inline constexpr int kFullFeatureCount = 39;

enum class ConfidenceMode {
  // exp(-(D cos(-pi/4) + D sin(-pi/4))^2), which is identically 1.
  kLiteral,
  // exp(-(A cos(-pi/4) + D sin(-pi/4))^2): amplitude/depth mixture.
  kAmplitudeDepth,
};

struct FeatureConfig {
  ConfidenceMode confidence = ConfidenceMode::kLiteral;
  // false drops the last channel (normalized y) for the 38-feature mode.
  bool include_norm_y = true;

  bool operator==(const FeatureConfig&) const = default;
};

// Canonical channel names, in order.
std::vector<std::string> FeatureLayout(const FeatureConfig& cfg = {});

// Per-pixel feature raster, channel-interleaved (pixel-major).
struct FeatureTensor {
  int width = 0;
  int height = 0;
  std::vector<std::string> layout;
  std::vector<double> data;

  int channels() const { return static_cast<int>(layout.size()); }
  double at(int x, int y, int c) const {
    return data[(static_cast<std::size_t>(y) * width + x) * layout.size() + c];
  }
  double& at(int x, int y, int c) {
    return data[(static_cast<std::size_t>(y) * width + x) * layout.size() + c];
  }
  const double* pixel(int x, int y) const {
    return data.data() + (static_cast<std::size_t>(y) * width + x) * layout.size();
  }
  Raster Channel(int c) const;
};

double Confidence(double depth);
double ConfidenceAmplitudeDepth(double amplitude, double depth);

// Throws kDimensionMismatch if the frame rasters disagree in shape.
FeatureTensor ExtractFeatures(const FrameSet& frames, const FeatureConfig& cfg = {});

// TFIM raster with one channel per feature plus <path>.json listing the
// layout and format version.
void WriteFeatureTensor(const std::filesystem::path& path, const FeatureTensor& tensor);
FeatureTensor ReadFeatureTensor(const std::filesystem::path& path);

}  // namespace tofmpi
