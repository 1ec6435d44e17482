#include "tofmpi/features.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

#include "json.hpp"
#include "tofmpi/error.hpp"
#include "tofmpi/filters.hpp"
#include "tofmpi/raster_io.hpp"

namespace tofmpi {

namespace {

constexpr double kQuarterTurn = -std::numbers::pi / 4.0;

std::filesystem::path SidecarPath(const std::filesystem::path& path) {
  auto p = path;
  p += ".json";
  return p;
}

}  // namespace

std::vector<std::string> FeatureLayout(const FeatureConfig& cfg) {
  std::vector<std::string> names = {
      "intensity", "depth", "amplitude", "radial_distance",
      cfg.confidence == ConfidenceMode::kLiteral ? "confidence" : "confidence_amplitude_depth"};
  const char* sources[] = {"intensity", "depth"};
  for (const char* src : sources)
    for (int k : {3, 5, 7}) names.push_back("laplacian" + std::to_string(k) + "_" + src);
  for (const char* src : sources)
    for (int k : {3, 5, 7}) names.push_back("canny" + std::to_string(k) + "_" + src);
  for (const char* src : sources)
    for (double deg : kGaborOrientationsDeg)
      names.push_back("gabor" + std::to_string(static_cast<int>(deg)) + "_" + src);
  for (const char* src : sources)
    for (const char* g : {"grad_x", "grad_y", "grad_xy", "grad_magnitude", "grad_angle"})
      names.push_back(std::string(g) + "_" + src);
  for (const char* src : sources) names.push_back(std::string("lbp_") + src);
  names.push_back("norm_x");
  if (cfg.include_norm_y) names.push_back("norm_y");
  return names;
}

Raster FeatureTensor::Channel(int c) const {
  Raster r(width, height);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) r(x, y) = at(x, y, c);
  return r;
}

double Confidence(double depth) {
  const double s = depth * std::cos(kQuarterTurn) + depth * std::sin(kQuarterTurn);
  return std::exp(-(s * s));
}

double ConfidenceAmplitudeDepth(double amplitude, double depth) {
  const double s = amplitude * std::cos(kQuarterTurn) + depth * std::sin(kQuarterTurn);
  return std::exp(-(s * s));
}

FeatureTensor ExtractFeatures(const FrameSet& frames, const FeatureConfig& cfg) {
  frames.CheckShapes();
  const int w = frames.width();
  const int h = frames.height();

  FeatureTensor t;
  t.width = w;
  t.height = h;
  t.layout = FeatureLayout(cfg);
  const int channels = t.channels();
  t.data.assign(static_cast<std::size_t>(w) * h * channels, 0.0);

  int c = 0;
  auto put = [&](const Raster& r) {
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) t.at(x, y, c) = r(x, y);
    ++c;
  };

  const Raster& intensity = frames.intensity;
  const Raster& depth = frames.depth;
  put(intensity);
  put(depth);
  put(frames.amplitude);

  const double cx = 0.5 * (w - 1);
  const double cy = 0.5 * (h - 1);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) t.at(x, y, c) = std::hypot(x - cx, y - cy);
  ++c;

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      t.at(x, y, c) = cfg.confidence == ConfidenceMode::kLiteral
                          ? Confidence(depth(x, y))
                          : ConfidenceAmplitudeDepth(frames.amplitude(x, y), depth(x, y));
    }
  }
  ++c;

  const Raster* sources[] = {&intensity, &depth};
  for (const Raster* src : sources)
    for (int k : {3, 5, 7}) put(Laplacian(*src, k));
  for (const Raster* src : sources)
    for (int k : {3, 5, 7}) put(Canny(*src, k));
  for (const Raster* src : sources)
    for (const Raster& r : GaborBank(*src)) put(r);
  for (const Raster* src : sources) {
    const Gradients g = ComputeGradients(*src);
    put(g.grad_x);
    put(g.grad_y);
    put(g.grad_xy);
    put(g.magnitude);
    put(g.angle);
  }
  for (const Raster* src : sources) put(Lbp(*src));

  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) t.at(x, y, c) = static_cast<double>(x) / w;
  ++c;
  if (cfg.include_norm_y) {
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) t.at(x, y, c) = static_cast<double>(y) / h;
    ++c;
  }
  return t;
}

void WriteFeatureTensor(const std::filesystem::path& path, const FeatureTensor& tensor) {
  TfimImage img;
  img.width = tensor.width;
  img.height = tensor.height;
  img.channels = tensor.channels();
  img.data.assign(tensor.data.begin(), tensor.data.end());
  WriteTfim(path, img);
  const nlohmann::json sidecar = {{"format_version", kFeatureLayoutVersion},
                                  {"layout", tensor.layout}};
  std::ofstream out(SidecarPath(path));
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + SidecarPath(path).string());
  out << sidecar.dump(2) << '\n';
}

FeatureTensor ReadFeatureTensor(const std::filesystem::path& path) {
  const TfimImage img = ReadTfim(path);
  std::ifstream in(SidecarPath(path));
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + SidecarPath(path).string());
  const nlohmann::json sidecar = nlohmann::json::parse(in);
  if (sidecar.at("format_version").get<int>() != kFeatureLayoutVersion) {
    throw Error(ErrorCode::kVersionMismatch, "unsupported feature layout version");
  }
  FeatureTensor t;
  t.width = img.width;
  t.height = img.height;
  t.layout = sidecar.at("layout").get<std::vector<std::string>>();
  if (t.channels() != img.channels) {
    throw Error(ErrorCode::kLayoutMismatch, "layout length differs from channel count");
  }
  t.data.assign(img.data.begin(), img.data.end());
  return t;
}

}  // namespace tofmpi
