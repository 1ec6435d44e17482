#include "tofmpi/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <set>

#include "json.hpp"
#include "tofmpi/error.hpp"
#include "tofmpi/parallel.hpp"
#include "tofmpi/raster_io.hpp"
#include "tofmpi/rng.hpp"
#include "tofmpi/scene_io.hpp"

namespace tofmpi {

namespace {

constexpr std::uint64_t kSplitStream = 0x73706c6974ull;
constexpr std::uint64_t kPixelStream = 0x706978656cull;

using Clock = std::chrono::steady_clock;

double SecondsSince(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void EnsureDirectory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw Error(ErrorCode::kIoError, "cannot create directory " + dir.string());
  }
}

void RequireDirectory(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(ErrorCode::kIoError, "no such directory " + dir.string());
}

void WriteJson(const fs::path& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw Error(ErrorCode::kIoError, "write failed for " + path.string());
}

nlohmann::json ReadJson(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kIoError, path.string() + ": " + e.what());
  }
}

void WriteText(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out << text;
}

// Sorted stems of files in dir named scene_*<ext>.
std::vector<std::string> ListStems(const fs::path& dir, const std::string& ext) {
  RequireDirectory(dir);
  std::vector<std::string> stems;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const auto& p = entry.path();
    if (p.extension() == ext && p.stem().string().rfind("scene_", 0) == 0) {
      stems.push_back(p.stem().string());
    }
  }
  std::sort(stems.begin(), stems.end());
  return stems;
}

}  // namespace

std::string DatasetKindName(DatasetKind kind) {
  switch (kind) {
    case DatasetKind::kSimple: return "simple";
    case DatasetKind::kChallenging2: return "challenging2";
    case DatasetKind::kChallenging3: return "challenging3";
  }
  return "simple";
}

DatasetKind ParseDatasetKind(const std::string& name) {
  if (name == "simple") return DatasetKind::kSimple;
  if (name == "challenging2") return DatasetKind::kChallenging2;
  if (name == "challenging3") return DatasetKind::kChallenging3;
  throw Error(ErrorCode::kInvalidArgument, "unknown dataset kind '" + name + "'");
}

std::string SceneStem(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "scene_%06zu", index);
  return buf;
}

void GenerateDataset(const GenOptions& options, const fs::path& out_dir) {
  if (options.count < 1) throw Error(ErrorCode::kInvalidCount, "count must be at least 1");
  EnsureDirectory(out_dir);
  for (int i = 0; i < options.count; ++i) {
    const std::uint64_t seed = DeriveSeed(options.seed, static_cast<std::uint64_t>(i));
    CornerScene scene;
    switch (options.kind) {
      case DatasetKind::kSimple: scene = SampleSimpleScene(seed); break;
      case DatasetKind::kChallenging2:
        scene = SampleChallengingScene(seed, CornerKind::kTwoPlane);
        break;
      case DatasetKind::kChallenging3:
        scene = SampleChallengingScene(seed, CornerKind::kThreePlane);
        break;
    }
    scene.resolution = options.resolution;
    scene.fov = options.fov;
    WriteSceneManifest(out_dir / (SceneStem(i) + ".json"), scene);
  }
  WriteJson(out_dir / "dataset.json",
            {{"dataset", DatasetKindName(options.kind)},
             {"seed", options.seed},
             {"count", options.count},
             {"resolution", {{"width", options.resolution.width}, {"height", options.resolution.height}}},
             {"scene_seed_rule", "splitmix64(seed + i * 0x9E3779B97F4A7C15)"},
             {"rng", "xoshiro256** seeded by splitmix64"},
             {"euler_convention", kEulerConvention},
             {"scene_manifest_version", kSceneManifestVersion},
             {"raster_format_version", kTfimVersion},
             {"feature_layout_version", kFeatureLayoutVersion}});
}

RenderSummary RenderDataset(const fs::path& scene_dir, const fs::path& out_dir,
                            const ToFConfig& cfg, std::ostream* log) {
  cfg.Validate();
  const auto stems = ListStems(scene_dir, ".json");
  EnsureDirectory(out_dir);
  RenderSummary summary;
  const auto start = Clock::now();
  for (const auto& stem : stems) {
    const auto scenes = ReadSceneManifest(scene_dir / (stem + ".json"));
    for (std::size_t k = 0; k < scenes.size(); ++k) {
      const std::string name = scenes.size() == 1 ? stem : stem + "_" + std::to_string(k);
      try {
        const auto t0 = Clock::now();
        const FrameSet frames = Render(scenes[k], cfg);
        WriteFrameSet(out_dir / (name + ".tfim"), frames);
        summary.rendered.push_back(name);
        if (log) *log << "rendered " << name << " in " << SecondsSince(t0) << " s\n";
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kDegenerateScene) throw;
        summary.skipped.push_back(name);
        if (log) *log << "warning: skipping " << name << ": " << e.what() << '\n';
      }
    }
  }
  WriteJson(out_dir / "skipped.json", summary.skipped);
  WriteJson(out_dir / "render.json", {{"modulation_frequency", cfg.modulation_frequency},
                                      {"bounce_samples", cfg.bounce_samples},
                                      {"multipath_enabled", cfg.multipath_enabled},
                                      {"noise_stddev", cfg.noise_stddev}});
  if (log) {
    *log << "rendered " << summary.rendered.size() << " scenes (" << summary.skipped.size()
         << " skipped) in " << SecondsSince(start) << " s\n";
  }
  return summary;
}

std::vector<std::string> ListFrameStems(const fs::path& frames_dir) {
  auto stems = ListStems(frames_dir, ".tfim");
  std::erase_if(stems, [&](const std::string& s) { return !fs::exists(frames_dir / (s + ".tfmk")); });
  return stems;
}

void AppendTrainingRows(const FrameSet& frames, const FeatureConfig& cfg, double fraction,
                        std::uint64_t sample_seed, FeatureMatrix& X, std::vector<double>& y) {
  const FeatureTensor t = ExtractFeatures(frames, cfg);
  const auto channels = static_cast<std::size_t>(t.channels());
  if (X.cols == 0 && X.rows == 0) {
    X.cols = channels;
    X.columns = t.layout;
  }
  if (X.cols != channels) throw Error(ErrorCode::kLayoutMismatch, "feature width changed");
  Rng rng(sample_seed);
  for (int py = 0; py < t.height; ++py) {
    for (int px = 0; px < t.width; ++px) {
      if (!frames.valid(px, py) || frames.ground_truth(px, py) == 0.0) continue;
      if (fraction < 1.0 && !(rng.Uniform01() < fraction)) continue;
      const double* f = t.pixel(px, py);
      X.data.insert(X.data.end(), f, f + channels);
      y.push_back(frames.ground_truth(px, py) - frames.depth(px, py));
      ++X.rows;
    }
  }
}

fs::path SplitManifestPath(const fs::path& model_path) {
  auto p = model_path;
  p += ".split.json";
  return p;
}

SplitManifest ReadSplitManifest(const fs::path& path) {
  const auto j = ReadJson(path);
  return {j.at("train").get<std::vector<std::string>>(), j.at("test").get<std::vector<std::string>>()};
}

TrainSummary TrainModel(const fs::path& frames_dir, const fs::path& model_out,
                        const TrainOptions& options, std::ostream* log) {
  options.forest.Validate();
  if (!(options.pixel_fraction > 0.0 && options.pixel_fraction <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "pixel fraction must lie in (0, 1]");
  }
  if (options.train_images < 1) throw Error(ErrorCode::kInvalidCount, "train_images must be >= 1");
  const auto stems = ListFrameStems(frames_dir);
  if (stems.size() < static_cast<std::size_t>(options.train_images)) {
    throw Error(ErrorCode::kInsufficientData,
                "need " + std::to_string(options.train_images) + " frame sets, found " +
                    std::to_string(stems.size()));
  }

  Rng split_rng(DeriveSeed(options.forest.seed, kSplitStream));
  const auto perm = split_rng.Permutation(static_cast<std::uint32_t>(stems.size()));
  TrainSummary summary;
  for (std::size_t i = 0; i < perm.size(); ++i) {
    (i < static_cast<std::size_t>(options.train_images) ? summary.train : summary.test)
        .push_back(stems[perm[i]]);
  }
  std::sort(summary.train.begin(), summary.train.end());
  std::sort(summary.test.begin(), summary.test.end());

  const auto start = Clock::now();
  FeatureMatrix X;
  std::vector<double> y;
  {
    const FrameSet first = ReadFrameSet(frames_dir / (summary.train.front() + ".tfim"));
    const std::size_t estimate = static_cast<std::size_t>(first.width()) * first.height() *
                                 summary.train.size();
    const std::size_t expected_rows =
        static_cast<std::size_t>(static_cast<double>(estimate) * options.pixel_fraction * 1.01) + 64;
    X.data.reserve(expected_rows * FeatureLayout(options.features).size());
    y.reserve(expected_rows);
  }
  // Featurize in parallel batches, append in a fixed order.
  const unsigned workers = options.forest.threads ? options.forest.threads : DefaultThreadCount();
  for (std::size_t begin = 0; begin < summary.train.size(); begin += workers) {
    const std::size_t end = std::min(summary.train.size(), begin + workers);
    std::vector<FeatureMatrix> part_x(end - begin);
    std::vector<std::vector<double>> part_y(end - begin);
    ParallelFor(end - begin, workers, [&](std::size_t k) {
      const std::size_t i = begin + k;
      const FrameSet frames = ReadFrameSet(frames_dir / (summary.train[i] + ".tfim"));
      AppendTrainingRows(frames, options.features, options.pixel_fraction,
                         DeriveSeed(options.forest.seed ^ kPixelStream, i), part_x[k], part_y[k]);
    });
    for (std::size_t k = 0; k < part_x.size(); ++k) {
      if (part_x[k].rows == 0) continue;
      if (X.rows == 0) {
        X.cols = part_x[k].cols;
        X.columns = part_x[k].columns;
      }
      X.data.insert(X.data.end(), part_x[k].data.begin(), part_x[k].data.end());
      X.rows += part_x[k].rows;
      y.insert(y.end(), part_y[k].begin(), part_y[k].end());
    }
  }
  if (X.rows == 0) throw Error(ErrorCode::kInsufficientData, "training images have no valid pixels");
  if (log) {
    *log << "built " << X.rows << " x " << X.cols << " training matrix in " << SecondsSince(start)
         << " s\n";
  }

  const auto train_start = Clock::now();
  const RegressionForest forest = TrainForest(X, y, options.forest);
  if (log) *log << "trained " << forest.trees.size() << " trees in " << SecondsSince(train_start) << " s\n";

  const auto bytes = SaveForest(forest);
  if (model_out.has_parent_path()) EnsureDirectory(model_out.parent_path());
  WriteFileBytes(model_out, bytes);
  WriteJson(SplitManifestPath(model_out),
            {{"seed", options.forest.seed}, {"train", summary.train}, {"test", summary.test}});

  summary.rows = X.rows;
  summary.features = X.cols;
  summary.importances = forest.importances;
  summary.layout = forest.layout;
  return summary;
}

FeatureConfig FeatureConfigForLayout(const std::vector<std::string>& layout) {
  for (auto mode : {ConfidenceMode::kLiteral, ConfidenceMode::kAmplitudeDepth}) {
    for (bool norm_y : {true, false}) {
      const FeatureConfig cfg{mode, norm_y};
      if (FeatureLayout(cfg) == layout) return cfg;
    }
  }
  throw Error(ErrorCode::kLayoutMismatch, "model layout does not match any known feature layout");
}

Raster CorrectDepth(const FrameSet& frames, const RegressionForest& forest) {
  const FeatureConfig cfg = FeatureConfigForLayout(forest.layout);
  const FeatureTensor t = ExtractFeatures(frames, cfg);
  FeatureMatrix X;
  X.rows = static_cast<std::size_t>(t.width) * t.height;
  X.cols = static_cast<std::size_t>(t.channels());
  X.columns = t.layout;
  X.data = t.data;
  const auto prediction = forest.Predict(X);
  Raster corrected = frames.depth;
  for (int py = 0; py < t.height; ++py) {
    for (int px = 0; px < t.width; ++px) {
      if (frames.valid(px, py)) {
        corrected(px, py) += prediction[static_cast<std::size_t>(py) * t.width + px];
      }
    }
  }
  return corrected;
}

std::vector<std::string> CorrectDataset(const fs::path& frames_dir, const fs::path& model_path,
                                        const fs::path& out_dir, bool all_images, std::ostream* log) {
  const RegressionForest forest = LoadForest(ReadFileBytes(model_path));
  FeatureConfigForLayout(forest.layout);
  std::vector<std::string> stems = ListFrameStems(frames_dir);
  const fs::path split_path = SplitManifestPath(model_path);
  if (!all_images && fs::exists(split_path)) {
    const auto split = ReadSplitManifest(split_path);
    const std::set<std::string> test(split.test.begin(), split.test.end());
    std::erase_if(stems, [&](const std::string& s) { return !test.contains(s); });
  }
  EnsureDirectory(out_dir);
  for (const auto& stem : stems) {
    const FrameSet frames = ReadFrameSet(frames_dir / (stem + ".tfim"));
    WriteRaster(out_dir / (stem + ".tfim"), CorrectDepth(frames, forest));
    if (log) *log << "corrected " << stem << '\n';
  }
  return stems;
}

EvalReport EvaluateDataset(const fs::path& frames_dir, const fs::path& corrected_dir,
                           const fs::path& report_out, const EvalDatasetOptions& options) {
  const auto stems = ListStems(corrected_dir, ".tfim");
  if (stems.empty()) throw Error(ErrorCode::kInsufficientData, "no corrected rasters found");
  if (options.split_manifest) {
    const auto split = ReadSplitManifest(*options.split_manifest);
    const std::set<std::string> train(split.train.begin(), split.train.end());
    for (const auto& s : stems) {
      if (train.contains(s)) {
        throw Error(ErrorCode::kInvalidArgument, s + " is a training image and cannot be evaluated");
      }
    }
  }
  std::vector<FrameSet> frames;
  std::vector<Raster> corrected;
  for (const auto& s : stems) {
    frames.push_back(ReadFrameSet(frames_dir / (s + ".tfim")));
    corrected.push_back(ReadRaster(corrected_dir / (s + ".tfim")));
    if (!frames.back().depth.SameShape(corrected.back())) {
      throw Error(ErrorCode::kLayoutMismatch, s + ": corrected raster shape differs from frames");
    }
  }
  EvalOptions eval_options;
  eval_options.bins = options.bins;
  eval_options.scene_names = stems;
  EvalReport report = Evaluate(frames, corrected, eval_options);
  if (options.model) {
    const RegressionForest forest = LoadForest(ReadFileBytes(*options.model));
    AttachImportances(report, forest.layout, forest.importances);
  }
  if (report_out.has_parent_path()) EnsureDirectory(report_out.parent_path());
  WriteJson(report_out, ReportToJson(report));
  auto csv_path = report_out;
  csv_path.replace_extension(".csv");
  WriteText(csv_path, HistogramCsv(report));
  return report;
}

Profile GetProfile(const std::string& name) {
  Profile p;
  p.name = name;
  if (name == "desk") {
    p.scenes = 60;
    p.resolution = {100, 100};
    p.forest.n_trees = 30;
    p.forest.max_depth = 12;
    p.forest.min_samples_split = 200;
    p.train_images = 48;
  } else if (name == "full") {
    p.scenes = 319;
    p.resolution = {200, 200};
    p.forest.n_trees = 150;
    p.forest.max_depth = 15;
    p.forest.min_samples_split = 10'000;
    p.train_images = 300;
  } else {
    throw Error(ErrorCode::kInvalidArgument, "unknown profile '" + name + "'");
  }
  return p;
}

EvalReport RunPipeline(const RunOptions& options, const fs::path& out_dir, std::ostream* log) {
  const fs::path scenes = out_dir / "scenes";
  const fs::path frames = out_dir / "frames";
  const fs::path corrected = out_dir / "corrected";
  const fs::path model = out_dir / "model.tforest";

  GenOptions gen;
  gen.kind = DatasetKind::kSimple;
  gen.count = options.profile.scenes;
  gen.seed = options.seed;
  gen.resolution = options.profile.resolution;
  GenerateDataset(gen, scenes);

  ToFConfig tof = options.tof;
  tof.threads = options.threads;
  RenderDataset(scenes, frames, tof, log);

  TrainOptions train;
  train.forest = options.profile.forest;
  train.forest.seed = options.seed;
  train.forest.threads = options.threads;
  train.train_images = options.profile.train_images;
  train.features = options.features;
  TrainModel(frames, model, train, log);

  CorrectDataset(frames, model, corrected, false, log);

  EvalDatasetOptions eval;
  eval.split_manifest = SplitManifestPath(model);
  eval.model = model;
  return EvaluateDataset(frames, corrected, out_dir / "report.json", eval);
}

void ExportPly(const CornerScene& scene, const FrameSet& frames, const Raster* corrected,
               const fs::path& out_path) {
  frames.CheckShapes();
  if (frames.width() != scene.resolution.width || frames.height() != scene.resolution.height) {
    throw Error(ErrorCode::kDimensionMismatch, "frames do not match the scene resolution");
  }
  if (corrected && !corrected->SameShape(frames.depth)) {
    throw Error(ErrorCode::kDimensionMismatch, "corrected raster differs in shape");
  }
  const SceneGeometry geo = ComputeSceneGeometry(scene);
  struct Vertex {
    Eigen::Vector3d p;
    int tag;
  };
  std::vector<Vertex> vertices;
  for (int y = 0; y < frames.height(); ++y) {
    for (int x = 0; x < frames.width(); ++x) {
      if (!frames.valid(x, y)) continue;
      const Eigen::Vector3d dir = geo.PixelRay(x, y, scene.resolution, scene.fov);
      const Eigen::Vector3d& o = geo.camera.position;
      vertices.push_back({o + frames.depth(x, y) * dir, 0});
      vertices.push_back({o + frames.ground_truth(x, y) * dir, 1});
      if (corrected) vertices.push_back({o + (*corrected)(x, y) * dir, 2});
    }
  }
  std::ofstream out(out_path);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + out_path.string());
  out << "ply\nformat ascii 1.0\n"
      << "comment tag 0 = measured, 1 = ground_truth, 2 = corrected\n"
      << "element vertex " << vertices.size() << '\n'
      << "property double x\nproperty double y\nproperty double z\n"
      << "property uchar red\nproperty uchar green\nproperty uchar blue\n"
      << "property uchar tag\nend_header\n";
  out.precision(9);
  static constexpr int kColours[3][3] = {{255, 0, 0}, {0, 0, 255}, {0, 255, 0}};
  for (const auto& v : vertices) {
    const auto& c = kColours[v.tag];
    out << v.p.x() << ' ' << v.p.y() << ' ' << v.p.z() << ' ' << c[0] << ' ' << c[1] << ' '
        << c[2] << ' ' << v.tag << '\n';
  }
  if (!out) throw Error(ErrorCode::kIoError, "write failed for " + out_path.string());
}

}  // namespace tofmpi
