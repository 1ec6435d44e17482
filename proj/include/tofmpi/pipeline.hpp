#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "tofmpi/eval.hpp"
#include "tofmpi/features.hpp"
#include "tofmpi/forest.hpp"
#include "tofmpi/scene.hpp"
#include "tofmpi/tofsim.hpp"

namespace tofmpi {

namespace fs = std::filesystem;

enum class DatasetKind { kSimple, kChallenging2, kChallenging3 };

std::string DatasetKindName(DatasetKind kind);
DatasetKind ParseDatasetKind(const std::string& name);

// File stem of scene i: scene_%06d.
std::string SceneStem(std::size_t index);

struct GenOptions {
  DatasetKind kind = DatasetKind::kSimple;
  int count = 1000;
  std::uint64_t seed = 0;
  Resolution resolution;
  double fov = kDefaultFov;
};

// Writes scene_%06d.json for each scene plus dataset.json. Scene i is drawn
// with seed DeriveSeed(options.seed, i). Throws kInvalidCount, kIoError.
void GenerateDataset(const GenOptions& options, const fs::path& out_dir);

struct RenderSummary {
  std::vector<std::string> rendered;
  std::vector<std::string> skipped;
};

// Renders every scene manifest in scene_dir into out_dir/<stem>.tfim/.tfmk.
// Degenerate scenes are skipped and listed in out_dir/skipped.json.
RenderSummary RenderDataset(const fs::path& scene_dir, const fs::path& out_dir,
                            const ToFConfig& cfg, std::ostream* log = nullptr);

struct TrainOptions {
  ForestConfig forest;
  int train_images = 300;
  // Fraction of valid pixels drawn per training image.
  double pixel_fraction = 1.0;
  FeatureConfig features;
};

struct TrainSummary {
  std::size_t rows = 0;
  std::size_t features = 0;
  std::vector<std::string> train;
  std::vector<std::string> test;
  std::vector<double> importances;
  std::vector<std::string> layout;
};

// Stems of all frame sets (<stem>.tfim with a .tfmk sidecar), sorted.
std::vector<std::string> ListFrameStems(const fs::path& frames_dir);

// Per-pixel training rows for one frame set: features of valid pixels with
// target ground_truth - depth. fraction < 1 keeps a seeded Bernoulli subset.
void AppendTrainingRows(const FrameSet& frames, const FeatureConfig& cfg, double fraction,
                        std::uint64_t sample_seed, FeatureMatrix& X, std::vector<double>& y);

// Splits the frame sets, trains on train_images of them and writes the
// model plus <model_out>.split.json. Throws kInsufficientData, kIoError.
TrainSummary TrainModel(const fs::path& frames_dir, const fs::path& model_out,
                        const TrainOptions& options, std::ostream* log = nullptr);

fs::path SplitManifestPath(const fs::path& model_path);

struct SplitManifest {
  std::vector<std::string> train;
  std::vector<std::string> test;
};
SplitManifest ReadSplitManifest(const fs::path& path);

// Feature configuration whose layout equals `layout`; throws kLayoutMismatch.
FeatureConfig FeatureConfigForLayout(const std::vector<std::string>& layout);

// D_C = D + prediction on valid pixels; invalid pixels keep D.
Raster CorrectDepth(const FrameSet& frames, const RegressionForest& forest);

// Corrects the held-out frame sets listed in the model's split manifest (all
// frame sets when all_images is set or no manifest exists).
std::vector<std::string> CorrectDataset(const fs::path& frames_dir, const fs::path& model_path,
                                        const fs::path& out_dir, bool all_images = false,
                                        std::ostream* log = nullptr);

struct EvalDatasetOptions {
  std::optional<fs::path> split_manifest;
  std::optional<fs::path> model;
  int bins = 100;
};

// Evaluates every corrected raster in corrected_dir against frames_dir and
// writes the JSON report and a histogram CSV next to it (<report>.csv).
// Refuses frame sets listed as training images in the split manifest.
// Throws kLayoutMismatch on shape disagreement, kInvalidArgument for
// training images.
EvalReport EvaluateDataset(const fs::path& frames_dir, const fs::path& corrected_dir,
                           const fs::path& report_out, const EvalDatasetOptions& options = {});

struct Profile {
  std::string name;
  int scenes = 0;
  Resolution resolution;
  ForestConfig forest;
  int train_images = 0;
};

// "desk": 60 scenes at 100x100, 30 trees, depth 12, min split 200, 48/12.
// "full": 319 scenes at 200x200, 150 trees, depth 15, min split 10000, 300/19.
Profile GetProfile(const std::string& name);

struct RunOptions {
  Profile profile = GetProfile("desk");
  std::uint64_t seed = 0;
  ToFConfig tof;
  FeatureConfig features;
  unsigned threads = 0;
};

// gen -> render -> train -> correct -> eval under out_dir.
EvalReport RunPipeline(const RunOptions& options, const fs::path& out_dir,
                       std::ostream* log = nullptr);

// ASCII PLY with measured, ground-truth and corrected points of the valid
// pixels; vertex property `tag` is 0 / 1 / 2 and colours are red / blue /
// green respectively.
void ExportPly(const CornerScene& scene, const FrameSet& frames, const Raster* corrected,
               const fs::path& out_path);

}  // namespace tofmpi
