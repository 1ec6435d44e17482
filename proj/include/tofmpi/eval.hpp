#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "tofmpi/raster.hpp"
#include "tofmpi/tofsim.hpp"

namespace tofmpi {

// |d_gt - d| / |d_gt|. Throws kDivisionByZeroGroundTruth for d_gt == 0.
double Rpe(double d_gt, double d);

// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void Add(double v);
  double Value() const { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

struct SceneStats {
  std::string name;
  std::size_t n_pixels = 0;
  double mean_before = 0.0;
  double var_before = 0.0;
  double mean_after = 0.0;
  double var_after = 0.0;
};

struct EvalReport {
  double mean_rpe_before = 0.0;
  double mean_rpe_after = 0.0;
  // Population variances.
  double var_rpe_before = 0.0;
  double var_rpe_after = 0.0;
  // Fixed bins over [0, hist_max]; larger values land in the last bin.
  double hist_max = 1.0;
  std::vector<std::uint64_t> histogram_before;
  std::vector<std::uint64_t> histogram_after;
  std::size_t n_pixels = 0;
  std::vector<SceneStats> per_scene;
  std::vector<std::pair<std::string, double>> importances_top;
};

struct EvalOptions {
  int bins = 100;
  double hist_max = 1.0;
  // Optional scene names, aligned with the frame list.
  std::vector<std::string> scene_names;
};

// RPE before (measured depth) and after (corrected depth) over every pixel
// that is valid and has non-zero ground truth.
// Throws kDimensionMismatch when lists or raster shapes disagree.
EvalReport Evaluate(std::span<const FrameSet> frames, std::span<const Raster> corrected,
                    const EvalOptions& options = {});

// Fills importances_top with (name, value) sorted by decreasing value
// (stable for ties); top_k == 0 keeps all.
void AttachImportances(EvalReport& report, const std::vector<std::string>& layout,
                       const std::vector<double>& importances, std::size_t top_k = 0);

nlohmann::json ReportToJson(const EvalReport& report);
// CSV rows: bin_lo,bin_hi,count_before,count_after
std::string HistogramCsv(const EvalReport& report);

}  // namespace tofmpi
