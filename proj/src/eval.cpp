#include "tofmpi/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "tofmpi/error.hpp"

namespace tofmpi {

namespace {

std::size_t BinOf(double v, int bins, double hist_max) {
  const double scaled = v / hist_max * bins;
  if (!(scaled < bins)) return static_cast<std::size_t>(bins - 1);
  return static_cast<std::size_t>(std::max(0.0, std::floor(scaled)));
}

// Per-pixel errors of one scene, before and after correction.
struct SceneErrors {
  std::vector<double> before;
  std::vector<double> after;
};

std::pair<double, double> MeanAndVariance(std::span<const double> values) {
  if (values.empty()) return {0.0, 0.0};
  CompensatedSum sum;
  for (double v : values) sum.Add(v);
  const double mean = sum.Value() / static_cast<double>(values.size());
  CompensatedSum sq;
  for (double v : values) sq.Add((v - mean) * (v - mean));
  return {mean, sq.Value() / static_cast<double>(values.size())};
}

}  // namespace

double Rpe(double d_gt, double d) {
  if (d_gt == 0.0) {
    throw Error(ErrorCode::kDivisionByZeroGroundTruth, "ground truth depth is zero");
  }
  return std::abs(d_gt - d) / std::abs(d_gt);
}

void CompensatedSum::Add(double v) {
  const double t = sum_ + v;
  if (std::abs(sum_) >= std::abs(v)) {
    compensation_ += (sum_ - t) + v;
  } else {
    compensation_ += (v - t) + sum_;
  }
  sum_ = t;
}

EvalReport Evaluate(std::span<const FrameSet> frames, std::span<const Raster> corrected,
                    const EvalOptions& options) {
  if (frames.size() != corrected.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "frame and corrected lists differ in length");
  }
  if (options.bins < 1 || !(options.hist_max > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "histogram needs at least one bin and a positive range");
  }
  if (!options.scene_names.empty() && options.scene_names.size() != frames.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "scene names differ in length from frames");
  }

  EvalReport report;
  report.hist_max = options.hist_max;
  report.histogram_before.assign(options.bins, 0);
  report.histogram_after.assign(options.bins, 0);

  std::vector<SceneErrors> scenes(frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const FrameSet& f = frames[i];
    f.CheckShapes();
    if (!f.depth.SameShape(corrected[i])) {
      throw Error(ErrorCode::kDimensionMismatch, "corrected raster differs in shape from frames");
    }
    for (int y = 0; y < f.height(); ++y) {
      for (int x = 0; x < f.width(); ++x) {
        const double gt = f.ground_truth(x, y);
        if (!f.valid(x, y) || gt == 0.0) continue;
        scenes[i].before.push_back(Rpe(gt, f.depth(x, y)));
        scenes[i].after.push_back(Rpe(gt, corrected[i](x, y)));
      }
    }
  }

  std::vector<double> all_before;
  std::vector<double> all_after;
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    const auto& s = scenes[i];
    SceneStats stats;
    stats.name = options.scene_names.empty() ? std::to_string(i) : options.scene_names[i];
    stats.n_pixels = s.before.size();
    std::tie(stats.mean_before, stats.var_before) = MeanAndVariance(s.before);
    std::tie(stats.mean_after, stats.var_after) = MeanAndVariance(s.after);
    report.per_scene.push_back(stats);
    all_before.insert(all_before.end(), s.before.begin(), s.before.end());
    all_after.insert(all_after.end(), s.after.begin(), s.after.end());
  }
  if (all_before.empty()) throw Error(ErrorCode::kEmptyInput, "no valid pixels to evaluate");

  report.n_pixels = all_before.size();
  std::tie(report.mean_rpe_before, report.var_rpe_before) = MeanAndVariance(all_before);
  std::tie(report.mean_rpe_after, report.var_rpe_after) = MeanAndVariance(all_after);
  for (double v : all_before) ++report.histogram_before[BinOf(v, options.bins, options.hist_max)];
  for (double v : all_after) ++report.histogram_after[BinOf(v, options.bins, options.hist_max)];
  return report;
}

void AttachImportances(EvalReport& report, const std::vector<std::string>& layout,
                       const std::vector<double>& importances, std::size_t top_k) {
  if (layout.size() != importances.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "layout and importances differ in length");
  }
  std::vector<std::size_t> idx(layout.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return importances[a] > importances[b]; });
  if (top_k > 0 && top_k < idx.size()) idx.resize(top_k);
  report.importances_top.clear();
  for (std::size_t i : idx) report.importances_top.emplace_back(layout[i], importances[i]);
}

nlohmann::json ReportToJson(const EvalReport& report) {
  nlohmann::json per_scene = nlohmann::json::array();
  for (const auto& s : report.per_scene) {
    per_scene.push_back({{"name", s.name},
                         {"n_pixels", s.n_pixels},
                         {"mean_before", s.mean_before},
                         {"var_before", s.var_before},
                         {"mean_after", s.mean_after},
                         {"var_after", s.var_after}});
  }
  nlohmann::json importances = nlohmann::json::array();
  for (const auto& [name, value] : report.importances_top) {
    importances.push_back({{"name", name}, {"value", value}});
  }
  return {{"mean_rpe_before", report.mean_rpe_before},
          {"mean_rpe_after", report.mean_rpe_after},
          {"var_rpe_before", report.var_rpe_before},
          {"var_rpe_after", report.var_rpe_after},
          {"n_pixels", report.n_pixels},
          {"histogram",
           {{"bins", report.histogram_before.size()},
            {"range", {0.0, report.hist_max}},
            {"before", report.histogram_before},
            {"after", report.histogram_after}}},
          {"per_scene", per_scene},
          {"importances_top", importances}};
}

std::string HistogramCsv(const EvalReport& report) {
  std::ostringstream out;
  out.precision(17);
  out << "bin_lo,bin_hi,count_before,count_after\n";
  const std::size_t bins = report.histogram_before.size();
  for (std::size_t b = 0; b < bins; ++b) {
    out << report.hist_max * b / bins << ',' << report.hist_max * (b + 1) / bins << ','
        << report.histogram_before[b] << ',' << report.histogram_after[b] << '\n';
  }
  return out.str();
}

}  // namespace tofmpi
