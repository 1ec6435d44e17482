#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace tofmpi {

// Dense row-major N x F matrix. `columns` optionally names the features.
struct FeatureMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;
  std::vector<std::string> columns;

  FeatureMatrix() = default;
  FeatureMatrix(std::size_t n, std::size_t f) : rows(n), cols(f), data(n * f, 0.0) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }
};

struct ForestConfig {
  int n_trees = 150;
  int max_depth = 15;
  int min_samples_split = 10'000;
  // Features examined per node; 0 means all.
  int max_features = 0;
  bool bootstrap = true;
  std::uint64_t seed = 0;
  // Training workers; 0 = hardware concurrency. Does not affect the result.
  unsigned threads = 0;

  void Validate() const;
  bool operator==(const ForestConfig& o) const {
    return n_trees == o.n_trees && max_depth == o.max_depth &&
           min_samples_split == o.min_samples_split && max_features == o.max_features &&
           bootstrap == o.bootstrap && seed == o.seed;
  }
};

inline constexpr std::uint32_t kLeafNode = 0xFFFFFFFFu;

// Flat node: internal nodes send x[feature] <= value to `left`; leaves have
// feature == kLeafNode and carry the prediction in `value`.
struct TreeNode {
  std::uint32_t feature = kLeafNode;
  double value = 0.0;
  std::uint32_t left = 0;
  std::uint32_t right = 0;

  bool is_leaf() const { return feature == kLeafNode; }
  bool operator==(const TreeNode&) const = default;
};

struct RegressionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  double Predict(std::span<const double> x) const;
  int Depth() const;
};

struct RegressionForest {
  ForestConfig config;
  std::vector<std::string> layout;
  std::size_t feature_count = 0;
  std::vector<RegressionTree> trees;
  // Mean decrease in impurity, normalized to sum 1.
  std::vector<double> importances;

  double PredictOne(std::span<const double> x) const;
  // Throws kDimensionMismatch if X's width or named columns differ from the
  // training layout.
  std::vector<double> Predict(const FeatureMatrix& X) const;
};

// Bootstrap-aggregated exact-CART regression trees. Each node takes the
// (feature, midpoint threshold) maximizing weighted variance reduction; ties
// go to the lowest feature index, then the lowest threshold. Tree t uses the
// RNG seed DeriveSeed(cfg.seed, t), so the result does not depend on the
// number of threads.
// Throws kEmptyInput, kDimensionMismatch, kNonFiniteData.
RegressionForest TrainForest(const FeatureMatrix& X, std::span<const double> y,
                             const ForestConfig& cfg);

const std::vector<double>& FeatureImportance(const RegressionForest& forest);

// ".tforest" container, little-endian:
//   "TFOR" | u32 version | u32 header_bytes | header JSON (config, layout,
//   importances, feature_count) | u32 tree_count |
//   per tree: u32 node_count, per node: u32 feature (0xFFFFFFFF = leaf),
//   f64 threshold-or-value, u32 left, u32 right.
inline constexpr std::uint32_t kForestFormatVersion = 1;

std::vector<std::uint8_t> SaveForest(const RegressionForest& forest);
// Throws kBadMagic, kVersionMismatch, kTruncatedFile.
RegressionForest LoadForest(std::span<const std::uint8_t> bytes);

}  // namespace tofmpi
