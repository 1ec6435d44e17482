#include "tofmpi/forest.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>

#include "json.hpp"
#include "tofmpi/error.hpp"
#include "tofmpi/parallel.hpp"
#include "tofmpi/rng.hpp"

namespace tofmpi {

namespace {

constexpr double kPureTolerance = 1e-12;

// Per-feature row order sorted by value (ties by row index), with the
// values laid out contiguously in that order. Shared read-only by all trees;
// trees only keep bootstrap multiplicities and node assignments per row.
struct PresortedColumns {
  std::vector<std::vector<std::uint32_t>> order;
  std::vector<std::vector<double>> values;
};

PresortedColumns Presort(const FeatureMatrix& X, unsigned threads) {
  PresortedColumns p;
  p.order.resize(X.cols);
  p.values.resize(X.cols);
  ParallelFor(X.cols, threads, [&](std::size_t f) {
    auto& order = p.order[f];
    order.resize(X.rows);
    std::iota(order.begin(), order.end(), 0u);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::uint32_t a, std::uint32_t b) { return X(a, f) < X(b, f); });
    auto& values = p.values[f];
    values.resize(X.rows);
    for (std::size_t k = 0; k < X.rows; ++k) values[k] = X(order[k], f);
  });
  return p;
}

double Midpoint(double lo, double hi) {
  const double mid = lo + (hi - lo) / 2.0;
  return mid < hi ? mid : lo;
}

struct SlotStats {
  double weight = 0.0;
  double sum = 0.0;
  double min = std::numeric_limits<double>::infinity();
  double max = -std::numeric_limits<double>::infinity();
};

struct SlotSearch {
  // Running left-side accumulators for the feature being scanned.
  double weight_left = 0.0;
  double sum_left = 0.0;
  double prev = 0.0;
  bool has_prev = false;
  // Best candidate so far.
  double best_score = -std::numeric_limits<double>::infinity();
  std::uint32_t best_feature = kLeafNode;
  double best_threshold = 0.0;
};

struct TreeResult {
  RegressionTree tree;
  std::vector<double> importance;  // raw weighted SSE decrease per feature
};

TreeResult GrowTree(const FeatureMatrix& X, std::span<const double> y,
                    const PresortedColumns& sorted, const ForestConfig& cfg,
                    std::uint64_t tree_seed) {
  const std::size_t n = X.rows;
  const std::size_t n_features = X.cols;
  Rng rng(tree_seed);

  std::vector<std::uint32_t> counts(n, 1);
  if (cfg.bootstrap) {
    std::fill(counts.begin(), counts.end(), 0u);
    for (std::size_t i = 0; i < n; ++i) ++counts[rng.UniformIndex(n)];
  }

  // slot_of[r] is the row's node slot within the current level, -1 once the
  // row is out of bag or settled in a leaf. It is kept separate from the
  // (y, count) pairs so the sorted scans skip inactive rows cheaply.
  struct Target {
    double y;
    double count;
  };
  std::vector<std::int32_t> slot_of(n);
  std::vector<Target> targets(n);
  for (std::size_t r = 0; r < n; ++r) {
    slot_of[r] = counts[r] > 0 ? 0 : -1;
    targets[r] = {y[r], static_cast<double>(counts[r])};
  }
  counts = {};

  TreeResult result;
  result.importance.assign(n_features, 0.0);
  auto& nodes = result.tree.nodes;
  nodes.emplace_back();
  std::vector<std::uint32_t> level_nodes = {0};  // slot -> node id

  const std::size_t features_per_node =
      cfg.max_features > 0 ? std::min<std::size_t>(cfg.max_features, n_features) : n_features;

  for (int depth = 0; !level_nodes.empty(); ++depth) {
    const std::size_t slots = level_nodes.size();
    std::vector<SlotStats> stats(slots);
    for (std::size_t r = 0; r < n; ++r) {
      if (slot_of[r] < 0) continue;
      const Target& row = targets[r];
      auto& st = stats[slot_of[r]];
      st.weight += row.count;
      st.sum += row.count * row.y;
      st.min = std::min(st.min, row.y);
      st.max = std::max(st.max, row.y);
    }

    std::vector<std::uint8_t> splittable(slots, 0);
    bool any_splittable = false;
    for (std::size_t s = 0; s < slots; ++s) {
      const auto& st = stats[s];
      nodes[level_nodes[s]].value = st.sum / st.weight;
      if (depth < cfg.max_depth && st.weight >= cfg.min_samples_split &&
          st.max - st.min > kPureTolerance) {
        splittable[s] = 1;
        any_splittable = true;
      }
    }

    // Rows of nodes that became leaves take no further part.
    for (auto& s : slot_of) {
      if (s >= 0 && !splittable[s]) s = -1;
    }

    std::vector<SlotSearch> search(slots);
    if (any_splittable) {
      std::vector<std::uint8_t> allowed;
      if (features_per_node < n_features) {
        allowed.assign(slots * n_features, 0);
        for (std::size_t s = 0; s < slots; ++s) {
          if (!splittable[s]) continue;
          const auto perm = rng.Permutation(static_cast<std::uint32_t>(n_features));
          for (std::size_t k = 0; k < features_per_node; ++k) allowed[s * n_features + perm[k]] = 1;
        }
      }

      for (std::size_t f = 0; f < n_features; ++f) {
        for (std::size_t s = 0; s < slots; ++s) {
          search[s].weight_left = 0.0;
          search[s].sum_left = 0.0;
          search[s].has_prev = false;
        }
        const auto& order = sorted.order[f];
        const auto& values = sorted.values[f];
        for (std::size_t k = 0; k < n; ++k) {
          const std::uint32_t r = order[k];
          const std::int32_t s = slot_of[r];
          if (s < 0) continue;
          if (!allowed.empty() && !allowed[s * n_features + f]) continue;
          auto& ss = search[s];
          const double v = values[k];
          if (ss.has_prev && v > ss.prev) {
            const auto& st = stats[s];
            const double weight_right = st.weight - ss.weight_left;
            const double sum_right = st.sum - ss.sum_left;
            const double score = ss.sum_left * ss.sum_left / ss.weight_left +
                                 sum_right * sum_right / weight_right;
            if (score > ss.best_score) {
              ss.best_score = score;
              ss.best_feature = static_cast<std::uint32_t>(f);
              ss.best_threshold = Midpoint(ss.prev, v);
            }
          }
          const Target& row = targets[r];
          ss.weight_left += row.count;
          ss.sum_left += row.count * row.y;
          ss.prev = v;
          ss.has_prev = true;
        }
      }
    }

    // Materialize splits and assign the next level's slots.
    std::vector<std::uint32_t> next_nodes;
    std::vector<std::int32_t> left_slot(slots, -1);
    for (std::size_t s = 0; s < slots; ++s) {
      if (!splittable[s] || search[s].best_feature == kLeafNode) continue;
      const auto& st = stats[s];
      const double decrease = search[s].best_score - st.sum * st.sum / st.weight;
      if (!(decrease > 0.0)) continue;
      const std::uint32_t id = level_nodes[s];
      const auto left = static_cast<std::uint32_t>(nodes.size());
      nodes.emplace_back();
      nodes.emplace_back();
      nodes[id].feature = search[s].best_feature;
      nodes[id].value = search[s].best_threshold;
      nodes[id].left = left;
      nodes[id].right = left + 1;
      result.importance[search[s].best_feature] += decrease;
      left_slot[s] = static_cast<std::int32_t>(next_nodes.size());
      next_nodes.push_back(left);
      next_nodes.push_back(left + 1);
    }
    for (std::size_t r = 0; r < n; ++r) {
      const std::int32_t s = slot_of[r];
      if (s < 0) continue;
      if (left_slot[s] < 0) {
        slot_of[r] = -1;
        continue;
      }
      const TreeNode& node = nodes[level_nodes[s]];
      slot_of[r] = X(r, node.feature) <= node.value ? left_slot[s] : left_slot[s] + 1;
    }
    level_nodes = std::move(next_nodes);
  }
  return result;
}

// --- little-endian serialization helpers -----------------------------------

void PutU32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void PutF64(std::vector<std::uint8_t>& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> b) : b_(b) {}

  void Need(std::size_t n) const {
    if (b_.size() - pos_ < n) throw Error(ErrorCode::kTruncatedFile, "forest file is truncated");
  }
  std::uint32_t U32() {
    Need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  double F64() {
    Need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return std::bit_cast<double>(v);
  }
  std::span<const std::uint8_t> Take(std::size_t n) {
    Need(n);
    auto s = b_.subspan(pos_, n);
    pos_ += n;
    return s;
  }

 private:
  std::span<const std::uint8_t> b_;
  std::size_t pos_ = 0;
};

nlohmann::json ConfigToJson(const ForestConfig& c) {
  return {{"n_trees", c.n_trees},
          {"max_depth", c.max_depth},
          {"min_samples_split", c.min_samples_split},
          {"max_features", c.max_features},
          {"bootstrap", c.bootstrap},
          {"seed", c.seed}};
}

ForestConfig ConfigFromJson(const nlohmann::json& j) {
  ForestConfig c;
  c.n_trees = j.at("n_trees").get<int>();
  c.max_depth = j.at("max_depth").get<int>();
  c.min_samples_split = j.at("min_samples_split").get<int>();
  c.max_features = j.at("max_features").get<int>();
  c.bootstrap = j.at("bootstrap").get<bool>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

}  // namespace

void ForestConfig::Validate() const {
  if (n_trees < 1) throw Error(ErrorCode::kInvalidArgument, "n_trees must be >= 1");
  if (max_depth < 1) throw Error(ErrorCode::kInvalidArgument, "max_depth must be >= 1");
  if (min_samples_split < 2) throw Error(ErrorCode::kInvalidArgument, "min_samples_split must be >= 2");
  if (max_features < 0) throw Error(ErrorCode::kInvalidArgument, "max_features must be >= 0");
}

double RegressionTree::Predict(std::span<const double> x) const {
  std::uint32_t id = 0;
  while (!nodes[id].is_leaf()) {
    const TreeNode& node = nodes[id];
    id = x[node.feature] <= node.value ? node.left : node.right;
  }
  return nodes[id].value;
}

int RegressionTree::Depth() const {
  if (nodes.empty()) return 0;
  std::vector<int> depth(nodes.size(), 0);
  int max_depth = 0;
  // Children are always appended after their parent.
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].is_leaf()) continue;
    depth[nodes[i].left] = depth[nodes[i].right] = depth[i] + 1;
    max_depth = std::max(max_depth, depth[i] + 1);
  }
  return max_depth;
}

double RegressionForest::PredictOne(std::span<const double> x) const {
  double sum = 0.0;
  for (const auto& tree : trees) sum += tree.Predict(x);
  return sum / static_cast<double>(trees.size());
}

std::vector<double> RegressionForest::Predict(const FeatureMatrix& X) const {
  if (X.cols != feature_count) {
    throw Error(ErrorCode::kDimensionMismatch, "expected " + std::to_string(feature_count) +
                                                   " features, got " + std::to_string(X.cols));
  }
  if (!X.columns.empty() && !layout.empty() && X.columns != layout) {
    throw Error(ErrorCode::kDimensionMismatch, "feature layout differs from the training layout");
  }
  std::vector<double> out(X.rows);
  constexpr std::size_t kChunk = 4096;
  const std::size_t chunks = (X.rows + kChunk - 1) / kChunk;
  ParallelFor(chunks, config.threads, [&](std::size_t c) {
    const std::size_t end = std::min(X.rows, (c + 1) * kChunk);
    for (std::size_t r = c * kChunk; r < end; ++r) out[r] = PredictOne(X.row(r));
  });
  return out;
}

RegressionForest TrainForest(const FeatureMatrix& X, std::span<const double> y,
                             const ForestConfig& cfg) {
  cfg.Validate();
  if (X.rows == 0 || X.cols == 0) throw Error(ErrorCode::kEmptyInput, "empty training matrix");
  if (y.size() != X.rows || X.data.size() != X.rows * X.cols) {
    throw Error(ErrorCode::kDimensionMismatch, "target length differs from row count");
  }
  if (!X.columns.empty() && X.columns.size() != X.cols) {
    throw Error(ErrorCode::kDimensionMismatch, "column names differ from column count");
  }
  if (X.rows > std::numeric_limits<std::int32_t>::max()) {
    throw Error(ErrorCode::kInvalidArgument, "too many training rows");
  }
  for (double v : X.data)
    if (!std::isfinite(v)) throw Error(ErrorCode::kNonFiniteData, "non-finite feature value");
  for (double v : y)
    if (!std::isfinite(v)) throw Error(ErrorCode::kNonFiniteData, "non-finite target value");

  const PresortedColumns sorted = Presort(X, cfg.threads);

  std::vector<TreeResult> grown(cfg.n_trees);
  ParallelFor(grown.size(), cfg.threads, [&](std::size_t t) {
    grown[t] = GrowTree(X, y, sorted, cfg, DeriveSeed(cfg.seed, t));
  });

  RegressionForest forest;
  forest.config = cfg;
  forest.layout = X.columns;
  forest.feature_count = X.cols;
  forest.importances.assign(X.cols, 0.0);
  for (auto& g : grown) {
    const double total = std::accumulate(g.importance.begin(), g.importance.end(), 0.0);
    if (total > 0.0) {
      for (std::size_t f = 0; f < X.cols; ++f) forest.importances[f] += g.importance[f] / total;
    }
    forest.trees.push_back(std::move(g.tree));
  }
  const double total = std::accumulate(forest.importances.begin(), forest.importances.end(), 0.0);
  for (double& v : forest.importances) {
    v = total > 0.0 ? v / total : 1.0 / static_cast<double>(X.cols);
  }
  return forest;
}

const std::vector<double>& FeatureImportance(const RegressionForest& forest) {
  return forest.importances;
}

std::vector<std::uint8_t> SaveForest(const RegressionForest& forest) {
  const nlohmann::json header = {{"format", "tforest"},
                                 {"version", kForestFormatVersion},
                                 {"config", ConfigToJson(forest.config)},
                                 {"feature_count", forest.feature_count},
                                 {"layout", forest.layout},
                                 {"importances", forest.importances}};
  const std::string text = header.dump();
  std::vector<std::uint8_t> out = {'T', 'F', 'O', 'R'};
  PutU32(out, kForestFormatVersion);
  PutU32(out, static_cast<std::uint32_t>(text.size()));
  out.insert(out.end(), text.begin(), text.end());
  PutU32(out, static_cast<std::uint32_t>(forest.trees.size()));
  for (const auto& tree : forest.trees) {
    PutU32(out, static_cast<std::uint32_t>(tree.nodes.size()));
    for (const auto& node : tree.nodes) {
      PutU32(out, node.feature);
      PutF64(out, node.value);
      PutU32(out, node.left);
      PutU32(out, node.right);
    }
  }
  return out;
}

RegressionForest LoadForest(std::span<const std::uint8_t> bytes) {
  Reader in(bytes);
  const auto magic = in.Take(4);
  if (std::memcmp(magic.data(), "TFOR", 4) != 0) {
    throw Error(ErrorCode::kBadMagic, "not a .tforest file");
  }
  const std::uint32_t version = in.U32();
  if (version != kForestFormatVersion) {
    throw Error(ErrorCode::kVersionMismatch, "unsupported forest version " + std::to_string(version));
  }
  const auto header_bytes = in.Take(in.U32());
  RegressionForest forest;
  try {
    const auto header = nlohmann::json::parse(header_bytes.begin(), header_bytes.end());
    forest.config = ConfigFromJson(header.at("config"));
    forest.feature_count = header.at("feature_count").get<std::size_t>();
    forest.layout = header.at("layout").get<std::vector<std::string>>();
    forest.importances = header.at("importances").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kTruncatedFile, std::string("bad forest header: ") + e.what());
  }

  const std::uint32_t tree_count = in.U32();
  forest.trees.resize(tree_count);
  for (auto& tree : forest.trees) {
    const std::uint32_t node_count = in.U32();
    if (node_count == 0) throw Error(ErrorCode::kTruncatedFile, "tree without nodes");
    in.Need(static_cast<std::size_t>(node_count) * 20);
    tree.nodes.resize(node_count);
    for (auto& node : tree.nodes) {
      node.feature = in.U32();
      node.value = in.F64();
      node.left = in.U32();
      node.right = in.U32();
    }
    for (std::uint32_t i = 0; i < node_count; ++i) {
      const TreeNode& node = tree.nodes[i];
      // Children always follow their parent, which also rules out cycles.
      if (!node.is_leaf() &&
          (node.feature >= forest.feature_count || node.left <= i || node.right <= i ||
           node.left >= node_count || node.right >= node_count)) {
        throw Error(ErrorCode::kTruncatedFile, "forest node references out of range");
      }
    }
  }
  if (forest.trees.empty()) throw Error(ErrorCode::kTruncatedFile, "forest has no trees");
  return forest;
}

}  // namespace tofmpi
