#include <algorithm>
#include <numeric>

#include "agitrack/learners.hpp"

namespace agitrack {

namespace {

struct TreeBuilder {
  const Matrix& X;
  const std::vector<int>& y;
  const std::vector<double>& sample_weight;
  int n_predictors;
  Rng& rng;
  std::vector<TreeNode> nodes;

  // scratch buffers reused across nodes
  std::vector<int> feature_pool;

  int build(std::vector<std::size_t>& idx) {
    double w_total = 0.0;
    double w_pos = 0.0;
    for (std::size_t i : idx) {
      w_total += sample_weight[i];
      w_pos += sample_weight[i] * static_cast<double>(y[i]);
    }
    const double p = w_pos / w_total;

    const auto make_leaf = [&](double value) {
      TreeNode leaf;
      leaf.value = value;
      nodes.push_back(leaf);
      return static_cast<int>(nodes.size()) - 1;
    };
    if (idx.size() < 2 || w_pos == 0.0 || w_pos == w_total) return make_leaf(p);

    // weighted Gini over a per-split random feature subset
    const double parent_impurity = 2.0 * p * (1.0 - p) * w_total;
    const auto n_features = static_cast<int>(X.cols);
    feature_pool.resize(static_cast<std::size_t>(n_features));
    std::iota(feature_pool.begin(), feature_pool.end(), 0);
    const int k = std::min(n_predictors, n_features);
    for (int j = 0; j < k; ++j) {
      const auto pick = static_cast<std::size_t>(
          rng.uniform_int(j, static_cast<std::int64_t>(n_features) - 1));
      std::swap(feature_pool[static_cast<std::size_t>(j)], feature_pool[pick]);
    }

    int best_feature = -1;
    double best_threshold = 0.0;
    double best_impurity = parent_impurity;
    std::vector<std::size_t> order;
    for (int j = 0; j < k; ++j) {
      const int feature = feature_pool[static_cast<std::size_t>(j)];
      order = idx;
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double va = X.at(a, static_cast<std::size_t>(feature));
        const double vb = X.at(b, static_cast<std::size_t>(feature));
        return va != vb ? va < vb : a < b;
      });
      double wl = 0.0;
      double wl_pos = 0.0;
      for (std::size_t r = 0; r + 1 < order.size(); ++r) {
        const std::size_t i = order[r];
        wl += sample_weight[i];
        wl_pos += sample_weight[i] * static_cast<double>(y[i]);
        const double v = X.at(i, static_cast<std::size_t>(feature));
        const double v_next = X.at(order[r + 1], static_cast<std::size_t>(feature));
        if (v == v_next) continue;
        const double wr = w_total - wl;
        const double wr_pos = w_pos - wl_pos;
        const double pl = wl_pos / wl;
        const double pr = wr_pos / wr;
        const double impurity = 2.0 * pl * (1.0 - pl) * wl + 2.0 * pr * (1.0 - pr) * wr;
        if (impurity < best_impurity - 1e-12) {
          best_impurity = impurity;
          best_feature = feature;
          best_threshold = 0.5 * (v + v_next);
        }
      }
    }
    if (best_feature < 0) return make_leaf(p);

    std::vector<std::size_t> left_idx;
    std::vector<std::size_t> right_idx;
    for (std::size_t i : idx)
      (X.at(i, static_cast<std::size_t>(best_feature)) <= best_threshold ? left_idx : right_idx)
          .push_back(i);
    if (left_idx.empty() || right_idx.empty()) return make_leaf(p);

    const int node_id = static_cast<int>(nodes.size());
    nodes.emplace_back();
    nodes[static_cast<std::size_t>(node_id)].feature = best_feature;
    nodes[static_cast<std::size_t>(node_id)].threshold = best_threshold;
    idx.clear();
    idx.shrink_to_fit();
    const int left = build(left_idx);
    const int right = build(right_idx);
    nodes[static_cast<std::size_t>(node_id)].left = left;
    nodes[static_cast<std::size_t>(node_id)].right = right;
    return node_id;
  }
};

}  // namespace

TrainedModel train_rf(const Matrix& X, const std::vector<int>& y, int n_trees,
                      int n_predictors, const CostMatrix& cost, std::uint64_t seed) {
  if (n_trees < 1) throw ValidationError("forest needs at least one tree");
  if (n_predictors < 1 || static_cast<std::size_t>(n_predictors) > X.cols)
    throw ValidationError("predictors per split must be in [1, feature count]");
  if (X.rows != y.size() || X.rows == 0) throw ValidationError("row/label count mismatch");

  std::vector<double> sample_weight(X.rows);
  for (std::size_t i = 0; i < X.rows; ++i)
    sample_weight[i] = y[i] == 1 ? cost.c_fn : cost.c_fp;

  RfModel forest;
  forest.trees.resize(static_cast<std::size_t>(n_trees));
  for (int t = 0; t < n_trees; ++t) {
    Rng rng(child_seed(seed, {0x5f0fca73ULL, static_cast<std::uint64_t>(t)}));
    std::vector<std::size_t> bootstrap(X.rows);
    for (auto& i : bootstrap)
      i = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(X.rows) - 1));
    TreeBuilder builder{X, y, sample_weight, n_predictors, rng, {}, {}};
    builder.build(bootstrap);
    forest.trees[static_cast<std::size_t>(t)].nodes = std::move(builder.nodes);
  }

  TrainedModel model;
  model.kind = LearnerKind::RF;
  model.impl = std::move(forest);
  return model;
}

}  // namespace agitrack
