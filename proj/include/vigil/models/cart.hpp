#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "vigil/models/estimator.hpp"
#include "vigil/rng.hpp"

namespace vigil {

// Axis-aligned binary tree. Leaves have feature = -1 and carry the prediction
// (majority class index or mean target). Rows with x[feature] < threshold
// descend left.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;
};

struct Tree {
  std::vector<TreeNode> nodes;

  double predict_row(const Eigen::RowVectorXd& row) const {
    int at = 0;
    while (nodes[static_cast<std::size_t>(at)].feature >= 0) {
      const TreeNode& node = nodes[static_cast<std::size_t>(at)];
      at = row[node.feature] < node.threshold ? node.left : node.right;
    }
    return nodes[static_cast<std::size_t>(at)].value;
  }

  int depth() const { return node_depth(0); }

 private:
  int node_depth(int at) const {
    const TreeNode& node = nodes[static_cast<std::size_t>(at)];
    if (node.feature < 0) return 0;
    return 1 + std::max(node_depth(node.left), node_depth(node.right));
  }
};

struct CartParams {
  int max_depth = 0;  // 0 = unlimited
  int min_leaf = 1;
};

namespace detail {

// Candidate features for one split. The default considers every feature; the
// forest substitutes per-split random subsets.
using FeatureSampler = std::vector<int> (*)(int n_features, int mtry, Rng* rng);

inline std::vector<int> all_features(int n_features, int /*mtry*/, Rng* /*rng*/) {
  std::vector<int> features(static_cast<std::size_t>(n_features));
  for (int f = 0; f < n_features; ++f) features[static_cast<std::size_t>(f)] = f;
  return features;
}

// Partial Fisher-Yates draw of `mtry` distinct features, returned in
// ascending order so the split scan below visits candidates deterministically
// given the draw.
inline std::vector<int> random_features(int n_features, int mtry, Rng* rng) {
  std::vector<int> pool(static_cast<std::size_t>(n_features));
  for (int f = 0; f < n_features; ++f) pool[static_cast<std::size_t>(f)] = f;
  for (int i = 0; i < mtry; ++i) {
    const auto j = static_cast<std::size_t>(
        i + static_cast<int>(rng->uniform_below(static_cast<std::uint64_t>(n_features - i))));
    std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
  }
  pool.resize(static_cast<std::size_t>(mtry));
  std::sort(pool.begin(), pool.end());
  return pool;
}

struct SplitChoice {
  bool found = false;
  int feature = -1;
  double threshold = 0.0;
  double decrease = -1.0;
};

// Impurity for a candidate split position (Gini for classification, variance
// for regression), computed from prefix statistics in one sorted pass.
class CartBuilder {
 public:
  CartBuilder(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, Task task, CartParams params,
              int mtry, FeatureSampler sampler, Rng* rng)
      : x_(x), y_(y), task_(task), params_(params), mtry_(mtry), sampler_(sampler), rng_(rng) {}

  Tree build(std::vector<Eigen::Index> rows) {
    Tree tree;
    grow(tree, std::move(rows), 0);
    return tree;
  }

 private:
  int grow(Tree& tree, std::vector<Eigen::Index> rows, int depth) {
    const auto node_index = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    tree.nodes.back().value = leaf_value(rows);

    const bool depth_allows = params_.max_depth == 0 || depth < params_.max_depth;
    if (!depth_allows || static_cast<int>(rows.size()) < 2 * params_.min_leaf || is_pure(rows))
      return node_index;

    const SplitChoice split = best_split(rows);
    if (!split.found) return node_index;

    std::vector<Eigen::Index> left, right;
    left.reserve(rows.size());
    right.reserve(rows.size());
    for (const Eigen::Index r : rows)
      (x_(r, split.feature) < split.threshold ? left : right).push_back(r);
    rows.clear();
    rows.shrink_to_fit();

    tree.nodes[static_cast<std::size_t>(node_index)].feature = split.feature;
    tree.nodes[static_cast<std::size_t>(node_index)].threshold = split.threshold;
    const int left_index = grow(tree, std::move(left), depth + 1);
    tree.nodes[static_cast<std::size_t>(node_index)].left = left_index;
    const int right_index = grow(tree, std::move(right), depth + 1);
    tree.nodes[static_cast<std::size_t>(node_index)].right = right_index;
    return node_index;
  }

  bool is_pure(const std::vector<Eigen::Index>& rows) const {
    for (std::size_t i = 1; i < rows.size(); ++i)
      if (y_[rows[i]] != y_[rows[0]]) return false;
    return true;
  }

  double leaf_value(const std::vector<Eigen::Index>& rows) const {
    if (task_ == Task::Regression) {
      double sum = 0.0;
      for (const Eigen::Index r : rows) sum += y_[r];
      return sum / static_cast<double>(rows.size());
    }
    int counts[3] = {0, 0, 0};
    for (const Eigen::Index r : rows) ++counts[static_cast<int>(y_[r])];
    int best = 0;
    for (int c = 1; c < 3; ++c)
      if (counts[c] > counts[best]) best = c;
    return static_cast<double>(best);
  }

  // Best (feature, threshold) over the candidate features. Thresholds are
  // midpoints between consecutive distinct sorted values; the impurity
  // decrease is maximized with ties going to the lower feature index, then
  // the lower threshold. An impure node splits even at zero decrease, which
  // is what lets patterns like XOR resolve at depth 2.
  SplitChoice best_split(const std::vector<Eigen::Index>& rows) const {
    const auto features = sampler_(static_cast<int>(x_.cols()), mtry_, rng_);
    const auto n = static_cast<double>(rows.size());
    SplitChoice best;

    std::vector<std::pair<double, double>> values(rows.size());  // (x, y)
    for (const int f : features) {
      for (std::size_t i = 0; i < rows.size(); ++i)
        values[i] = {x_(rows[i], f), y_[rows[i]]};
      std::sort(values.begin(), values.end());
      if (values.front().first == values.back().first) continue;

      if (task_ == Task::Classification) {
        int left_counts[3] = {0, 0, 0};
        int total_counts[3] = {0, 0, 0};
        for (const auto& [xv, yv] : values) ++total_counts[static_cast<int>(yv)];
        const double parent = gini(total_counts, rows.size());
        for (std::size_t i = 0; i + 1 < values.size(); ++i) {
          ++left_counts[static_cast<int>(values[i].second)];
          if (values[i].first == values[i + 1].first) continue;
          const auto n_left = i + 1;
          const auto n_right = values.size() - n_left;
          if (static_cast<int>(n_left) < params_.min_leaf ||
              static_cast<int>(n_right) < params_.min_leaf)
            continue;
          int right_counts[3];
          for (int c = 0; c < 3; ++c) right_counts[c] = total_counts[c] - left_counts[c];
          const double decrease = parent -
                                  (n_left / n) * gini(left_counts, n_left) -
                                  (n_right / n) * gini(right_counts, n_right);
          consider(best, f, midpoint(values[i].first, values[i + 1].first), decrease);
        }
      } else {
        double total_sum = 0.0, total_sq = 0.0;
        for (const auto& [xv, yv] : values) {
          total_sum += yv;
          total_sq += yv * yv;
        }
        const double parent = variance(total_sum, total_sq, rows.size());
        double left_sum = 0.0, left_sq = 0.0;
        for (std::size_t i = 0; i + 1 < values.size(); ++i) {
          left_sum += values[i].second;
          left_sq += values[i].second * values[i].second;
          if (values[i].first == values[i + 1].first) continue;
          const auto n_left = i + 1;
          const auto n_right = values.size() - n_left;
          if (static_cast<int>(n_left) < params_.min_leaf ||
              static_cast<int>(n_right) < params_.min_leaf)
            continue;
          const double decrease =
              parent - (n_left / n) * variance(left_sum, left_sq, n_left) -
              (n_right / n) * variance(total_sum - left_sum, total_sq - left_sq, n_right);
          consider(best, f, midpoint(values[i].first, values[i + 1].first), decrease);
        }
      }
    }
    return best;
  }

  static void consider(SplitChoice& best, int feature, double threshold, double decrease) {
    // Features are scanned in ascending order and thresholds ascending within
    // a feature, so strict improvement implements the documented tie-break.
    if (!best.found || decrease > best.decrease) {
      best.found = true;
      best.feature = feature;
      best.threshold = threshold;
      best.decrease = decrease;
    }
  }

  static double midpoint(double lo, double hi) {
    const double mid = lo + (hi - lo) / 2.0;
    // Guard against the midpoint rounding onto `lo`, which would send equal
    // values to both sides of the split.
    return mid > lo ? mid : hi;
  }

  static double gini(const int counts[3], std::size_t n) {
    double impurity = 1.0;
    for (int c = 0; c < 3; ++c) {
      const double fraction = static_cast<double>(counts[c]) / static_cast<double>(n);
      impurity -= fraction * fraction;
    }
    return impurity;
  }

  static double variance(double sum, double sum_sq, std::size_t n) {
    const auto dn = static_cast<double>(n);
    const double mean = sum / dn;
    return std::max(0.0, sum_sq / dn - mean * mean);
  }

  const Eigen::MatrixXd& x_;
  const Eigen::VectorXd& y_;
  Task task_;
  CartParams params_;
  int mtry_;
  FeatureSampler sampler_;
  Rng* rng_;
};

}  // namespace detail

// CART on the full feature set (no sampling); rows must already be in
// canonical order when determinism across permutations matters.
inline Tree build_cart_tree(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, Task task,
                            const CartParams& params) {
  detail::CartBuilder builder(x, y, task, params, static_cast<int>(x.cols()),
                              detail::all_features, nullptr);
  std::vector<Eigen::Index> rows(static_cast<std::size_t>(x.rows()));
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = static_cast<Eigen::Index>(i);
  return builder.build(std::move(rows));
}

struct CartModel {
  Task task = Task::Classification;
  CartParams params;
  Eigen::Index n_features = 0;
  Tree tree;

  double predict_row(const Eigen::RowVectorXd& row) const { return tree.predict_row(row); }
};

inline CartModel train_cart(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, Task task,
                            const Hyperparams& params) {
  check_training_data(x, y);
  check_hyperparam_names(params, {"max_depth", "min_leaf"});
  CartParams cp;
  cp.max_depth = static_cast<int>(hyperparam(params, "max_depth", 0, 0, 1e9, true));
  cp.min_leaf = static_cast<int>(hyperparam(params, "min_leaf", 1, 1, 1e9, true));

  const auto order = canonical_row_order(x, y);
  Eigen::MatrixXd xc(x.rows(), x.cols());
  Eigen::VectorXd yc(y.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    xc.row(static_cast<Eigen::Index>(i)) = x.row(order[i]);
    yc[static_cast<Eigen::Index>(i)] = y[order[i]];
  }

  CartModel model;
  model.task = task;
  model.params = cp;
  model.n_features = x.cols();
  model.tree = build_cart_tree(xc, yc, task, cp);
  return model;
}

}  // namespace vigil
