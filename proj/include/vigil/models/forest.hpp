#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "vigil/models/cart.hpp"
#include "vigil/models/estimator.hpp"
#include "vigil/rng.hpp"

namespace vigil {

// Bagged CART ensemble. Per tree: a bootstrap draw of the canonical rows and
// a fresh per-tree generator; per split: an mtry-sized feature subset. With
// n_trees = 1, bootstrap off, and mtry = n_features the forest reduces to the
// plain CART tree exactly.
struct ForestModel {
  Task task = Task::Classification;
  int n_trees = 100;
  CartParams params;
  int mtry = 0;
  bool bootstrap = true;
  Eigen::Index n_features = 0;
  std::vector<Tree> trees;

  double predict_row(const Eigen::RowVectorXd& row) const {
    if (task == Task::Regression) {
      double sum = 0.0;
      for (const Tree& tree : trees) sum += tree.predict_row(row);
      return sum / static_cast<double>(trees.size());
    }
    int votes[3] = {0, 0, 0};
    for (const Tree& tree : trees) ++votes[static_cast<int>(tree.predict_row(row))];
    int best = 0;
    for (int c = 1; c < 3; ++c)
      if (votes[c] > votes[best]) best = c;
    return static_cast<double>(best);
  }
};

inline ForestModel train_forest(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, Task task,
                                const Hyperparams& params, std::uint64_t seed) {
  check_training_data(x, y);
  check_hyperparam_names(params, {"n_trees", "max_depth", "min_leaf", "mtry", "bootstrap"});
  ForestModel model;
  model.task = task;
  model.n_trees = static_cast<int>(hyperparam(params, "n_trees", 100, 1, 1e6, true));
  model.params.max_depth = static_cast<int>(hyperparam(params, "max_depth", 0, 0, 1e9, true));
  model.params.min_leaf = static_cast<int>(hyperparam(params, "min_leaf", 1, 1, 1e9, true));
  model.bootstrap = hyperparam(params, "bootstrap", 1, 0, 1, true) != 0.0;
  model.n_features = x.cols();

  const auto p = static_cast<int>(x.cols());
  const int default_mtry = task == Task::Classification
                               ? static_cast<int>(std::ceil(std::sqrt(static_cast<double>(p))))
                               : static_cast<int>(std::ceil(static_cast<double>(p) / 3.0));
  model.mtry = static_cast<int>(
      hyperparam(params, "mtry", default_mtry, 1, static_cast<double>(p), true));

  const auto order = canonical_row_order(x, y);
  Eigen::MatrixXd xc(x.rows(), x.cols());
  Eigen::VectorXd yc(y.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    xc.row(static_cast<Eigen::Index>(i)) = x.row(order[i]);
    yc[static_cast<Eigen::Index>(i)] = y[order[i]];
  }

  const Eigen::Index n = xc.rows();
  SplitMix64 tree_seeds(seed);
  model.trees.reserve(static_cast<std::size_t>(model.n_trees));
  for (int t = 0; t < model.n_trees; ++t) {
    Rng tree_rng(tree_seeds.next());
    std::vector<Eigen::Index> rows(static_cast<std::size_t>(n));
    if (model.bootstrap) {
      for (Eigen::Index i = 0; i < n; ++i)
        rows[static_cast<std::size_t>(i)] = static_cast<Eigen::Index>(
            tree_rng.uniform_below(static_cast<std::uint64_t>(n)));
      std::sort(rows.begin(), rows.end());
    } else {
      for (Eigen::Index i = 0; i < n; ++i) rows[static_cast<std::size_t>(i)] = i;
    }
    const bool sample_features = model.mtry < p;
    detail::CartBuilder builder(xc, yc, task, model.params, model.mtry,
                                sample_features ? detail::random_features : detail::all_features,
                                &tree_rng);
    model.trees.push_back(builder.build(std::move(rows)));
  }
  return model;
}

}  // namespace vigil
