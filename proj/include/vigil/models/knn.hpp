#pragma once

#include <algorithm>
#include <vector>

#include <Eigen/Dense>

#include "vigil/models/estimator.hpp"

namespace vigil {

// k nearest neighbours with Euclidean distance. All ties are broken
// deterministically: equal distances prefer the lower canonical row index,
// equal vote counts prefer the smaller class.
struct KnnModel {
  Task task = Task::Classification;
  int k = 1;
  Eigen::MatrixXd x;  // canonical row order
  Eigen::VectorXd y;  // class index as double for classification

  double predict_row(const Eigen::RowVectorXd& row) const {
    const Eigen::Index n = x.rows();
    std::vector<std::pair<double, Eigen::Index>> distances;
    distances.reserve(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i)
      distances.emplace_back((x.row(i) - row).squaredNorm(), i);
    std::sort(distances.begin(), distances.end());

    if (task == Task::Regression) {
      double sum = 0.0;
      for (int i = 0; i < k; ++i) sum += y[distances[static_cast<std::size_t>(i)].second];
      return sum / k;
    }
    int votes[3] = {0, 0, 0};
    for (int i = 0; i < k; ++i)
      ++votes[static_cast<int>(y[distances[static_cast<std::size_t>(i)].second])];
    int best = 0;
    for (int c = 1; c < 3; ++c)
      if (votes[c] > votes[best]) best = c;
    return static_cast<double>(best);
  }
};

inline KnnModel train_knn(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, Task task,
                          const Hyperparams& params) {
  check_training_data(x, y);
  check_hyperparam_names(params, {"k"});
  const int k = static_cast<int>(
      hyperparam(params, "k", 5, 1, static_cast<double>(x.rows()), true));
  KnnModel model;
  model.task = task;
  model.k = k;
  const auto order = canonical_row_order(x, y);
  model.x.resize(x.rows(), x.cols());
  model.y.resize(y.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    model.x.row(static_cast<Eigen::Index>(i)) = x.row(order[i]);
    model.y[static_cast<Eigen::Index>(i)] = y[order[i]];
  }
  return model;
}

}  // namespace vigil
