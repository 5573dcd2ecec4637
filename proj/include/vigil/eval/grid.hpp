#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vigil/csv.hpp"
#include "vigil/eval/metrics.hpp"
#include "vigil/eval/splits.hpp"
#include "vigil/models/train.hpp"

namespace vigil {

// The documented hyperparameter grids, enumerated in nested order with the
// first-listed parameter outermost. Grid search resolves ties toward the
// earlier point, so this order is part of the contract.
inline std::vector<Hyperparams> default_grid(Family family, Task task, Eigen::Index n_features) {
  std::vector<Hyperparams> grid;
  switch (family) {
    case Family::Knn:
      for (const double k : {1.0, 3.0, 5.0, 7.0, 9.0, 11.0}) grid.push_back({{"k", k}});
      break;
    case Family::Dt:
      for (const double depth : {3.0, 5.0, 8.0, 12.0, 0.0})
        for (const double leaf : {1.0, 3.0, 5.0})
          grid.push_back({{"max_depth", depth}, {"min_leaf", leaf}});
      break;
    case Family::Rf:
      for (const double depth : {12.0, 0.0})
        grid.push_back({{"n_trees", 100.0}, {"max_depth", depth}});
      break;
    case Family::Svm: {
      const double gamma_default = 1.0 / static_cast<double>(std::max<Eigen::Index>(1, n_features));
      for (const double c : {0.1, 1.0, 10.0, 100.0})
        for (const double gamma : {gamma_default, 0.1, 1.0}) {
          if (task == Task::Regression) {
            for (const double epsilon : {0.01, 0.1})
              grid.push_back({{"c", c}, {"gamma", gamma}, {"epsilon", epsilon}});
          } else {
            grid.push_back({{"c", c}, {"gamma", gamma}});
          }
        }
      break;
    }
    case Family::Gp:
      for (const double length : {0.5, 1.0, 2.0})
        for (const double noise : {1e-4, 1e-2, 1e-1})
          grid.push_back({{"length_scale", length}, {"noise_variance", noise}});
      break;
  }
  return grid;
}

struct GridPointScore {
  Hyperparams params;
  double score = 0.0;  // mean fold RMSE (regression) or mean fold macro-F1
};

struct GridSearchResult {
  Hyperparams best;
  double best_score = 0.0;
  std::vector<GridPointScore> scores;  // grid order
};

// Exhaustive k-fold cross-validated search. Folds are drawn once from `seed`
// and shared by every grid point. Regression minimizes mean fold RMSE;
// classification maximizes mean fold macro-F1. Ties keep the earlier point.
// Fit errors propagate annotated with the offending grid point.
inline GridSearchResult grid_search(Family family, Task task,
                                    const std::vector<Hyperparams>& grid,
                                    const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                    int k_folds, std::uint64_t seed) {
  if (grid.empty()) throw ParameterError("grid must be non-empty");
  check_training_data(x, y);
  const auto folds = kfold_splits(static_cast<int>(x.rows()), k_folds, seed);

  const auto gather = [&](const std::vector<int>& rows, Eigen::MatrixXd& gx, Eigen::VectorXd& gy) {
    gx.resize(static_cast<Eigen::Index>(rows.size()), x.cols());
    gy.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      gx.row(static_cast<Eigen::Index>(i)) = x.row(rows[i]);
      gy[static_cast<Eigen::Index>(i)] = y[rows[i]];
    }
  };

  GridSearchResult result;
  bool have_best = false;
  for (std::size_t point = 0; point < grid.size(); ++point) {
    double fold_sum = 0.0;
    for (std::size_t f = 0; f < folds.size(); ++f) {
      Eigen::MatrixXd train_x, val_x;
      Eigen::VectorXd train_y, val_y;
      gather(folds[f].train, train_x, train_y);
      gather(folds[f].test, val_x, val_y);

      EstimatorSpec spec;
      spec.family = family;
      spec.task = task;
      spec.params = grid[point];
      spec.seed = derive_seed(seed, point * folds.size() + f);
      try {
        const TrainedModel model = train_model(spec, train_x, train_y);
        const Eigen::VectorXd predicted = model.predict(val_x);
        if (task == Task::Regression) {
          fold_sum += regression_metrics(val_y, predicted).rmse;
        } else {
          std::vector<DrowsinessLevel> truth, guess;
          for (Eigen::Index i = 0; i < val_y.size(); ++i) {
            truth.push_back(level_from_index(static_cast<int>(val_y[i])));
            guess.push_back(level_from_index(static_cast<int>(predicted[i])));
          }
          fold_sum += classification_metrics(truth, guess).f1_macro;
        }
      } catch (const Error&) {
        // Annotate with the offending grid point but keep the error's
        // category, which drives the CLI exit code.
        std::string detail = "grid point {";
        bool first = true;
        for (const auto& [name, value] : grid[point]) {
          detail += (first ? "" : ", ") + name + "=" + format_double(value);
          first = false;
        }
        detail += "}, fold " + std::to_string(f) + ": ";
        try {
          throw;
        } catch (const NumericalError& e) {
          throw NumericalError(detail + e.what());
        } catch (const DegenerateInputError& e) {
          throw DegenerateInputError(detail + e.what());
        } catch (const Error& e) {
          throw Error("grid search error", detail + e.what());
        }
      }
    }
    const double score = fold_sum / static_cast<double>(folds.size());
    result.scores.push_back({grid[point], score});
    const bool better = !have_best || (task == Task::Regression ? score < result.best_score
                                                                : score > result.best_score);
    if (better) {
      have_best = true;
      result.best = grid[point];
      result.best_score = score;
    }
  }
  return result;
}

}  // namespace vigil
