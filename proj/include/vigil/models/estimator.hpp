#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vigil/errors.hpp"
#include "vigil/labeling.hpp"

namespace vigil {

enum class Family { Svm, Knn, Dt, Gp, Rf };
enum class Task { Regression, Classification };

inline const char* to_string(Family family) {
  switch (family) {
    case Family::Svm: return "svm";
    case Family::Knn: return "knn";
    case Family::Dt: return "dt";
    case Family::Gp: return "gp";
    case Family::Rf: return "rf";
  }
  throw ParameterError("invalid family");
}

inline Family family_from_string(const std::string& name) {
  if (name == "svm") return Family::Svm;
  if (name == "knn") return Family::Knn;
  if (name == "dt") return Family::Dt;
  if (name == "gp") return Family::Gp;
  if (name == "rf") return Family::Rf;
  throw ParameterError("unknown family '" + name + "' (expected svm/knn/dt/gp/rf)");
}

inline const char* to_string(Task task) {
  return task == Task::Regression ? "regression" : "classification";
}

inline Task task_from_string(const std::string& name) {
  if (name == "regression") return Task::Regression;
  if (name == "classification") return Task::Classification;
  throw ParameterError("unknown task '" + name + "'");
}

// Hyperparameters are a name -> value map; std::map keeps iteration (and
// serialization) order deterministic.
using Hyperparams = std::map<std::string, double>;

struct EstimatorSpec {
  Family family = Family::Knn;
  Task task = Task::Classification;
  Hyperparams params;
  std::uint64_t seed = 0;
};

// Looks up a hyperparameter with a default; `require_integer` and the range
// are validated so misconfigured grids fail loudly at fit time.
inline double hyperparam(const Hyperparams& params, const std::string& name, double fallback,
                         double lo, double hi, bool require_integer = false) {
  double value = fallback;
  if (const auto it = params.find(name); it != params.end()) value = it->second;
  if (!(value >= lo && value <= hi))
    throw ParameterError("hyperparameter '" + name + "' = " + std::to_string(value) +
                         " is outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  if (require_integer && value != std::floor(value))
    throw ParameterError("hyperparameter '" + name + "' must be an integer");
  return value;
}

inline void check_hyperparam_names(const Hyperparams& params,
                                   const std::vector<std::string>& allowed) {
  for (const auto& [name, value] : params) {
    bool known = false;
    for (const auto& a : allowed)
      if (name == a) { known = true; break; }
    if (!known) throw ParameterError("unknown hyperparameter '" + name + "'");
  }
}

// Common fit-time validation shared by every family.
inline void check_training_data(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  if (x.rows() < 1) throw ParameterError("training set must be non-empty");
  if (x.rows() != y.size()) throw ParameterError("row count of X does not match y");
  if (!x.allFinite() || !y.allFinite())
    throw ParameterError("training data must be finite");
}

inline void check_predict_data(const Eigen::MatrixXd& x, Eigen::Index n_features) {
  if (x.cols() != n_features)
    throw ParameterError("prediction rows have " + std::to_string(x.cols()) +
                         " features, model was trained with " + std::to_string(n_features));
  if (!x.allFinite()) throw ParameterError("prediction data must be finite");
}

// Canonical training order: rows sorted lexicographically by features, then
// target. Every family fits on this order, which makes training exactly
// invariant to a permutation of the input rows.
inline std::vector<Eigen::Index> canonical_row_order(const Eigen::MatrixXd& x,
                                                     const Eigen::VectorXd& y) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(x.rows()));
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<Eigen::Index>(i);
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      if (x(a, c) < x(b, c)) return true;
      if (x(a, c) > x(b, c)) return false;
    }
    return y[a] < y[b];
  });
  return order;
}

}  // namespace vigil
