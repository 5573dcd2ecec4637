#pragma once

#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "vigil/labeling.hpp"
#include "vigil/models/cart.hpp"
#include "vigil/models/estimator.hpp"
#include "vigil/models/forest.hpp"
#include "vigil/models/gp.hpp"
#include "vigil/models/knn.hpp"
#include "vigil/models/serialize.hpp"
#include "vigil/models/svm.hpp"

namespace vigil {

namespace detail {

inline nlohmann::json tree_to_json(const Tree& tree) {
  std::vector<int> feature, left, right;
  Eigen::VectorXd threshold(static_cast<Eigen::Index>(tree.nodes.size()));
  Eigen::VectorXd value(static_cast<Eigen::Index>(tree.nodes.size()));
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    const TreeNode& node = tree.nodes[i];
    feature.push_back(node.feature);
    left.push_back(node.left);
    right.push_back(node.right);
    threshold[static_cast<Eigen::Index>(i)] = node.threshold;
    value[static_cast<Eigen::Index>(i)] = node.value;
  }
  return nlohmann::json{{"feature", feature},
                        {"left", left},
                        {"right", right},
                        {"threshold", encode_vector(threshold)},
                        {"value", encode_vector(value)}};
}

inline Tree tree_from_json(const nlohmann::json& j) {
  Tree tree;
  const auto feature = j.at("feature").get<std::vector<int>>();
  const auto left = j.at("left").get<std::vector<int>>();
  const auto right = j.at("right").get<std::vector<int>>();
  const auto threshold =
      decode_vector(j.at("threshold").get<std::string>(), static_cast<Eigen::Index>(feature.size()));
  const auto value =
      decode_vector(j.at("value").get<std::string>(), static_cast<Eigen::Index>(feature.size()));
  if (left.size() != feature.size() || right.size() != feature.size())
    throw FormatError("tree arrays have inconsistent lengths");
  const auto n = static_cast<int>(feature.size());
  if (n == 0) throw FormatError("tree must have at least one node");
  for (std::size_t i = 0; i < feature.size(); ++i) {
    TreeNode node;
    node.feature = feature[i];
    node.threshold = threshold[static_cast<Eigen::Index>(i)];
    node.left = left[i];
    node.right = right[i];
    node.value = value[static_cast<Eigen::Index>(i)];
    if (node.feature >= 0 && (node.left < 0 || node.left >= n || node.right < 0 || node.right >= n))
      throw FormatError("tree child index out of range");
    tree.nodes.push_back(node);
  }
  return tree;
}

}  // namespace detail

// A fitted estimator of any family behind one interface. Copyable; prediction
// is const and thread-safe.
class TrainedModel {
 public:
  using State = std::variant<KnnModel, CartModel, ForestModel, SvmModel, GpModel>;

  TrainedModel(EstimatorSpec spec, State state, Eigen::Index n_features)
      : spec_(std::move(spec)), state_(std::move(state)), n_features_(n_features) {}

  const EstimatorSpec& spec() const { return spec_; }
  Eigen::Index n_features() const { return n_features_; }
  const State& state() const { return state_; }

  bool converged() const {
    if (const auto* svm = std::get_if<SvmModel>(&state_)) return svm->converged;
    return true;
  }

  // Raw numeric prediction: target estimate for regression, class index for
  // classification.
  Eigen::VectorXd predict(const Eigen::MatrixXd& x) const {
    check_predict_data(x, n_features_);
    Eigen::VectorXd out(x.rows());
    std::visit(
        [&](const auto& model) {
          for (Eigen::Index r = 0; r < x.rows(); ++r) out[r] = model.predict_row(x.row(r));
        },
        state_);
    return out;
  }

  std::vector<DrowsinessLevel> predict_labels(const Eigen::MatrixXd& x) const {
    if (spec_.task != Task::Classification)
      throw ParameterError("predict_labels requires a classification model");
    const Eigen::VectorXd raw = predict(x);
    std::vector<DrowsinessLevel> labels;
    labels.reserve(static_cast<std::size_t>(raw.size()));
    for (Eigen::Index i = 0; i < raw.size(); ++i)
      labels.push_back(level_from_index(static_cast<int>(raw[i])));
    return labels;
  }

  nlohmann::json to_json() const;
  static TrainedModel from_json(const nlohmann::json& j);

 private:
  EstimatorSpec spec_;
  State state_;
  Eigen::Index n_features_;
};

inline TrainedModel train_model(const EstimatorSpec& spec, const Eigen::MatrixXd& x,
                                const Eigen::VectorXd& y) {
  if (spec.task == Task::Classification) {
    check_training_data(x, y);
    for (Eigen::Index i = 0; i < y.size(); ++i)
      if (y[i] != 0.0 && y[i] != 1.0 && y[i] != 2.0)
        throw ParameterError("classification targets must be class indices 0, 1, or 2");
  }
  switch (spec.family) {
    case Family::Knn:
      return TrainedModel(spec, train_knn(x, y, spec.task, spec.params), x.cols());
    case Family::Dt:
      return TrainedModel(spec, train_cart(x, y, spec.task, spec.params), x.cols());
    case Family::Rf:
      return TrainedModel(spec, train_forest(x, y, spec.task, spec.params, spec.seed), x.cols());
    case Family::Svm:
      return TrainedModel(spec, train_svm(x, y, spec.task, spec.params), x.cols());
    case Family::Gp:
      return TrainedModel(spec, train_gp(x, y, spec.task, spec.params), x.cols());
  }
  throw ParameterError("invalid family");
}

inline TrainedModel train_model(const EstimatorSpec& spec, const Eigen::MatrixXd& x,
                                const std::vector<DrowsinessLevel>& labels) {
  if (spec.task != Task::Classification)
    throw ParameterError("label targets require a classification task");
  Eigen::VectorXd y(static_cast<Eigen::Index>(labels.size()));
  for (std::size_t i = 0; i < labels.size(); ++i)
    y[static_cast<Eigen::Index>(i)] = static_cast<double>(static_cast<int>(labels[i]));
  return train_model(spec, x, y);
}

inline nlohmann::json TrainedModel::to_json() const {
  nlohmann::json j{{"format", "vigil-model-v1"},
                   {"family", to_string(spec_.family)},
                   {"task", to_string(spec_.task)},
                   {"params", spec_.params},
                   {"seed", spec_.seed},
                   {"n_features", n_features_}};
  nlohmann::json state;
  if (const auto* knn = std::get_if<KnnModel>(&state_)) {
    state["k"] = knn->k;
    state["rows"] = knn->x.rows();
    state["x"] = detail::encode_matrix(knn->x);
    state["y"] = detail::encode_vector(knn->y);
  } else if (const auto* cart = std::get_if<CartModel>(&state_)) {
    state["tree"] = detail::tree_to_json(cart->tree);
  } else if (const auto* forest = std::get_if<ForestModel>(&state_)) {
    state["mtry"] = forest->mtry;
    state["bootstrap"] = forest->bootstrap;
    nlohmann::json trees = nlohmann::json::array();
    for (const Tree& tree : forest->trees) trees.push_back(detail::tree_to_json(tree));
    state["trees"] = std::move(trees);
  } else if (const auto* svm = std::get_if<SvmModel>(&state_)) {
    state["c"] = svm->c;
    state["gamma"] = svm->gamma;
    state["epsilon"] = svm->epsilon;
    state["rows"] = svm->x.rows();
    state["x"] = detail::encode_matrix(svm->x);
    state["y"] = detail::encode_vector(svm->y);
    nlohmann::json machines = nlohmann::json::array();
    for (const BinaryMachine& machine : svm->machines) {
      nlohmann::json m{{"class_a", machine.class_a},
                       {"class_b", machine.class_b},
                       {"trivial_class", machine.trivial_class},
                       {"bias", machine.bias},
                       {"converged", machine.converged},
                       {"iterations", machine.iterations},
                       {"beta", detail::encode_vector(machine.beta)}};
      std::vector<long> rows;
      for (const Eigen::Index r : machine.rows) rows.push_back(static_cast<long>(r));
      m["rows"] = rows;
      machines.push_back(std::move(m));
    }
    state["machines"] = std::move(machines);
  } else if (const auto* gp = std::get_if<GpModel>(&state_)) {
    state["length_scale"] = gp->length_scale;
    state["noise_variance"] = gp->noise_variance;
    state["rows"] = gp->x.rows();
    state["x"] = detail::encode_matrix(gp->x);
    state["y"] = detail::encode_vector(gp->y);
  }
  j["state"] = std::move(state);
  return j;
}

inline TrainedModel TrainedModel::from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != "vigil-model-v1")
      throw FormatError("unsupported model format");
    EstimatorSpec spec;
    spec.family = family_from_string(j.at("family").get<std::string>());
    spec.task = task_from_string(j.at("task").get<std::string>());
    spec.params = j.at("params").get<Hyperparams>();
    spec.seed = j.at("seed").get<std::uint64_t>();
    const auto n_features = j.at("n_features").get<Eigen::Index>();
    const nlohmann::json& state = j.at("state");

    switch (spec.family) {
      case Family::Knn: {
        const auto rows = state.at("rows").get<Eigen::Index>();
        const Eigen::MatrixXd x =
            detail::decode_matrix(state.at("x").get<std::string>(), rows, n_features);
        const Eigen::VectorXd y = detail::decode_vector(state.at("y").get<std::string>(), rows);
        // Refit on the stored canonical data: kNN fitting is just canonical
        // ordering, so this reproduces the saved model exactly.
        return train_model(spec, x, y);
      }
      case Family::Dt: {
        CartModel model;
        model.task = spec.task;
        model.n_features = n_features;
        model.params.max_depth =
            static_cast<int>(hyperparam(spec.params, "max_depth", 0, 0, 1e9, true));
        model.params.min_leaf =
            static_cast<int>(hyperparam(spec.params, "min_leaf", 1, 1, 1e9, true));
        model.tree = detail::tree_from_json(state.at("tree"));
        return TrainedModel(spec, std::move(model), n_features);
      }
      case Family::Rf: {
        ForestModel model;
        model.task = spec.task;
        model.n_features = n_features;
        model.mtry = state.at("mtry").get<int>();
        model.bootstrap = state.at("bootstrap").get<bool>();
        model.n_trees = static_cast<int>(state.at("trees").size());
        if (model.n_trees == 0) throw FormatError("forest must have at least one tree");
        model.params.max_depth =
            static_cast<int>(hyperparam(spec.params, "max_depth", 0, 0, 1e9, true));
        model.params.min_leaf =
            static_cast<int>(hyperparam(spec.params, "min_leaf", 1, 1, 1e9, true));
        for (const auto& tree : state.at("trees"))
          model.trees.push_back(detail::tree_from_json(tree));
        return TrainedModel(spec, std::move(model), n_features);
      }
      case Family::Svm: {
        SvmModel model;
        model.task = spec.task;
        model.c = state.at("c").get<double>();
        model.gamma = state.at("gamma").get<double>();
        model.epsilon = state.at("epsilon").get<double>();
        model.n_features = n_features;
        const auto rows = state.at("rows").get<Eigen::Index>();
        model.x = detail::decode_matrix(state.at("x").get<std::string>(), rows, n_features);
        model.y = detail::decode_vector(state.at("y").get<std::string>(), rows);
        for (const auto& m : state.at("machines")) {
          BinaryMachine machine;
          machine.class_a = m.at("class_a").get<int>();
          machine.class_b = m.at("class_b").get<int>();
          machine.trivial_class = m.at("trivial_class").get<int>();
          machine.bias = m.at("bias").get<double>();
          machine.converged = m.at("converged").get<bool>();
          machine.iterations = m.at("iterations").get<long>();
          machine.beta = detail::decode_vector(m.at("beta").get<std::string>());
          for (const auto& r : m.at("rows")) {
            const auto row = r.get<long>();
            if (row < 0 || row >= rows) throw FormatError("support row index out of range");
            machine.rows.push_back(static_cast<Eigen::Index>(row));
          }
          if (static_cast<Eigen::Index>(machine.rows.size()) != machine.beta.size())
            throw FormatError("support rows and coefficients differ in length");
          model.converged = model.converged && machine.converged;
          model.machines.push_back(std::move(machine));
        }
        if (model.machines.empty()) throw FormatError("svm model carries no machines");
        return TrainedModel(spec, std::move(model), n_features);
      }
      case Family::Gp: {
        const auto rows = state.at("rows").get<Eigen::Index>();
        const Eigen::MatrixXd x =
            detail::decode_matrix(state.at("x").get<std::string>(), rows, n_features);
        const Eigen::VectorXd y = detail::decode_vector(state.at("y").get<std::string>(), rows);
        // The factorization is recomputed from the stored canonical data with
        // the same deterministic jitter schedule the original fit used.
        return train_model(spec, x, y);
      }
    }
    throw FormatError("invalid family");
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("model json: ") + e.what());
  }
}

}  // namespace vigil
