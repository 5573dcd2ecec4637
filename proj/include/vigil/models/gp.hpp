#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "vigil/models/estimator.hpp"

namespace vigil {

// Gaussian-process regression with the RBF kernel
//     k(a, b) = exp(-||a - b||^2 / (2 l^2)),
// fitted by Cholesky of K + (noise + jitter) I. Classification is handled as
// one-vs-rest regression on +/-1 encodings sharing the single factorization,
// predicting the argmax of the three latent means.
struct GpModel {
  Task task = Task::Regression;
  double length_scale = 1.0;
  double noise_variance = 1e-2;
  double jitter = 0.0;  // the value that made the factorization succeed
  Eigen::Index n_features = 0;
  Eigen::MatrixXd x;       // canonical row order
  Eigen::VectorXd y;       // targets (class index as double for classification)
  Eigen::MatrixXd chol_l;  // lower-triangular factor of K + (noise + jitter) I
  Eigen::MatrixXd alpha;   // (K + (noise + jitter) I)^{-1} Y, one column per output

  Eigen::VectorXd kernel_vector(const Eigen::RowVectorXd& row) const {
    Eigen::VectorXd k(x.rows());
    const double inv_two_l2 = 1.0 / (2.0 * length_scale * length_scale);
    for (Eigen::Index i = 0; i < x.rows(); ++i)
      k[i] = std::exp(-(x.row(i) - row).squaredNorm() * inv_two_l2);
    return k;
  }

  // Latent predictive mean(s) at one input.
  Eigen::VectorXd latent_means(const Eigen::RowVectorXd& row) const {
    return alpha.transpose() * kernel_vector(row);
  }

  double predict_row(const Eigen::RowVectorXd& row) const {
    const Eigen::VectorXd means = latent_means(row);
    if (task == Task::Regression) return means[0];
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < means.size(); ++c)
      if (means[c] > means[best]) best = c;
    return static_cast<double>(best);
  }

  // Latent predictive variance at one input (prior variance is 1 for RBF).
  double predict_variance(const Eigen::RowVectorXd& row) const {
    const Eigen::VectorXd k = kernel_vector(row);
    const Eigen::VectorXd v = chol_l.triangularView<Eigen::Lower>().solve(k);
    return std::max(0.0, 1.0 - v.squaredNorm());
  }
};

namespace detail {

inline Eigen::MatrixXd rbf_gram(const Eigen::MatrixXd& x, double length_scale) {
  const Eigen::Index n = x.rows();
  const Eigen::VectorXd sq = x.rowwise().squaredNorm();
  Eigen::MatrixXd dist = -2.0 * (x * x.transpose());
  dist.colwise() += sq;
  dist.rowwise() += sq.transpose();
  return (-dist.array().max(0.0) / (2.0 * length_scale * length_scale)).exp().matrix();
}

}  // namespace detail

inline GpModel train_gp(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, Task task,
                        const Hyperparams& params) {
  check_training_data(x, y);
  check_hyperparam_names(params, {"length_scale", "noise_variance"});
  GpModel model;
  model.task = task;
  model.length_scale = hyperparam(params, "length_scale", 1.0, 1e-12, 1e12);
  model.noise_variance = hyperparam(params, "noise_variance", 1e-2, 0.0, 1e12);
  model.n_features = x.cols();

  const auto order = canonical_row_order(x, y);
  model.x.resize(x.rows(), x.cols());
  model.y.resize(y.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    model.x.row(static_cast<Eigen::Index>(i)) = x.row(order[i]);
    model.y[static_cast<Eigen::Index>(i)] = y[order[i]];
  }

  const Eigen::Index n = model.x.rows();
  const Eigen::MatrixXd gram = detail::rbf_gram(model.x, model.length_scale);

  // Jitter starts at 1e-8 and is multiplied by 10 on each failed
  // factorization, giving up past 1e-2.
  Eigen::LLT<Eigen::MatrixXd> llt;
  bool factored = false;
  for (double jitter = 1e-8; jitter <= 1e-2 * (1.0 + 1e-12); jitter *= 10.0) {
    Eigen::MatrixXd regularized = gram;
    regularized.diagonal().array() += model.noise_variance + jitter;
    llt.compute(regularized);
    if (llt.info() == Eigen::Success) {
      model.jitter = jitter;
      factored = true;
      break;
    }
  }
  if (!factored)
    throw NumericalError("kernel matrix is not positive definite even with maximum jitter");
  model.chol_l = llt.matrixL();

  Eigen::MatrixXd targets;
  if (task == Task::Regression) {
    targets = model.y;
  } else {
    targets.resize(n, 3);
    for (Eigen::Index i = 0; i < n; ++i)
      for (int c = 0; c < 3; ++c)
        targets(i, c) = static_cast<int>(model.y[i]) == c ? 1.0 : -1.0;
  }
  model.alpha = llt.solve(targets);
  return model;
}

}  // namespace vigil
