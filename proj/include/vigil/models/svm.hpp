#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "vigil/models/estimator.hpp"

namespace vigil {

inline constexpr double kSvmKktTolerance = 1e-3;

namespace detail {

// RBF kernel exp(-gamma * ||a - b||^2) over the rows of one matrix. The full
// Gram matrix is cached when it fits; otherwise columns are recomputed on
// demand, which is slower but identical.
class RbfKernelCache {
 public:
  static constexpr Eigen::Index kMaxCachedPoints = 5500;

  RbfKernelCache(const Eigen::MatrixXd& x, double gamma) : x_(x), gamma_(gamma) {
    const Eigen::Index n = x.rows();
    if (n <= kMaxCachedPoints) {
      const Eigen::VectorXd sq = x.rowwise().squaredNorm();
      Eigen::MatrixXd dist = -2.0 * (x * x.transpose());
      dist.colwise() += sq;
      dist.rowwise() += sq.transpose();
      full_ = (-gamma * dist.array().max(0.0)).exp().matrix();
    }
  }

  Eigen::Index points() const { return x_.rows(); }

  void column_into(Eigen::Index j, Eigen::VectorXd& out) const {
    if (full_.size() > 0) {
      out = full_.col(j);
      return;
    }
    out = (-gamma_ * (x_.rowwise() - x_.row(j)).rowwise().squaredNorm().array()).exp();
  }

 private:
  const Eigen::MatrixXd& x_;
  double gamma_;
  Eigen::MatrixXd full_;
};

struct SmoSolution {
  Eigen::VectorXd lambda;
  double bias = 0.0;
  bool converged = false;
  long iterations = 0;
};

// Sequential minimal optimization for
//     min  1/2 lambda^T Q lambda + p^T lambda
//     s.t. z^T lambda = 0,  0 <= lambda_t <= c,
// where Q_ts = z_t z_s K(t mod n, s mod n). Variables may outnumber kernel
// points (the epsilon-regression mapping uses 2n variables over n points).
// Pair selection is the deterministic maximal-violating-pair rule; ties take
// the lowest index. Stops when the KKT violation gap falls below `tol`.
inline SmoSolution smo_solve(const RbfKernelCache& kernel, const std::vector<double>& z,
                             const Eigen::VectorXd& p, double c, double tol,
                             long max_iterations) {
  const auto nv = static_cast<Eigen::Index>(z.size());
  const Eigen::Index n_points = kernel.points();
  constexpr double kInf = std::numeric_limits<double>::infinity();

  SmoSolution sol;
  sol.lambda = Eigen::VectorXd::Zero(nv);
  Eigen::VectorXd g = p;
  Eigen::VectorXd qi(nv), qj(nv), kcol(n_points);

  const auto fill_q_column = [&](Eigen::Index t, Eigen::VectorXd& q) {
    kernel.column_into(t % n_points, kcol);
    for (Eigen::Index s = 0; s < nv; ++s) q[s] = z[static_cast<std::size_t>(t)] *
                                                  z[static_cast<std::size_t>(s)] *
                                                  kcol[s % n_points];
  };
  const auto in_up = [&](Eigen::Index t) {
    return z[static_cast<std::size_t>(t)] > 0 ? sol.lambda[t] < c : sol.lambda[t] > 0.0;
  };
  const auto in_low = [&](Eigen::Index t) {
    return z[static_cast<std::size_t>(t)] > 0 ? sol.lambda[t] > 0.0 : sol.lambda[t] < c;
  };

  long iter = 0;
  for (; iter < max_iterations; ++iter) {
    double m_val = -kInf, big_m_val = kInf;
    Eigen::Index i = -1, j = -1;
    for (Eigen::Index t = 0; t < nv; ++t) {
      const double v = -z[static_cast<std::size_t>(t)] * g[t];
      if (in_up(t) && v > m_val) { m_val = v; i = t; }
      if (in_low(t) && v < big_m_val) { big_m_val = v; j = t; }
    }
    if (i < 0 || j < 0 || m_val - big_m_val <= tol) {
      sol.converged = true;
      break;
    }

    fill_q_column(i, qi);
    fill_q_column(j, qj);
    const double old_i = sol.lambda[i], old_j = sol.lambda[j];
    double new_i = old_i, new_j = old_j;
    if (z[static_cast<std::size_t>(i)] != z[static_cast<std::size_t>(j)]) {
      double quad = qi[i] + qj[j] + 2.0 * qi[j];
      if (quad <= 0.0) quad = 1e-12;
      const double delta = (-g[i] - g[j]) / quad;
      const double diff = old_i - old_j;
      new_i = old_i + delta;
      new_j = old_j + delta;
      if (diff > 0.0) {
        if (new_j < 0.0) { new_j = 0.0; new_i = diff; }
      } else {
        if (new_i < 0.0) { new_i = 0.0; new_j = -diff; }
      }
      if (diff > 0.0) {
        if (new_i > c) { new_i = c; new_j = c - diff; }
      } else {
        if (new_j > c) { new_j = c; new_i = c + diff; }
      }
    } else {
      double quad = qi[i] + qj[j] - 2.0 * qi[j];
      if (quad <= 0.0) quad = 1e-12;
      const double delta = (g[i] - g[j]) / quad;
      const double sum = old_i + old_j;
      new_i = old_i - delta;
      new_j = old_j + delta;
      if (sum > c) {
        if (new_i > c) { new_i = c; new_j = sum - c; }
      } else {
        if (new_j < 0.0) { new_j = 0.0; new_i = sum; }
      }
      if (sum > c) {
        if (new_j > c) { new_j = c; new_i = sum - c; }
      } else {
        if (new_i < 0.0) { new_i = 0.0; new_j = sum; }
      }
    }

    const double delta_i = new_i - old_i;
    const double delta_j = new_j - old_j;
    sol.lambda[i] = new_i;
    sol.lambda[j] = new_j;
    g += qi * delta_i + qj * delta_j;
  }
  sol.iterations = iter;

  // Bias from the KKT conditions: average of -z_t G_t over free variables,
  // or the midpoint of the remaining feasibility interval if none are free.
  double free_sum = 0.0;
  int free_count = 0;
  double upper = -kInf, lower = kInf;
  for (Eigen::Index t = 0; t < nv; ++t) {
    const double v = -z[static_cast<std::size_t>(t)] * g[t];
    if (sol.lambda[t] > 0.0 && sol.lambda[t] < c) {
      free_sum += v;
      ++free_count;
    } else {
      if (in_up(t)) upper = std::max(upper, v);
      if (in_low(t)) lower = std::min(lower, v);
    }
  }
  if (free_count > 0)
    sol.bias = free_sum / free_count;
  else if (std::isfinite(upper) && std::isfinite(lower))
    sol.bias = (upper + lower) / 2.0;
  else if (std::isfinite(upper))
    sol.bias = upper;
  else if (std::isfinite(lower))
    sol.bias = lower;
  return sol;
}

}  // namespace detail

// One trained sub-problem: the pairwise classifier of classes (a, b) coded
// z = +1 for a and -1 for b, or the single regression machine. `rows` index
// into the model's canonical training matrix; `beta` are the signed dual
// coefficients of those rows (zero-coefficient rows are pruned).
struct BinaryMachine {
  int class_a = -1;
  int class_b = -1;
  int trivial_class = -1;  // >= 0: one side had no training rows; always vote this
  std::vector<Eigen::Index> rows;
  Eigen::VectorXd beta;
  double bias = 0.0;
  bool converged = true;
  long iterations = 0;
};

struct SvmModel {
  Task task = Task::Classification;
  double c = 1.0;
  double gamma = 1.0;
  double epsilon = 0.1;
  Eigen::Index n_features = 0;
  Eigen::MatrixXd x;  // canonical row order
  Eigen::VectorXd y;
  std::vector<BinaryMachine> machines;
  bool converged = true;

  double kernel(const Eigen::RowVectorXd& a, const Eigen::RowVectorXd& b) const {
    return std::exp(-gamma * (a - b).squaredNorm());
  }

  double decision(const BinaryMachine& machine, const Eigen::RowVectorXd& row) const {
    double sum = machine.bias;
    for (Eigen::Index k = 0; k < machine.beta.size(); ++k)
      sum += machine.beta[k] * kernel(x.row(machine.rows[static_cast<std::size_t>(k)]), row);
    return sum;
  }

  double predict_row(const Eigen::RowVectorXd& row) const {
    if (task == Task::Regression) return decision(machines.front(), row);
    int votes[3] = {0, 0, 0};
    for (const BinaryMachine& machine : machines) {
      if (machine.trivial_class >= 0) {
        ++votes[machine.trivial_class];
        continue;
      }
      const double f = decision(machine, row);
      ++votes[f > 0.0 ? machine.class_a : (f < 0.0 ? machine.class_b : machine.class_a)];
    }
    int best = 0;
    for (int cl = 1; cl < 3; ++cl)
      if (votes[cl] > votes[best]) best = cl;
    return static_cast<double>(best);
  }
};

inline SvmModel train_svm(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, Task task,
                          const Hyperparams& params) {
  check_training_data(x, y);
  if (task == Task::Classification)
    check_hyperparam_names(params, {"c", "gamma"});
  else
    check_hyperparam_names(params, {"c", "gamma", "epsilon"});
  const auto p_features = static_cast<double>(x.cols());

  SvmModel model;
  model.task = task;
  model.c = hyperparam(params, "c", 1.0, 1e-12, 1e12);
  model.gamma = hyperparam(params, "gamma", 1.0 / std::max(1.0, p_features), 1e-12, 1e12);
  model.epsilon = task == Task::Regression ? hyperparam(params, "epsilon", 0.1, 0.0, 1e12) : 0.0;
  model.n_features = x.cols();

  const auto order = canonical_row_order(x, y);
  model.x.resize(x.rows(), x.cols());
  model.y.resize(y.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    model.x.row(static_cast<Eigen::Index>(i)) = x.row(order[i]);
    model.y[static_cast<Eigen::Index>(i)] = y[order[i]];
  }

  const long max_iterations =
      std::max<long>(10'000'000, 100 * static_cast<long>(model.x.rows()));

  if (task == Task::Regression) {
    const Eigen::Index n = model.x.rows();
    detail::RbfKernelCache kernel(model.x, model.gamma);
    std::vector<double> z(static_cast<std::size_t>(2 * n));
    Eigen::VectorXd p(2 * n);
    for (Eigen::Index t = 0; t < n; ++t) {
      z[static_cast<std::size_t>(t)] = 1.0;
      z[static_cast<std::size_t>(t + n)] = -1.0;
      p[t] = model.epsilon - model.y[t];
      p[t + n] = model.epsilon + model.y[t];
    }
    const auto sol = detail::smo_solve(kernel, z, p, model.c, kSvmKktTolerance, max_iterations);
    BinaryMachine machine;
    machine.converged = sol.converged;
    machine.iterations = sol.iterations;
    machine.bias = sol.bias;
    std::vector<double> betas;
    for (Eigen::Index t = 0; t < n; ++t) {
      const double beta = sol.lambda[t] - sol.lambda[t + n];
      if (beta != 0.0) {
        machine.rows.push_back(t);
        betas.push_back(beta);
      }
    }
    machine.beta = Eigen::Map<const Eigen::VectorXd>(betas.data(),
                                                     static_cast<Eigen::Index>(betas.size()));
    model.converged = machine.converged;
    model.machines.push_back(std::move(machine));
    return model;
  }

  for (int a = 0; a < 3; ++a) {
    for (int b = a + 1; b < 3; ++b) {
      BinaryMachine machine;
      machine.class_a = a;
      machine.class_b = b;
      std::vector<Eigen::Index> rows;
      for (Eigen::Index r = 0; r < model.x.rows(); ++r) {
        const int label = static_cast<int>(model.y[r]);
        if (label == a || label == b) rows.push_back(r);
      }
      bool has_a = false, has_b = false;
      for (const Eigen::Index r : rows) {
        (static_cast<int>(model.y[r]) == a ? has_a : has_b) = true;
      }
      if (!has_a || !has_b) {
        machine.trivial_class = has_a ? a : (has_b ? b : a);
        model.machines.push_back(std::move(machine));
        continue;
      }

      Eigen::MatrixXd sub_x(static_cast<Eigen::Index>(rows.size()), model.x.cols());
      std::vector<double> z(rows.size());
      for (std::size_t k = 0; k < rows.size(); ++k) {
        sub_x.row(static_cast<Eigen::Index>(k)) = model.x.row(rows[k]);
        z[k] = static_cast<int>(model.y[rows[k]]) == a ? 1.0 : -1.0;
      }
      detail::RbfKernelCache kernel(sub_x, model.gamma);
      const Eigen::VectorXd p =
          Eigen::VectorXd::Constant(static_cast<Eigen::Index>(rows.size()), -1.0);
      const auto sol = detail::smo_solve(kernel, z, p, model.c, kSvmKktTolerance, max_iterations);
      machine.converged = sol.converged;
      machine.iterations = sol.iterations;
      machine.bias = sol.bias;
      std::vector<double> betas;
      for (std::size_t k = 0; k < rows.size(); ++k) {
        const double beta = z[k] * sol.lambda[static_cast<Eigen::Index>(k)];
        if (beta != 0.0) {
          machine.rows.push_back(rows[k]);
          betas.push_back(beta);
        }
      }
      machine.beta = Eigen::Map<const Eigen::VectorXd>(betas.data(),
                                                       static_cast<Eigen::Index>(betas.size()));
      model.converged = model.converged && machine.converged;
      model.machines.push_back(std::move(machine));
    }
  }
  return model;
}

}  // namespace vigil
