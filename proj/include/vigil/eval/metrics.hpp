#pragma once

#include <array>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "vigil/errors.hpp"
#include "vigil/labeling.hpp"

namespace vigil {

struct RegressionMetrics {
  double rmse = 0.0;
  double r2 = 0.0;
  bool r2_defined = true;  // false when y_true is constant (zero total variance)
};

inline RegressionMetrics regression_metrics(const Eigen::VectorXd& y_true,
                                            const Eigen::VectorXd& y_pred) {
  if (y_true.size() != y_pred.size()) throw ParameterError("prediction length mismatch");
  if (y_true.size() == 0) throw ParameterError("metrics require at least one prediction");
  RegressionMetrics m;
  const double ss_residual = (y_true - y_pred).squaredNorm();
  m.rmse = std::sqrt(ss_residual / static_cast<double>(y_true.size()));
  const double ss_total = (y_true.array() - y_true.mean()).square().sum();
  if (ss_total == 0.0) {
    m.r2_defined = false;
    m.r2 = 0.0;
  } else {
    m.r2 = 1.0 - ss_residual / ss_total;
  }
  return m;
}

// Macro metrics over the three classes; a class absent from both truth and
// prediction contributes 0 to the macro averages (0/0 := 0 throughout).
struct ClassificationMetrics {
  double accuracy = 0.0;
  double precision_macro = 0.0;
  double recall_macro = 0.0;
  double f1_macro = 0.0;
  std::array<std::array<long, 3>, 3> confusion{};  // [true][predicted]
};

inline ClassificationMetrics classification_metrics(const std::vector<DrowsinessLevel>& y_true,
                                                    const std::vector<DrowsinessLevel>& y_pred) {
  if (y_true.size() != y_pred.size()) throw ParameterError("prediction length mismatch");
  if (y_true.empty()) throw ParameterError("metrics require at least one prediction");
  ClassificationMetrics m;
  long correct = 0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const int t = static_cast<int>(y_true[i]);
    const int p = static_cast<int>(y_pred[i]);
    ++m.confusion[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)];
    if (t == p) ++correct;
  }
  m.accuracy = static_cast<double>(correct) / static_cast<double>(y_true.size());

  const auto safe_ratio = [](double numerator, double denominator) {
    return denominator == 0.0 ? 0.0 : numerator / denominator;
  };
  double precision_sum = 0.0, recall_sum = 0.0, f1_sum = 0.0;
  for (int c = 0; c < 3; ++c) {
    const auto ci = static_cast<std::size_t>(c);
    double tp = 0.0, predicted = 0.0, actual = 0.0;
    for (std::size_t other = 0; other < 3; ++other) {
      predicted += static_cast<double>(m.confusion[other][ci]);
      actual += static_cast<double>(m.confusion[ci][other]);
    }
    tp = static_cast<double>(m.confusion[ci][ci]);
    const double precision = safe_ratio(tp, predicted);
    const double recall = safe_ratio(tp, actual);
    precision_sum += precision;
    recall_sum += recall;
    f1_sum += safe_ratio(2.0 * precision * recall, precision + recall);
  }
  m.precision_macro = precision_sum / 3.0;
  m.recall_macro = recall_sum / 3.0;
  m.f1_macro = f1_sum / 3.0;
  return m;
}

// Sample mean / standard deviation (n - 1 denominator; sd = 0 for n = 1).
struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;
  int count = 0;
};

inline MeanSd aggregate_mean_sd(const std::vector<double>& values) {
  MeanSd out;
  out.count = static_cast<int>(values.size());
  if (values.empty()) return out;
  double sum = 0.0;
  for (const double v : values) sum += v;
  out.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (const double v : values) ss += (v - out.mean) * (v - out.mean);
    out.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return out;
}

}  // namespace vigil
