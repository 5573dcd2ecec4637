#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdio>
#include <map>
#include <mutex>
#include <set>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

#include "vigil/eval/grid.hpp"
#include "vigil/eval/metrics.hpp"
#include "vigil/eval/splits.hpp"
#include "vigil/pipeline.hpp"

namespace vigil {

enum class SchemeKind { Individual, Pooled100, SubjectHoldout };

inline const char* to_string(SchemeKind kind) {
  switch (kind) {
    case SchemeKind::Individual: return "individual";
    case SchemeKind::Pooled100: return "pooled100";
    case SchemeKind::SubjectHoldout: return "subject_holdout";
  }
  throw ParameterError("invalid scheme");
}

inline SchemeKind scheme_from_string(const std::string& name) {
  if (name == "individual") return SchemeKind::Individual;
  if (name == "pooled100") return SchemeKind::Pooled100;
  if (name == "subject_holdout") return SchemeKind::SubjectHoldout;
  throw ParameterError("unknown scheme '" + name +
                       "' (expected individual/pooled100/subject_holdout)");
}

struct SchemeSpec {
  SchemeKind kind = SchemeKind::Individual;
  double test_fraction = 0.25;  // individual / pooled100
  int cv_folds = 10;
  double holdout_fraction = 0.10;  // subject_holdout
  int repetitions = 10;            // subject_holdout
  bool exclude_repeat_subjects = true;

  void validate() const {
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
      throw ParameterError("test_fraction must lie in (0, 1)");
    if (cv_folds < 2) throw ParameterError("cv_folds must be >= 2");
    if (kind == SchemeKind::SubjectHoldout) {
      if (!(holdout_fraction > 0.0 && holdout_fraction < 1.0))
        throw ParameterError("holdout_fraction must lie in (0, 1)");
      if (repetitions < 1) throw ParameterError("repetitions must be >= 1");
    }
  }
};

struct Combination {
  Family family = Family::Rf;
  FeatureMode mode = FeatureMode::Psd5;
};

// Outcome of one evaluation unit (one recording for Individual, the single
// pooled unit for Pooled100, one repetition for SubjectHoldout). Carries the
// split bookkeeping needed for leakage audits and prediction dumps.
struct UnitResult {
  std::string unit_id;
  std::vector<std::string> test_subjects;  // subject_holdout only
  int n_train = 0;
  int n_test = 0;
  Hyperparams chosen;
  double cv_score = 0.0;
  bool model_converged = true;
  RegressionMetrics regression;
  ClassificationMetrics classification;
  bool scaled = false;
  ScalerParams scaler;
  std::vector<std::string> train_keys;  // "subject/experiment#epoch"
  std::vector<std::string> test_keys;
  Eigen::VectorXd y_true, y_pred;                    // regression task
  std::vector<DrowsinessLevel> label_true, label_pred;  // classification task
};

struct EvaluationResult {
  SchemeSpec scheme;
  Combination combination;
  Task task = Task::Classification;
  std::vector<UnitResult> units;
  MeanSd rmse, r2, accuracy, precision_macro, recall_macro, f1_macro;
};

namespace detail {

// One unit's working set: feature rows with provenance keys and targets.
struct UnitData {
  std::string unit_id;
  std::vector<std::string> test_subjects;
  Eigen::MatrixXd x;
  Eigen::VectorXd perclos;
  std::vector<DrowsinessLevel> labels;
  std::vector<std::string> keys;
  std::vector<int> train_rows;
  std::vector<int> test_rows;
  std::uint64_t seed = 0;
};

inline void append_recording_rows(UnitData& unit, const PreparedRecording& rec,
                                  FeatureMode mode) {
  const FeatureMatrix& fm = rec.features(mode);
  const Eigen::Index offset = unit.x.rows();
  unit.x.conservativeResize(offset + fm.rows.rows(), fm.rows.cols());
  unit.x.bottomRows(fm.rows.rows()) = fm.rows;
  unit.perclos.conservativeResize(offset + rec.perclos.size());
  unit.perclos.tail(rec.perclos.size()) = rec.perclos;
  for (Eigen::Index e = 0; e < rec.n_epochs(); ++e) {
    unit.labels.push_back(rec.labels[static_cast<std::size_t>(e)]);
    unit.keys.push_back(rec.key() + "#" + std::to_string(e));
  }
}

// Evaluates one prepared unit: scale from the training rows, grid search on
// the training rows, refit the winner, score the held-out rows.
inline UnitResult evaluate_unit(const UnitData& unit, const SchemeSpec& scheme,
                                const Combination& combination, Task task) {
  UnitResult result;
  result.unit_id = unit.unit_id;
  result.test_subjects = unit.test_subjects;
  result.n_train = static_cast<int>(unit.train_rows.size());
  result.n_test = static_cast<int>(unit.test_rows.size());
  for (const int r : unit.train_rows)
    result.train_keys.push_back(unit.keys[static_cast<std::size_t>(r)]);
  for (const int r : unit.test_rows)
    result.test_keys.push_back(unit.keys[static_cast<std::size_t>(r)]);

  const auto gather = [&](const std::vector<int>& rows, const Eigen::MatrixXd& source) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), source.cols());
    for (std::size_t i = 0; i < rows.size(); ++i)
      out.row(static_cast<Eigen::Index>(i)) = source.row(rows[i]);
    return out;
  };

  Eigen::MatrixXd train_x = gather(unit.train_rows, unit.x);
  Eigen::MatrixXd test_x = gather(unit.test_rows, unit.x);

  // Spectral and blink features are min-max scaled; the scaler is fitted on
  // the training rows only. The 136 time-domain statistics stay unscaled.
  if (combination.mode != FeatureMode::Eeg136) {
    result.scaled = true;
    result.scaler = minmax_fit(train_x);
    train_x = minmax_apply(train_x, result.scaler);
    test_x = minmax_apply(test_x, result.scaler);
  }

  Eigen::VectorXd train_y(static_cast<Eigen::Index>(unit.train_rows.size()));
  for (std::size_t i = 0; i < unit.train_rows.size(); ++i) {
    const int r = unit.train_rows[i];
    train_y[static_cast<Eigen::Index>(i)] =
        task == Task::Regression
            ? unit.perclos[r]
            : static_cast<double>(static_cast<int>(unit.labels[static_cast<std::size_t>(r)]));
  }

  const auto grid = default_grid(combination.family, task, train_x.cols());
  const auto search = grid_search(combination.family, task, grid, train_x, train_y,
                                  scheme.cv_folds, derive_seed(unit.seed, 1));
  result.chosen = search.best;
  result.cv_score = search.best_score;

  EstimatorSpec spec;
  spec.family = combination.family;
  spec.task = task;
  spec.params = search.best;
  spec.seed = derive_seed(unit.seed, 2);
  const TrainedModel model = train_model(spec, train_x, train_y);
  result.model_converged = model.converged();
  const Eigen::VectorXd predicted = model.predict(test_x);

  if (task == Task::Regression) {
    result.y_true.resize(static_cast<Eigen::Index>(unit.test_rows.size()));
    for (std::size_t i = 0; i < unit.test_rows.size(); ++i)
      result.y_true[static_cast<Eigen::Index>(i)] = unit.perclos[unit.test_rows[i]];
    result.y_pred = predicted;
    result.regression = regression_metrics(result.y_true, result.y_pred);
  } else {
    for (const int r : unit.test_rows)
      result.label_true.push_back(unit.labels[static_cast<std::size_t>(r)]);
    for (Eigen::Index i = 0; i < predicted.size(); ++i)
      result.label_pred.push_back(level_from_index(static_cast<int>(predicted[i])));
    result.classification = classification_metrics(result.label_true, result.label_pred);
  }
  return result;
}

// Disjoint-where-possible test-subject sets: consecutive chunks of a shuffled
// eligible list, reshuffling whenever fewer than a full chunk remains.
inline std::vector<std::vector<std::string>> holdout_test_sets(
    const std::vector<std::string>& eligible, int set_size, int repetitions,
    std::uint64_t seed) {
  std::vector<std::vector<std::string>> sets;
  std::vector<std::string> pool;
  std::size_t at = 0;
  std::uint64_t cycle = 0;
  while (static_cast<int>(sets.size()) < repetitions) {
    if (at + static_cast<std::size_t>(set_size) > pool.size()) {
      pool = eligible;
      Rng rng(derive_seed(seed, 0xC0FFEE + cycle++));
      rng.shuffle(pool);
      at = 0;
    }
    std::vector<std::string> chosen(pool.begin() + static_cast<std::ptrdiff_t>(at),
                                    pool.begin() + static_cast<std::ptrdiff_t>(at) + set_size);
    std::sort(chosen.begin(), chosen.end());
    sets.push_back(std::move(chosen));
    at += static_cast<std::size_t>(set_size);
  }
  return sets;
}

}  // namespace detail

// Runs one (scheme, family, feature-mode, task) evaluation over prepared
// recordings. Units are independent; `jobs` > 1 evaluates them in parallel
// with identical results.
inline EvaluationResult run_scheme(const std::vector<PreparedRecording>& recordings,
                                   const SchemeSpec& scheme, const Combination& combination,
                                   Task task, std::uint64_t seed, int jobs = 1) {
  scheme.validate();
  if (recordings.empty()) throw SchemeError("no recordings to evaluate");
  if (jobs < 1) throw ParameterError("jobs must be >= 1");

  // Canonical recording order keys the per-unit seed derivation.
  std::vector<const PreparedRecording*> ordered;
  for (const auto& rec : recordings) ordered.push_back(&rec);
  std::sort(ordered.begin(), ordered.end(),
            [](const PreparedRecording* a, const PreparedRecording* b) {
              return std::tie(a->subject_id, a->experiment_id) <
                     std::tie(b->subject_id, b->experiment_id);
            });
  for (std::size_t i = 1; i < ordered.size(); ++i)
    if (ordered[i]->key() == ordered[i - 1]->key())
      throw SchemeError("duplicate recording key " + ordered[i]->key());

  std::vector<detail::UnitData> units;

  switch (scheme.kind) {
    case SchemeKind::Individual: {
      for (std::size_t i = 0; i < ordered.size(); ++i) {
        detail::UnitData unit;
        unit.unit_id = ordered[i]->key();
        unit.seed = derive_seed(seed, i);
        detail::append_recording_rows(unit, *ordered[i], combination.mode);
        const auto split = shuffle_split(static_cast<int>(unit.keys.size()),
                                         scheme.test_fraction, derive_seed(unit.seed, 0));
        unit.train_rows = split.train;
        unit.test_rows = split.test;
        units.push_back(std::move(unit));
      }
      break;
    }
    case SchemeKind::Pooled100: {
      detail::UnitData unit;
      unit.unit_id = "pooled";
      unit.seed = derive_seed(seed, 0);
      for (const auto* rec : ordered)
        detail::append_recording_rows(unit, *rec, combination.mode);
      const auto split = shuffle_split(static_cast<int>(unit.keys.size()),
                                       scheme.test_fraction, derive_seed(unit.seed, 0));
      unit.train_rows = split.train;
      unit.test_rows = split.test;
      units.push_back(std::move(unit));
      break;
    }
    case SchemeKind::SubjectHoldout: {
      std::map<std::string, int> experiments_per_subject;
      for (const auto* rec : ordered) ++experiments_per_subject[rec->subject_id];
      std::vector<std::string> eligible;
      for (const auto& [subject, count] : experiments_per_subject)
        if (!scheme.exclude_repeat_subjects || count == 1) eligible.push_back(subject);

      const auto n_experiments = static_cast<double>(ordered.size());
      const int n_test_subjects = std::max(
          1, static_cast<int>(std::llround(scheme.holdout_fraction * n_experiments)));
      if (n_test_subjects > static_cast<int>(eligible.size()))
        throw SchemeError("holdout needs " + std::to_string(n_test_subjects) +
                          " eligible test subjects, corpus has " +
                          std::to_string(eligible.size()));
      const auto test_sets = detail::holdout_test_sets(eligible, n_test_subjects,
                                                       scheme.repetitions, seed);

      for (int rep = 0; rep < scheme.repetitions; ++rep) {
        detail::UnitData unit;
        char rep_id[16];
        std::snprintf(rep_id, sizeof(rep_id), "rep%02d", rep + 1);
        unit.unit_id = rep_id;
        unit.seed = derive_seed(seed, static_cast<std::uint64_t>(rep));
        unit.test_subjects = test_sets[static_cast<std::size_t>(rep)];
        const std::set<std::string> held(unit.test_subjects.begin(), unit.test_subjects.end());
        for (const auto* rec : ordered) {
          const Eigen::Index offset = unit.x.rows();
          detail::append_recording_rows(unit, *rec, combination.mode);
          const bool in_test = held.contains(rec->subject_id);
          for (Eigen::Index e = offset; e < unit.x.rows(); ++e)
            (in_test ? unit.test_rows : unit.train_rows).push_back(static_cast<int>(e));
        }
        if (unit.train_rows.empty())
          throw SchemeError("holdout repetition " + unit.unit_id + " leaves no training rows");
        if (unit.test_rows.empty())
          throw SchemeError("holdout repetition " + unit.unit_id + " leaves no test rows");
        units.push_back(std::move(unit));
      }
      break;
    }
  }

  EvaluationResult result;
  result.scheme = scheme;
  result.combination = combination;
  result.task = task;
  result.units.resize(units.size());

  std::exception_ptr failure;
  std::mutex failure_mutex;
  const auto worker_count = std::min<std::size_t>(static_cast<std::size_t>(jobs), units.size());
  if (worker_count <= 1) {
    for (std::size_t i = 0; i < units.size(); ++i)
      result.units[i] = detail::evaluate_unit(units[i], scheme, combination, task);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    for (std::size_t w = 0; w < worker_count; ++w) {
      workers.emplace_back([&] {
        for (;;) {
          const std::size_t i = next.fetch_add(1);
          if (i >= units.size()) return;
          try {
            result.units[i] = detail::evaluate_unit(units[i], scheme, combination, task);
          } catch (...) {
            std::lock_guard<std::mutex> lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
    for (auto& worker : workers) worker.join();
    if (failure) std::rethrow_exception(failure);
  }

  std::vector<double> rmse, r2, accuracy, precision, recall, f1;
  for (const UnitResult& unit : result.units) {
    if (task == Task::Regression) {
      rmse.push_back(unit.regression.rmse);
      if (unit.regression.r2_defined) r2.push_back(unit.regression.r2);
    } else {
      accuracy.push_back(unit.classification.accuracy);
      precision.push_back(unit.classification.precision_macro);
      recall.push_back(unit.classification.recall_macro);
      f1.push_back(unit.classification.f1_macro);
    }
  }
  result.rmse = aggregate_mean_sd(rmse);
  result.r2 = aggregate_mean_sd(r2);
  result.accuracy = aggregate_mean_sd(accuracy);
  result.precision_macro = aggregate_mean_sd(precision);
  result.recall_macro = aggregate_mean_sd(recall);
  result.f1_macro = aggregate_mean_sd(f1);
  return result;
}

}  // namespace vigil
