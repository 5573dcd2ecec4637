#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vigil/csv.hpp"
#include "vigil/eval/scheme.hpp"
#include "vigil/pipeline.hpp"

namespace vigil {

namespace detail {

inline std::string fixed4(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

inline std::string sanitize_component(std::string s) {
  for (char& c : s)
    if (c == '/' || c == '\\' || c == ' ') c = '-';
  return s;
}

inline nlohmann::json mean_sd_json(const MeanSd& m) {
  return {{"mean", m.mean}, {"sd", m.sd}, {"count", m.count}};
}

inline nlohmann::json hyperparams_json(const Hyperparams& params) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [name, value] : params) j[name] = value;
  return j;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace detail

// Per-recording summary kept in the report (the raw signal is not).
struct RecordingSummary {
  std::string subject_id;
  std::string experiment_id;
  int n_epochs = 0;
  ThresholdPair thresholds;
  int label_counts[3] = {0, 0, 0};
  std::vector<int> removed_components;
  bool ica_converged = true;
  int ica_iterations = 0;
};

inline RecordingSummary summarize_recording(const PreparedRecording& rec) {
  RecordingSummary s;
  s.subject_id = rec.subject_id;
  s.experiment_id = rec.experiment_id;
  s.n_epochs = static_cast<int>(rec.n_epochs());
  s.thresholds = rec.thresholds;
  for (const DrowsinessLevel level : rec.labels) ++s.label_counts[static_cast<int>(level)];
  s.removed_components = rec.removed_components;
  s.ica_converged = rec.ica_converged;
  s.ica_iterations = rec.ica_iterations;
  return s;
}

struct RunReport {
  std::uint64_t seed = 0;
  SchemeSpec scheme;
  std::vector<RecordingSummary> recordings;
  std::vector<EvaluationResult> evaluations;
};

inline nlohmann::json unit_to_json(const UnitResult& unit, Task task) {
  nlohmann::json j;
  j["unit_id"] = unit.unit_id;
  if (!unit.test_subjects.empty()) j["test_subjects"] = unit.test_subjects;
  j["n_train"] = unit.n_train;
  j["n_test"] = unit.n_test;
  j["chosen_params"] = detail::hyperparams_json(unit.chosen);
  j["cv_score"] = unit.cv_score;
  j["model_converged"] = unit.model_converged;
  if (task == Task::Regression) {
    j["rmse"] = unit.regression.rmse;
    if (unit.regression.r2_defined) j["r2"] = unit.regression.r2;
  } else {
    j["accuracy"] = unit.classification.accuracy;
    j["precision_macro"] = unit.classification.precision_macro;
    j["recall_macro"] = unit.classification.recall_macro;
    j["f1_macro"] = unit.classification.f1_macro;
    nlohmann::json confusion = nlohmann::json::array();
    for (int t = 0; t < 3; ++t) {
      nlohmann::json row = nlohmann::json::array();
      for (int p = 0; p < 3; ++p) row.push_back(unit.classification.confusion[t][p]);
      confusion.push_back(row);
    }
    j["confusion"] = confusion;
  }
  return j;
}

inline nlohmann::json evaluation_to_json(const EvaluationResult& eval) {
  nlohmann::json j;
  j["family"] = to_string(eval.combination.family);
  j["features"] = to_string(eval.combination.mode);
  j["task"] = to_string(eval.task);
  nlohmann::json aggregate;
  if (eval.task == Task::Regression) {
    aggregate["rmse"] = detail::mean_sd_json(eval.rmse);
    aggregate["r2"] = detail::mean_sd_json(eval.r2);
  } else {
    aggregate["accuracy"] = detail::mean_sd_json(eval.accuracy);
    aggregate["precision_macro"] = detail::mean_sd_json(eval.precision_macro);
    aggregate["recall_macro"] = detail::mean_sd_json(eval.recall_macro);
    aggregate["f1_macro"] = detail::mean_sd_json(eval.f1_macro);
  }
  j["aggregate"] = aggregate;
  nlohmann::json units = nlohmann::json::array();
  for (const UnitResult& unit : eval.units) units.push_back(unit_to_json(unit, eval.task));
  j["units"] = units;
  return j;
}

inline nlohmann::json report_to_json(const RunReport& report) {
  nlohmann::json j;
  j["format"] = "vigil-report-v1";
  j["seed"] = report.seed;
  nlohmann::json scheme;
  scheme["kind"] = to_string(report.scheme.kind);
  scheme["test_fraction"] = report.scheme.test_fraction;
  scheme["cv_folds"] = report.scheme.cv_folds;
  if (report.scheme.kind == SchemeKind::SubjectHoldout) {
    scheme["holdout_fraction"] = report.scheme.holdout_fraction;
    scheme["repetitions"] = report.scheme.repetitions;
    scheme["exclude_repeat_subjects"] = report.scheme.exclude_repeat_subjects;
  }
  j["scheme"] = scheme;

  nlohmann::json recs = nlohmann::json::array();
  for (const RecordingSummary& rec : report.recordings) {
    nlohmann::json r;
    r["subject_id"] = rec.subject_id;
    r["experiment_id"] = rec.experiment_id;
    r["n_epochs"] = rec.n_epochs;
    r["thresholds"] = {{"perclos_min", rec.thresholds.perclos_min},
                       {"perclos_max", rec.thresholds.perclos_max},
                       {"minor_upper", rec.thresholds.minor_upper},
                       {"moderate_upper", rec.thresholds.moderate_upper}};
    r["label_counts"] = {{"minor", rec.label_counts[0]},
                         {"moderate", rec.label_counts[1]},
                         {"severe", rec.label_counts[2]}};
    r["ica"] = {{"converged", rec.ica_converged},
                {"iterations", rec.ica_iterations},
                {"removed_components", rec.removed_components}};
    recs.push_back(r);
  }
  j["recordings"] = recs;

  nlohmann::json evals = nlohmann::json::array();
  for (const EvaluationResult& eval : report.evaluations) evals.push_back(evaluation_to_json(eval));
  j["evaluations"] = evals;
  return j;
}

inline void write_report_json(const std::filesystem::path& path, const RunReport& report) {
  detail::write_text_file(path, report_to_json(report).dump(2) + "\n");
}

// Inverse of report_to_json for the fields the renderers consume (aggregate
// metrics and summaries; per-row predictions live in their own CSV files).
inline RunReport report_from_json(const nlohmann::json& j) {
  RunReport report;
  try {
    if (j.at("format").get<std::string>() != "vigil-report-v1")
      throw FormatError("unsupported report format '" + j.at("format").get<std::string>() + "'");
    report.seed = j.at("seed").get<std::uint64_t>();
    const auto& scheme = j.at("scheme");
    report.scheme.kind = scheme_from_string(scheme.at("kind").get<std::string>());
    report.scheme.test_fraction = scheme.at("test_fraction").get<double>();
    report.scheme.cv_folds = scheme.at("cv_folds").get<int>();
    if (report.scheme.kind == SchemeKind::SubjectHoldout) {
      report.scheme.holdout_fraction = scheme.at("holdout_fraction").get<double>();
      report.scheme.repetitions = scheme.at("repetitions").get<int>();
      report.scheme.exclude_repeat_subjects = scheme.at("exclude_repeat_subjects").get<bool>();
    }
    for (const auto& r : j.at("recordings")) {
      RecordingSummary rec;
      rec.subject_id = r.at("subject_id").get<std::string>();
      rec.experiment_id = r.at("experiment_id").get<std::string>();
      rec.n_epochs = r.at("n_epochs").get<int>();
      const auto& th = r.at("thresholds");
      rec.thresholds.perclos_min = th.at("perclos_min").get<double>();
      rec.thresholds.perclos_max = th.at("perclos_max").get<double>();
      rec.thresholds.minor_upper = th.at("minor_upper").get<double>();
      rec.thresholds.moderate_upper = th.at("moderate_upper").get<double>();
      const auto& counts = r.at("label_counts");
      rec.label_counts[0] = counts.at("minor").get<int>();
      rec.label_counts[1] = counts.at("moderate").get<int>();
      rec.label_counts[2] = counts.at("severe").get<int>();
      const auto& ica = r.at("ica");
      rec.ica_converged = ica.at("converged").get<bool>();
      rec.ica_iterations = ica.at("iterations").get<int>();
      rec.removed_components = ica.at("removed_components").get<std::vector<int>>();
      report.recordings.push_back(std::move(rec));
    }
    const auto mean_sd = [](const nlohmann::json& m) {
      MeanSd out;
      out.mean = m.at("mean").get<double>();
      out.sd = m.at("sd").get<double>();
      out.count = m.at("count").get<int>();
      return out;
    };
    for (const auto& e : j.at("evaluations")) {
      EvaluationResult eval;
      eval.scheme = report.scheme;
      eval.combination.family = family_from_string(e.at("family").get<std::string>());
      eval.combination.mode = feature_mode_from_string(e.at("features").get<std::string>());
      eval.task = task_from_string(e.at("task").get<std::string>());
      const auto& aggregate = e.at("aggregate");
      if (eval.task == Task::Regression) {
        eval.rmse = mean_sd(aggregate.at("rmse"));
        eval.r2 = mean_sd(aggregate.at("r2"));
      } else {
        eval.accuracy = mean_sd(aggregate.at("accuracy"));
        eval.precision_macro = mean_sd(aggregate.at("precision_macro"));
        eval.recall_macro = mean_sd(aggregate.at("recall_macro"));
        eval.f1_macro = mean_sd(aggregate.at("f1_macro"));
      }
      report.evaluations.push_back(std::move(eval));
    }
  } catch (const nlohmann::json::exception& ex) {
    throw FormatError(std::string("report json: ") + ex.what());
  }
  return report;
}

inline RunReport load_report(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return report_from_json(j);
}

inline std::string render_report_md(const RunReport& report) {
  std::string md;
  md += "# Evaluation report\n\n";
  md += "- scheme: " + std::string(to_string(report.scheme.kind)) + "\n";
  md += "- seed: " + std::to_string(report.seed) + "\n";
  md += "- recordings: " + std::to_string(report.recordings.size()) + "\n\n";

  md += "## Recordings\n\n";
  md += "| subject | experiment | epochs | minor | moderate | severe | ICA removed |\n";
  md += "|---|---|---:|---:|---:|---:|---:|\n";
  for (const RecordingSummary& rec : report.recordings) {
    md += "| " + rec.subject_id + " | " + rec.experiment_id + " | " +
          std::to_string(rec.n_epochs) + " | " + std::to_string(rec.label_counts[0]) +
          " | " + std::to_string(rec.label_counts[1]) + " | " +
          std::to_string(rec.label_counts[2]) + " | " +
          std::to_string(rec.removed_components.size()) + " |\n";
  }
  md += "\n";

  bool any_clf = false, any_reg = false;
  for (const EvaluationResult& eval : report.evaluations)
    (eval.task == Task::Classification ? any_clf : any_reg) = true;

  if (any_clf) {
    md += "## Classification\n\n";
    md += "| family | features | accuracy | precision | recall | F1 |\n";
    md += "|---|---|---|---|---|---|\n";
    for (const EvaluationResult& eval : report.evaluations) {
      if (eval.task != Task::Classification) continue;
      const auto cell = [](const MeanSd& m) {
        return detail::fixed4(m.mean) + " ± " + detail::fixed4(m.sd);
      };
      md += "| " + std::string(to_string(eval.combination.family)) + " | " +
            std::string(to_string(eval.combination.mode)) + " | " + cell(eval.accuracy) +
            " | " + cell(eval.precision_macro) + " | " + cell(eval.recall_macro) + " | " +
            cell(eval.f1_macro) + " |\n";
    }
    md += "\n";
  }
  if (any_reg) {
    md += "## Regression\n\n";
    md += "| family | features | RMSE | R2 |\n";
    md += "|---|---|---|---|\n";
    for (const EvaluationResult& eval : report.evaluations) {
      if (eval.task != Task::Regression) continue;
      const auto cell = [](const MeanSd& m) {
        return detail::fixed4(m.mean) + " ± " + detail::fixed4(m.sd);
      };
      md += "| " + std::string(to_string(eval.combination.family)) + " | " +
            std::string(to_string(eval.combination.mode)) + " | " + cell(eval.rmse) + " | " +
            (eval.r2.count > 0 ? cell(eval.r2) : std::string("n/a")) + " |\n";
    }
    md += "\n";
  }
  return md;
}

inline void write_report_md(const std::filesystem::path& path, const RunReport& report) {
  detail::write_text_file(path, render_report_md(report));
}

inline void write_thresholds_csv(const std::filesystem::path& path,
                                 const std::vector<RecordingSummary>& recordings) {
  CsvWriter csv(path.string());
  csv.write_row({"subject_id", "experiment_id", "perclos_min", "perclos_max", "minor_upper",
           "moderate_upper"});
  for (const RecordingSummary& rec : recordings) {
    csv.write_row({rec.subject_id, rec.experiment_id, format_double(rec.thresholds.perclos_min),
             format_double(rec.thresholds.perclos_max),
             format_double(rec.thresholds.minor_upper),
             format_double(rec.thresholds.moderate_upper)});
  }
}

inline void write_features_csv(const std::filesystem::path& path,
                               const std::vector<PreparedRecording>& recordings,
                               FeatureMode mode) {
  CsvWriter csv(path.string());
  std::vector<std::string> header = {"subject_id", "experiment_id", "epoch", "perclos",
                                     "label"};
  bool header_written = false;
  for (const PreparedRecording& rec : recordings) {
    const FeatureMatrix& fm = rec.features(mode);
    if (!header_written) {
      for (const std::string& name : fm.feature_names) header.push_back(name);
      csv.write_row(header);
      header_written = true;
    }
    for (Eigen::Index e = 0; e < rec.n_epochs(); ++e) {
      std::vector<std::string> row = {rec.subject_id, rec.experiment_id, std::to_string(e),
                                      format_double(rec.perclos[e]),
                                      to_string(rec.labels[static_cast<std::size_t>(e)])};
      for (Eigen::Index c = 0; c < fm.rows.cols(); ++c)
        row.push_back(format_double(fm.rows(e, c)));
      csv.write_row(row);
    }
  }
}

// One prediction file per evaluation unit, named by scheme/family/features/
// task/unit so reruns land on identical paths.
inline std::vector<std::filesystem::path> write_predictions_csv(
    const std::filesystem::path& dir, const EvaluationResult& eval) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  for (const UnitResult& unit : eval.units) {
    const std::string name = std::string("predictions_") + to_string(eval.scheme.kind) + "_" +
                             to_string(eval.combination.family) + "_" +
                             to_string(eval.combination.mode) + "_" + to_string(eval.task) +
                             "_" + detail::sanitize_component(unit.unit_id) + ".csv";
    const std::filesystem::path path = dir / name;
    CsvWriter csv(path.string());
    if (eval.task == Task::Regression) {
      csv.write_row({"key", "y_true", "y_pred"});
      for (Eigen::Index i = 0; i < unit.y_true.size(); ++i)
        csv.write_row({unit.test_keys[static_cast<std::size_t>(i)], format_double(unit.y_true[i]),
                 format_double(unit.y_pred[i])});
    } else {
      csv.write_row({"key", "label_true", "label_pred"});
      for (std::size_t i = 0; i < unit.label_true.size(); ++i)
        csv.write_row({unit.test_keys[i], to_string(unit.label_true[i]),
                 to_string(unit.label_pred[i])});
    }
    written.push_back(path);
  }
  return written;
}

}  // namespace vigil
