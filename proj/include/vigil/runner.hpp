#pragma once

#include <algorithm>
#include <filesystem>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "vigil/config.hpp"
#include "vigil/models/serialize.hpp"
#include "vigil/pipeline.hpp"
#include "vigil/report.hpp"
#include "vigil/synth.hpp"

namespace vigil {

using ProgressFn = std::function<void(const std::string&)>;

namespace detail {

inline void no_progress(const std::string&) {}

}  // namespace detail

// Prepares the configured corpus one recording at a time, so only a single
// raw recording's signal data is resident at any point. Results come back in
// canonical (subject_id, experiment_id) order; per-recording ICA seeds are
// derived from that order, not from directory enumeration.
inline std::vector<PreparedRecording> prepare_corpus(const RunConfig& cfg,
                                                     const ProgressFn& progress =
                                                         detail::no_progress) {
  cfg.validate();
  std::vector<PreparedRecording> prepared;

  if (cfg.data_dir) {
    auto dirs = list_recording_dirs(*cfg.data_dir);
    std::vector<std::pair<std::pair<std::string, std::string>, std::filesystem::path>> keyed;
    for (const auto& dir : dirs) keyed.emplace_back(read_recording_ids(dir), dir);
    std::sort(keyed.begin(), keyed.end());
    for (std::size_t i = 1; i < keyed.size(); ++i)
      if (keyed[i].first == keyed[i - 1].first)
        throw ValidationError("duplicate recording " + keyed[i].first.first + "/" +
                              keyed[i].first.second + " (" + keyed[i].second.string() + " and " +
                              keyed[i - 1].second.string() + ")");
    for (std::size_t i = 0; i < keyed.size(); ++i) {
      progress("prepare " + keyed[i].first.first + "/" + keyed[i].first.second);
      const Recording rec = load_recording(keyed[i].second);
      if (rec.subject_id != keyed[i].first.first || rec.experiment_id != keyed[i].first.second)
        throw ValidationError(keyed[i].second.string() + ": manifest ids changed during load");
      prepared.push_back(prepare_recording(rec, cfg.pipeline, derive_seed(cfg.seed, i)));
    }
  } else {
    const auto specs = synth_corpus_specs(cfg.synth->n_subjects, cfg.synth->n_epochs, cfg.seed,
                                          cfg.synth->repeat_subjects, cfg.synth->prototype);
    for (std::size_t i = 0; i < specs.size(); ++i) {
      progress("synthesize+prepare " + specs[i].subject_id + "/" + specs[i].experiment_id);
      const Recording rec = synth_recording(specs[i]);
      prepared.push_back(prepare_recording(rec, cfg.pipeline, derive_seed(cfg.seed, i)));
    }
  }
  return prepared;
}

// Runs every configured (family, features) x task evaluation over a prepared
// corpus. Evaluation seeds depend only on the run seed and the position in
// the combination/task list, never on wall time or thread scheduling.
inline RunReport evaluate_corpus(const std::vector<PreparedRecording>& prepared,
                                 const RunConfig& cfg,
                                 const ProgressFn& progress = detail::no_progress) {
  RunReport report;
  report.seed = cfg.seed;
  report.scheme = cfg.scheme;
  for (const PreparedRecording& rec : prepared)
    report.recordings.push_back(summarize_recording(rec));

  const std::vector<Task> tasks = selected_tasks(cfg.task);
  std::uint64_t evaluation_index = 0;
  for (const Combination& combo : cfg.combinations) {
    for (const Task task : tasks) {
      progress(std::string("evaluate ") + to_string(combo.family) + "/" + to_string(combo.mode) +
               "/" + to_string(task));
      report.evaluations.push_back(run_scheme(prepared, cfg.scheme, combo, task,
                                              derive_seed(cfg.seed, 0x5EED00 + evaluation_index),
                                              cfg.jobs));
      ++evaluation_index;
    }
  }
  return report;
}

// Writes report.json / report.md / thresholds.csv / features_<mode>.csv and
// per-unit prediction files under `output_dir`. Output bytes are a pure
// function of the inputs; reruns produce identical files.
inline void write_run_outputs(const std::filesystem::path& output_dir, const RunReport& report,
                              const std::vector<PreparedRecording>& prepared,
                              const RunConfig& cfg) {
  std::filesystem::create_directories(output_dir);
  write_report_json(output_dir / "report.json", report);
  write_report_md(output_dir / "report.md", report);
  write_thresholds_csv(output_dir / "thresholds.csv", report.recordings);

  std::set<FeatureMode> modes;
  for (const Combination& combo : cfg.combinations) modes.insert(combo.mode);
  for (const FeatureMode mode : modes)
    write_features_csv(output_dir / (std::string("features_") + to_string(mode) + ".csv"),
                       prepared, mode);

  for (const EvaluationResult& eval : report.evaluations)
    write_predictions_csv(output_dir, eval);

  if (cfg.dump_ica) {
    nlohmann::json j = nlohmann::json::array();
    for (const PreparedRecording& rec : prepared) {
      nlohmann::json entry;
      entry["subject_id"] = rec.subject_id;
      entry["experiment_id"] = rec.experiment_id;
      entry["converged"] = rec.ica_converged;
      entry["iterations"] = rec.ica_iterations;
      entry["removed_components"] = rec.removed_components;
      entry["components"] = rec.ica_unmixing.rows();
      entry["unmixing"] = detail::encode_matrix(rec.ica_unmixing);
      entry["mixing"] = detail::encode_matrix(rec.ica_mixing);
      j.push_back(entry);
    }
    detail::write_text_file(output_dir / "ica.json", j.dump(2) + "\n");
  }
}

// Full pipeline: corpus -> preprocessing -> evaluations -> output files.
inline RunReport execute_run(const RunConfig& cfg,
                             const ProgressFn& progress = detail::no_progress) {
  const std::vector<PreparedRecording> prepared = prepare_corpus(cfg, progress);
  const RunReport report = evaluate_corpus(prepared, cfg, progress);
  progress("write outputs -> " + cfg.output_dir);
  write_run_outputs(cfg.output_dir, report, prepared, cfg);
  return report;
}

}  // namespace vigil
