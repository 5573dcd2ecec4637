#pragma once

#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vigil/errors.hpp"
#include "vigil/eval/scheme.hpp"
#include "vigil/synth.hpp"

namespace vigil {

enum class TaskSelection { Regression, Classification, Both };

inline TaskSelection task_selection_from_string(const std::string& name) {
  if (name == "regression") return TaskSelection::Regression;
  if (name == "classification") return TaskSelection::Classification;
  if (name == "both") return TaskSelection::Both;
  throw ConfigError("task must be regression/classification/both, got '" + name + "'");
}

inline std::vector<Task> selected_tasks(TaskSelection selection) {
  switch (selection) {
    case TaskSelection::Regression: return {Task::Regression};
    case TaskSelection::Classification: return {Task::Classification};
    case TaskSelection::Both: return {Task::Classification, Task::Regression};
  }
  throw ConfigError("invalid task selection");
}

struct SynthCorpusConfig {
  int n_subjects = 5;
  int n_epochs = 900;
  int repeat_subjects = 0;
  SynthSpec prototype;  // subject/experiment ids and seed are assigned per recording
};

struct RunConfig {
  std::optional<std::string> data_dir;
  std::optional<SynthCorpusConfig> synth;
  SchemeSpec scheme;
  std::vector<Combination> combinations = {{Family::Rf, FeatureMode::Psd5}};
  TaskSelection task = TaskSelection::Both;
  std::uint64_t seed = 1;
  std::string output_dir = "out";
  int jobs = 1;
  bool dump_ica = false;
  PipelineParams pipeline;

  void validate() const {
    if (data_dir.has_value() == synth.has_value())
      throw ConfigError("exactly one of data_dir and synth must be given");
    if (synth) {
      if (synth->n_subjects < 1) throw ConfigError("synth.n_subjects must be >= 1");
      if (synth->repeat_subjects < 0 || synth->repeat_subjects > synth->n_subjects)
        throw ConfigError("synth.repeat_subjects must lie in [0, n_subjects]");
      if (synth->n_epochs < 4) throw ConfigError("synth.n_epochs must be >= 4");
    }
    if (combinations.empty()) throw ConfigError("combinations must not be empty");
    if (jobs < 1) throw ConfigError("jobs must be >= 1");
    scheme.validate();
    pipeline.validate();
  }
};

namespace detail {

inline void require_object(const nlohmann::json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path + " must be an object");
}

inline void reject_unknown_keys(const nlohmann::json& j, const std::string& path,
                                const std::vector<std::string>& allowed) {
  for (const auto& item : j.items()) {
    bool known = false;
    for (const std::string& name : allowed)
      if (item.key() == name) {
        known = true;
        break;
      }
    if (!known)
      throw ConfigError("unknown key '" + (path.empty() ? item.key() : path + "." + item.key()) +
                        "'");
  }
}

inline double config_double(const nlohmann::json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path + " must be a number");
  return j.get<double>();
}

inline int config_int(const nlohmann::json& j, const std::string& path) {
  if (!j.is_number_integer()) throw ConfigError(path + " must be an integer");
  return j.get<int>();
}

inline bool config_bool(const nlohmann::json& j, const std::string& path) {
  if (!j.is_boolean()) throw ConfigError(path + " must be a boolean");
  return j.get<bool>();
}

inline std::string config_string(const nlohmann::json& j, const std::string& path) {
  if (!j.is_string()) throw ConfigError(path + " must be a string");
  return j.get<std::string>();
}

inline SynthCorpusConfig parse_synth_config(const nlohmann::json& j) {
  require_object(j, "synth");
  reject_unknown_keys(j, "synth",
                      {"n_subjects", "n_epochs", "repeat_subjects", "drowsiness_walk_step",
                       "mains_amplitude_uv", "blink_rate_per_min", "snr_band_modulation"});
  SynthCorpusConfig cfg;
  if (j.contains("n_subjects")) cfg.n_subjects = config_int(j["n_subjects"], "synth.n_subjects");
  if (j.contains("n_epochs")) cfg.n_epochs = config_int(j["n_epochs"], "synth.n_epochs");
  if (j.contains("repeat_subjects"))
    cfg.repeat_subjects = config_int(j["repeat_subjects"], "synth.repeat_subjects");
  if (j.contains("drowsiness_walk_step"))
    cfg.prototype.drowsiness_walk_step =
        config_double(j["drowsiness_walk_step"], "synth.drowsiness_walk_step");
  if (j.contains("mains_amplitude_uv"))
    cfg.prototype.mains_amplitude_uv =
        config_double(j["mains_amplitude_uv"], "synth.mains_amplitude_uv");
  if (j.contains("blink_rate_per_min"))
    cfg.prototype.blink_rate_per_min =
        config_double(j["blink_rate_per_min"], "synth.blink_rate_per_min");
  if (j.contains("snr_band_modulation"))
    cfg.prototype.snr_band_modulation =
        config_double(j["snr_band_modulation"], "synth.snr_band_modulation");
  return cfg;
}

inline SchemeSpec parse_scheme_config(const nlohmann::json& j) {
  require_object(j, "scheme");
  reject_unknown_keys(j, "scheme",
                      {"kind", "test_fraction", "cv_folds", "holdout_fraction", "repetitions",
                       "exclude_repeat_subjects"});
  SchemeSpec spec;
  if (j.contains("kind")) spec.kind = scheme_from_string(config_string(j["kind"], "scheme.kind"));
  if (j.contains("test_fraction"))
    spec.test_fraction = config_double(j["test_fraction"], "scheme.test_fraction");
  if (j.contains("cv_folds")) spec.cv_folds = config_int(j["cv_folds"], "scheme.cv_folds");
  if (j.contains("holdout_fraction"))
    spec.holdout_fraction = config_double(j["holdout_fraction"], "scheme.holdout_fraction");
  if (j.contains("repetitions"))
    spec.repetitions = config_int(j["repetitions"], "scheme.repetitions");
  if (j.contains("exclude_repeat_subjects"))
    spec.exclude_repeat_subjects =
        config_bool(j["exclude_repeat_subjects"], "scheme.exclude_repeat_subjects");
  return spec;
}

inline std::vector<Combination> parse_combinations(const nlohmann::json& j) {
  if (!j.is_array() || j.empty())
    throw ConfigError("combinations must be a non-empty array");
  std::vector<Combination> combos;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string path = "combinations[" + std::to_string(i) + "]";
    require_object(j[i], path);
    reject_unknown_keys(j[i], path, {"family", "features"});
    if (!j[i].contains("family") || !j[i].contains("features"))
      throw ConfigError(path + " needs family and features");
    Combination combo;
    combo.family = family_from_string(config_string(j[i]["family"], path + ".family"));
    combo.mode = feature_mode_from_string(config_string(j[i]["features"], path + ".features"));
    combos.push_back(combo);
  }
  return combos;
}

inline PipelineParams parse_pipeline_config(const nlohmann::json& j) {
  require_object(j, "pipeline");
  reject_unknown_keys(j, "pipeline",
                      {"notch_hz", "notch_bandwidth_hz", "bandpass_low_hz", "bandpass_high_hz",
                       "blink_z", "blink_refractory_s", "eog_correlation_threshold",
                       "ica_max_iterations", "ica_tolerance", "minor_fraction",
                       "moderate_fraction"});
  PipelineParams params;
  if (j.contains("notch_hz")) params.notch_hz = config_double(j["notch_hz"], "pipeline.notch_hz");
  if (j.contains("notch_bandwidth_hz"))
    params.notch_bandwidth_hz =
        config_double(j["notch_bandwidth_hz"], "pipeline.notch_bandwidth_hz");
  if (j.contains("bandpass_low_hz"))
    params.bandpass_lo_hz = config_double(j["bandpass_low_hz"], "pipeline.bandpass_low_hz");
  if (j.contains("bandpass_high_hz"))
    params.bandpass_hi_hz = config_double(j["bandpass_high_hz"], "pipeline.bandpass_high_hz");
  if (j.contains("blink_z"))
    params.blink_z_threshold = config_double(j["blink_z"], "pipeline.blink_z");
  if (j.contains("blink_refractory_s"))
    params.blink_refractory_s =
        config_double(j["blink_refractory_s"], "pipeline.blink_refractory_s");
  if (j.contains("eog_correlation_threshold"))
    params.eog_correlation_threshold =
        config_double(j["eog_correlation_threshold"], "pipeline.eog_correlation_threshold");
  if (j.contains("ica_max_iterations"))
    params.ica_max_iterations = config_int(j["ica_max_iterations"], "pipeline.ica_max_iterations");
  if (j.contains("ica_tolerance"))
    params.ica_tolerance = config_double(j["ica_tolerance"], "pipeline.ica_tolerance");
  if (j.contains("minor_fraction"))
    params.threshold_minor_fraction =
        config_double(j["minor_fraction"], "pipeline.minor_fraction");
  if (j.contains("moderate_fraction"))
    params.threshold_moderate_fraction =
        config_double(j["moderate_fraction"], "pipeline.moderate_fraction");
  return params;
}

}  // namespace detail

inline RunConfig parse_run_config(const nlohmann::json& j) {
  detail::require_object(j, "config");
  detail::reject_unknown_keys(j, "",
                              {"data_dir", "synth", "scheme", "combinations", "task", "seed",
                               "output_dir", "jobs", "dump_ica", "pipeline"});
  RunConfig cfg;
  if (j.contains("data_dir"))
    cfg.data_dir = detail::config_string(j["data_dir"], "data_dir");
  if (j.contains("synth")) cfg.synth = detail::parse_synth_config(j["synth"]);
  if (j.contains("scheme")) cfg.scheme = detail::parse_scheme_config(j["scheme"]);
  if (j.contains("combinations")) cfg.combinations = detail::parse_combinations(j["combinations"]);
  if (j.contains("task"))
    cfg.task = task_selection_from_string(detail::config_string(j["task"], "task"));
  if (j.contains("seed")) {
    if (!j["seed"].is_number_integer()) throw ConfigError("seed must be an integer");
    cfg.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("output_dir"))
    cfg.output_dir = detail::config_string(j["output_dir"], "output_dir");
  if (j.contains("jobs")) cfg.jobs = detail::config_int(j["jobs"], "jobs");
  if (j.contains("dump_ica")) cfg.dump_ica = detail::config_bool(j["dump_ica"], "dump_ica");
  if (j.contains("pipeline")) cfg.pipeline = detail::parse_pipeline_config(j["pipeline"]);
  cfg.validate();
  return cfg;
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config " + path + ": " + e.what());
  }
  return parse_run_config(j);
}

}  // namespace vigil
