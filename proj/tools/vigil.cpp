#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>

#include <CLI11.hpp>

#include "vigil/vigil.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumerical = 4;

template <typename Fn>
int guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const vigil::ConfigError& e) {
    std::fprintf(stderr, "vigil: %s\n", e.what());
    return kExitConfig;
  } catch (const vigil::ParameterError& e) {
    std::fprintf(stderr, "vigil: %s\n", e.what());
    return kExitConfig;
  } catch (const vigil::NumericalError& e) {
    std::fprintf(stderr, "vigil: %s\n", e.what());
    return kExitNumerical;
  } catch (const vigil::DegenerateInputError& e) {
    std::fprintf(stderr, "vigil: %s\n", e.what());
    return kExitNumerical;
  } catch (const vigil::Error& e) {
    std::fprintf(stderr, "vigil: %s\n", e.what());
    return kExitData;
  }
}

struct SynthArgs {
  std::string out_dir;
  int subjects = 5;
  int epochs = 120;
  int repeat_subjects = 0;
  std::uint64_t seed = 1;
  vigil::SynthSpec prototype;
};

int cmd_synth(const SynthArgs& args) {
  const auto specs = vigil::synth_corpus_specs(args.subjects, args.epochs, args.seed,
                                               args.repeat_subjects, args.prototype);
  for (const auto& spec : specs) {
    const vigil::Recording rec = vigil::synth_recording(spec);
    const std::filesystem::path dir = std::filesystem::path(args.out_dir) /
                                      (spec.subject_id + "_" + spec.experiment_id);
    vigil::write_recording(rec, dir);
    std::printf("wrote %s (%lld samples, %lld epochs)\n", dir.string().c_str(),
                static_cast<long long>(rec.eeg.rows()),
                static_cast<long long>(rec.perclos.size()));
  }
  return kExitOk;
}

int cmd_inspect(const std::string& data_dir) {
  const auto dirs = vigil::list_recording_dirs(data_dir);
  std::printf("%-10s %-10s %10s %8s %8s %8s %8s  %s\n", "subject", "experiment", "samples",
              "epochs", "minor", "moderate", "severe", "perclos range");
  for (const auto& dir : dirs) {
    const vigil::Recording rec = vigil::load_recording(dir);
    const auto thresholds = vigil::compute_thresholds(rec.perclos);
    const auto labels = vigil::discretize(rec.perclos, thresholds);
    int counts[3] = {0, 0, 0};
    for (const auto level : labels) ++counts[static_cast<int>(level)];
    std::printf("%-10s %-10s %10lld %8lld %8d %8d %8d  [%.3f, %.3f]\n", rec.subject_id.c_str(),
                rec.experiment_id.c_str(), static_cast<long long>(rec.eeg.rows()),
                static_cast<long long>(rec.perclos.size()), counts[0], counts[1], counts[2],
                thresholds.perclos_min, thresholds.perclos_max);
  }
  return kExitOk;
}

struct RunArgs {
  std::string config_path;
  std::string data_dir;
  std::string out_dir;
  std::int64_t seed = -1;
  int jobs = 0;
  bool quiet = false;
};

int cmd_run(const RunArgs& args) {
  vigil::RunConfig cfg;
  if (!args.config_path.empty()) cfg = vigil::load_run_config(args.config_path);
  if (!args.data_dir.empty()) {
    cfg.data_dir = args.data_dir;
    cfg.synth.reset();
  }
  if (!args.out_dir.empty()) cfg.output_dir = args.out_dir;
  if (args.seed >= 0) cfg.seed = static_cast<std::uint64_t>(args.seed);
  if (args.jobs > 0) cfg.jobs = args.jobs;
  cfg.validate();

  const vigil::ProgressFn progress =
      args.quiet ? vigil::ProgressFn([](const std::string&) {})
                 : vigil::ProgressFn(
                       [](const std::string& msg) { std::printf("[vigil] %s\n", msg.c_str()); });
  const vigil::RunReport report = vigil::execute_run(cfg, progress);
  std::printf("%s", vigil::render_report_md(report).c_str());
  std::printf("outputs written to %s\n", cfg.output_dir.c_str());
  return kExitOk;
}

int cmd_report(const std::string& report_path, const std::string& out_path) {
  const vigil::RunReport report = vigil::load_report(report_path);
  const std::string md = vigil::render_report_md(report);
  if (out_path.empty()) {
    std::printf("%s", md.c_str());
  } else {
    vigil::detail::write_text_file(out_path, md);
    std::printf("wrote %s\n", out_path.c_str());
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"EEG/EOG drowsiness-detection experimentation toolkit"};
  app.require_subcommand(1);

  SynthArgs synth_args;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic recording corpus");
  synth->add_option("--out", synth_args.out_dir, "Output corpus directory")->required();
  synth->add_option("--subjects", synth_args.subjects, "Number of subjects");
  synth->add_option("--epochs", synth_args.epochs, "Epochs per recording (8 s each)");
  synth->add_option("--repeat-subjects", synth_args.repeat_subjects,
                    "How many subjects get a second session");
  synth->add_option("--seed", synth_args.seed, "Corpus seed");
  synth->add_option("--walk-step", synth_args.prototype.drowsiness_walk_step,
                    "Drowsiness random-walk step per epoch");
  synth->add_option("--mains-uv", synth_args.prototype.mains_amplitude_uv,
                    "60 Hz interference amplitude (uV)");
  synth->add_option("--blink-rate", synth_args.prototype.blink_rate_per_min,
                    "Blink rate per minute at full drowsiness");
  synth->add_option("--snr", synth_args.prototype.snr_band_modulation,
                    "Strength of the label-linked band-power signal [0,1]");

  std::string inspect_dir;
  auto* inspect = app.add_subcommand("inspect", "Summarize a corpus or single recording");
  inspect->add_option("data", inspect_dir, "Corpus root or recording directory")->required();

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "Preprocess, evaluate, and write reports");
  run->add_option("--config", run_args.config_path, "Run configuration JSON");
  run->add_option("--data", run_args.data_dir, "Recording corpus (overrides config data_dir)");
  run->add_option("--out", run_args.out_dir, "Output directory (overrides config)");
  run->add_option("--seed", run_args.seed, "Run seed (overrides config)");
  run->add_option("--jobs", run_args.jobs, "Worker threads for evaluation units");
  run->add_flag("--quiet", run_args.quiet, "Suppress progress lines");

  std::string report_in, report_out;
  auto* report = app.add_subcommand("report", "Render report.json as markdown");
  report->add_option("report", report_in, "Path to report.json")->required();
  report->add_option("--out", report_out, "Write markdown here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (synth->parsed()) return guarded([&] { return cmd_synth(synth_args); });
  if (inspect->parsed()) return guarded([&] { return cmd_inspect(inspect_dir); });
  if (run->parsed()) return guarded([&] { return cmd_run(run_args); });
  if (report->parsed()) return guarded([&] { return cmd_report(report_in, report_out); });
  return kExitConfig;
}
