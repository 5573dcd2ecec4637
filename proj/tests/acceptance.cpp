// Acceptance gate. Each criterion is a self-contained check over the public
// library surface, runnable alone (--criterion N) or all together; every run
// ends with one [PASS]/[FAIL] line per criterion. Criterion 8 needs a real
// converted dataset and is skipped (exit 77) when none is supplied via
// --data or VIGIL_DATASET_DIR.

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "vigil/vigil.hpp"

namespace {

using namespace vigil;
namespace fs = std::filesystem;

int g_failures = 0;

void require(bool ok, const std::string& what) {
  if (!ok) {
    ++g_failures;
    std::printf("       FAIL: %s\n", what.c_str());
  }
}

void note(const std::string& what) { std::printf("       %s\n", what.c_str()); }

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

double db_attenuation(double gain) { return -20.0 * std::log10(gain); }

// ---------------------------------------------------------------- criterion 1

void criterion_thresholds() {
  Eigen::VectorXd unit(2);
  unit << 0.0, 1.0;
  const ThresholdPair t = compute_thresholds(unit);
  require(t.minor_upper == 0.125, "unit-range minor cut must be exactly 0.125");
  require(t.moderate_upper == 0.30, "unit-range moderate cut must be exactly 0.30");

  Rng rng(20260816);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform_below(64));
    Eigen::VectorXd series(n);
    for (int i = 0; i < n; ++i) series[i] = rng.uniform(0.0, 1.0);
    const ThresholdPair th = compute_thresholds(series);
    const double lo = series.minCoeff();
    const double hi = series.maxCoeff();
    require(std::abs(th.minor_upper - (lo + 0.125 * (hi - lo))) <= 1e-15,
            "minor cut must equal min + 0.125 * range to 1e-15");
    require(std::abs(th.moderate_upper - (lo + 0.30 * (hi - lo))) <= 1e-15,
            "moderate cut must equal min + 0.30 * range to 1e-15");
    require(th.perclos_min == lo && th.perclos_max == hi,
            "stored range must be the exact observed min/max");

    const auto labels = discretize(series, th);
    for (int i = 0; i < n; ++i) {
      const DrowsinessLevel expected = series[i] < th.minor_upper ? DrowsinessLevel::Minor
                                       : series[i] < th.moderate_upper
                                           ? DrowsinessLevel::Moderate
                                           : DrowsinessLevel::Severe;
      require(labels[static_cast<std::size_t>(i)] == expected,
              "labels must honor the half-open threshold intervals");
    }
  }
}

// ---------------------------------------------------------------- criterion 2

void criterion_filters() {
  // Both filters run forward-backward in the pipeline, so the contract is on
  // the applied (zero-phase) response |H|^2: twice the single-pass decibels.
  const SosChain notch = design_notch(60.0, 2.0, 200.0);
  const auto notch_db = [&](double f) { return 2.0 * db_attenuation(sos_gain(notch, f, 200.0)); };
  require(notch_db(60.0) >= 30.0, "notch must attenuate 60 Hz by at least 30 dB");
  require(notch_db(10.0) <= 1.0, "notch must pass 10 Hz within 1 dB");

  const SosChain bp = design_bandpass4(1.0, 30.0, 200.0);
  const auto bp_db = [&](double f) { return 2.0 * db_attenuation(sos_gain(bp, f, 200.0)); };
  require(bp_db(0.25) >= 20.0, "band-pass must attenuate 0.25 Hz by at least 20 dB");
  require(bp_db(60.0) >= 20.0, "band-pass must attenuate 60 Hz by at least 20 dB");
  require(bp_db(10.0) <= 3.0, "band-pass must pass 10 Hz within 3 dB");

  for (const Eigen::Index n : {4000, 4001}) {
    Eigen::VectorXd tone(n);
    for (Eigen::Index i = 0; i < n; ++i)
      tone[i] = std::sin(2.0 * std::numbers::pi * 10.0 * static_cast<double>(i) / 200.0);
    const TimeSeries out = resample_200_to_60({tone, 200.0});
    require(out.samples.size() == (n * 3) / 10,
            "resampled length must be floor(3n/10) for n=" + std::to_string(n));
    require(out.rate_hz == 60.0, "resampled rate must be 60 Hz");
    const double freq = oracle::dominant_frequency(out.samples, 60.0);
    require(std::abs(freq - 10.0) <= 0.1,
            "resampled 10 Hz tone measured at " + fmt(freq) + " Hz (must stay within 0.1)");
  }
}

// ---------------------------------------------------------------- criterion 3

void criterion_ica() {
  constexpr Eigen::Index kSamples = 2400;
  constexpr int kChannels = 17;
  for (int trial = 0; trial < 20; ++trial) {
    const std::uint64_t seed = 1000 + static_cast<std::uint64_t>(trial);
    Rng rng(seed);
    Eigen::MatrixXd sources(kSamples, 3);
    const double w_sine = rng.uniform(0.08, 0.16);
    const double w_square = rng.uniform(0.015, 0.05);
    const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    for (Eigen::Index t = 0; t < kSamples; ++t) {
      sources(t, 0) = std::sin(w_sine * static_cast<double>(t) + phase);
      sources(t, 1) = std::sin(w_square * static_cast<double>(t)) >= 0.0 ? 1.0 : -1.0;
      sources(t, 2) = rng.uniform(-std::numbers::sqrt3, std::numbers::sqrt3);
    }
    Eigen::MatrixXd mixing(kChannels, 3);
    for (Eigen::Index r = 0; r < kChannels; ++r)
      for (Eigen::Index c = 0; c < 3; ++c) mixing(r, c) = rng.uniform(-1.0, 1.0);
    Eigen::MatrixXd x = sources * mixing.transpose();
    for (Eigen::Index r = 0; r < x.rows(); ++r)
      for (Eigen::Index c = 0; c < x.cols(); ++c) x(r, c) += 0.05 * rng.normal();

    // Convergence is not demanded here: 14 of the 17 whitened directions are
    // Gaussian sensor noise with no identifiable rotation, so the symmetric
    // fixed-point iteration keeps drifting there while the three structured
    // sources lock in. Recovery quality is what matters.
    const IcaDecomposition ica = fit_fastica(x, seed + 7);
    const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(kChannels, kChannels);
    const double wa_error = (ica.unmixing * ica.mixing - identity).cwiseAbs().maxCoeff();
    require(wa_error < 1e-6, "mixture " + std::to_string(trial) +
                                 ": unmixing * mixing deviates from identity by " +
                                 std::to_string(wa_error));
    for (Eigen::Index s = 0; s < 3; ++s) {
      double best = 0.0;
      for (Eigen::Index k = 0; k < ica.sources.cols(); ++k)
        best = std::max(best, std::abs(oracle::pearson(sources.col(s), ica.sources.col(k))));
      require(best >= 0.95, "mixture " + std::to_string(trial) + ": source " +
                                std::to_string(s) + " recovered at |r|=" + fmt(best) +
                                " (must be >= 0.95)");
    }
  }

  // Ocular-artifact removal: a blink train leaking into the first channels
  // must be flagged against the EOG reference and vanish on reconstruction.
  constexpr Eigen::Index kBlinkSamples = 3600;
  Rng rng(99);
  Eigen::VectorXd blink = Eigen::VectorXd::Zero(kBlinkSamples);
  for (Eigen::Index center = 300; center < kBlinkSamples - 300; center += 450)
    add_blink_pulse(blink, center, 90, 150.0);
  Eigen::MatrixXd x(kBlinkSamples, kChannels);
  for (Eigen::Index r = 0; r < kBlinkSamples; ++r)
    for (Eigen::Index c = 0; c < kChannels; ++c) x(r, c) = rng.normal();
  const double leak[3] = {0.8, 0.6, 0.4};
  for (int c = 0; c < 3; ++c) x.col(c) += leak[c] * blink;

  const double before = std::abs(oracle::pearson(x.col(0), blink));
  require(before > 0.2, "frontal channel must start visibly blink-contaminated");
  const IcaDecomposition ica = fit_fastica(x, 123);
  const std::vector<int> flagged = flag_artifact_components(ica, blink, 0.6);
  require(!flagged.empty(), "blink component must be flagged against the EOG reference");
  const Eigen::MatrixXd cleaned = reconstruct_without(ica, flagged);
  const double after = std::abs(oracle::pearson(cleaned.col(0), blink));
  require(after < 0.2, "cleaned frontal channel EOG correlation is " + fmt(after) +
                           " (must drop below 0.2)");
}

// ---------------------------------------------------------------- criterion 4

void criterion_features() {
  Rng rng(77);
  const auto relative_close = [](double a, double b, double tol) {
    return std::abs(a - b) <= tol * std::max({std::abs(a), std::abs(b), 1e-12});
  };

  for (int trial = 0; trial < 100; ++trial) {
    Eigen::VectorXd v(kCleanEpochSamples);
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.uniform(-50.0, 50.0);
    const Eigen::VectorXd stats = channel_stats(v);

    double mean = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) mean += v[i];
    mean /= static_cast<double>(v.size());
    double var = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) var += (v[i] - mean) * (v[i] - mean);
    var /= static_cast<double>(v.size());
    const std::vector<double> values(v.data(), v.data() + v.size());

    require(relative_close(stats[0], mean, 1e-9), "channel mean must match the oracle");
    require(relative_close(stats[1], std::sqrt(var), 1e-9), "channel sd must match the oracle");
    require(relative_close(stats[2], var, 1e-9), "channel variance must match the oracle");
    const double percentiles[5] = {0.05, 0.25, 0.50, 0.75, 0.95};
    for (int p = 0; p < 5; ++p)
      require(relative_close(stats[3 + p], oracle::sorted_percentile(values, percentiles[p]),
                             1e-9),
              "channel percentile must match the oracle");
  }

  for (int trial = 0; trial < 100; ++trial) {
    Eigen::VectorXd x(kRawEpochSamples);
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = rng.normal();
    const Eigen::VectorXd psd = welch_psd(x, 200.0, 400);
    const Eigen::VectorXd reference = oracle::naive_welch_psd(x, 200.0, 400);
    require(psd.size() == reference.size(), "PSD bin counts must agree");
    for (Eigen::Index k = 0; k < psd.size(); ++k)
      require(relative_close(psd[k], reference[k], 1e-9),
              "Welch PSD bin " + std::to_string(k) + " must match the brute-force oracle");
  }

  std::vector<Epoch> epochs(2);
  for (Epoch& ep : epochs) {
    ep.eeg_clean60.resize(kCleanEpochSamples, kEegChannelCount);
    ep.eeg_notched200.resize(kRawEpochSamples, kEegChannelCount);
    ep.eog_raw200.resize(kRawEpochSamples);
    for (Eigen::Index r = 0; r < ep.eeg_clean60.rows(); ++r)
      for (Eigen::Index c = 0; c < ep.eeg_clean60.cols(); ++c)
        ep.eeg_clean60(r, c) = rng.normal();
    for (Eigen::Index r = 0; r < ep.eeg_notched200.rows(); ++r)
      for (Eigen::Index c = 0; c < ep.eeg_notched200.cols(); ++c)
        ep.eeg_notched200(r, c) = rng.normal();
    for (Eigen::Index r = 0; r < ep.eog_raw200.size(); ++r) ep.eog_raw200[r] = rng.normal();
  }
  const FeatureMatrix fm = assemble_features(epochs, FeatureMode::Eeg136);
  require(fm.rows.cols() == 136, "per-epoch EEG statistics vector must have exactly 136 entries");
  require(fm.feature_names.size() == 136, "EEG feature naming must cover all 136 columns");
}

// ---------------------------------------------------------------- criterion 5

void criterion_models() {
  Rng rng(4242);
  const int per_class = 10;
  Eigen::MatrixXd blob_x(3 * per_class, 2);
  Eigen::VectorXd blob_y(3 * per_class);
  const double centers[3][2] = {{0.0, 0.0}, {6.0, 0.0}, {0.0, 6.0}};
  for (int cls = 0; cls < 3; ++cls)
    for (int i = 0; i < per_class; ++i) {
      const Eigen::Index r = cls * per_class + i;
      blob_x(r, 0) = centers[cls][0] + 0.5 * rng.normal();
      blob_x(r, 1) = centers[cls][1] + 0.5 * rng.normal();
      blob_y[r] = cls;
    }

  const auto train_accuracy = [&](const TrainedModel& model) {
    const Eigen::VectorXd pred = model.predict(blob_x);
    int hits = 0;
    for (Eigen::Index i = 0; i < pred.size(); ++i)
      if (pred[i] == blob_y[i]) ++hits;
    return static_cast<double>(hits) / static_cast<double>(pred.size());
  };

  const TrainedModel knn = train_model(
      EstimatorSpec{Family::Knn, Task::Classification, Hyperparams{{"k", 1.0}}, 0}, blob_x,
      blob_y);
  require(train_accuracy(knn) == 1.0, "kNN with k=1 must memorize distinct training rows");

  const TrainedModel cart = train_model(
      EstimatorSpec{Family::Dt, Task::Classification,
                    Hyperparams{{"max_depth", 0.0}, {"min_leaf", 1.0}}, 0},
      blob_x, blob_y);
  require(train_accuracy(cart) == 1.0, "unlimited-depth CART must memorize distinct rows");

  // A single unbagged tree over all features must be the same model as CART.
  const TrainedModel degenerate_rf = train_model(
      EstimatorSpec{Family::Rf, Task::Classification,
                    Hyperparams{{"n_trees", 1.0}, {"bootstrap", 0.0}, {"mtry", 2.0}}, 99},
      blob_x, blob_y);
  Eigen::MatrixXd probes(200, 2);
  for (Eigen::Index r = 0; r < probes.rows(); ++r) {
    probes(r, 0) = rng.uniform(-2.0, 8.0);
    probes(r, 1) = rng.uniform(-2.0, 8.0);
  }
  require(degenerate_rf.predict(probes) == cart.predict(probes),
          "single-tree unbagged full-mtry forest must predict exactly like CART");
  require(degenerate_rf.predict(blob_x) == cart.predict(blob_x),
          "degenerate forest must match CART on the training rows too");

  const TrainedModel svm = train_model(
      EstimatorSpec{Family::Svm, Task::Classification,
                    Hyperparams{{"c", 10.0}, {"gamma", 0.5}}, 0},
      blob_x, blob_y);
  require(train_accuracy(svm) == 1.0, "SVM must separate the constructed blobs");
  require(svm.converged(), "SVM training must converge on the blobs");
  const auto& svm_state = std::get<SvmModel>(svm.state());
  for (std::size_t i = 0; i < svm_state.machines.size(); ++i) {
    const BinaryMachine& machine = svm_state.machines[i];
    if (machine.trivial_class >= 0) continue;
    const double violation = oracle::svm_kkt_violation(svm_state, machine);
    require(violation < 2e-3, "SVM machine " + std::to_string(i) +
                                  " worst KKT violation is " + std::to_string(violation) +
                                  " (must stay below 2e-3)");
  }

  // Scattered inputs keep the kernel matrix well conditioned, so the first
  // jitter rung suffices and the pinned tolerances are meaningful.
  Eigen::MatrixXd gp_x(20, 2);
  Eigen::VectorXd gp_y(20);
  for (int i = 0; i < 20; ++i) {
    gp_x(i, 0) = rng.uniform(-2.0, 2.0);
    gp_x(i, 1) = rng.uniform(-2.0, 2.0);
    gp_y[i] = std::cos(gp_x(i, 0)) * gp_x(i, 1);
  }
  const TrainedModel gp = train_model(
      EstimatorSpec{Family::Gp, Task::Regression,
                    Hyperparams{{"length_scale", 1.0}, {"noise_variance", 0.0}}, 0},
      gp_x, gp_y);
  const Eigen::VectorXd at_train = gp.predict(gp_x);
  require((at_train - gp_y).cwiseAbs().maxCoeff() < 1e-6,
          "noise-free GP must interpolate its training points within 1e-6");

  Eigen::MatrixXd gp_probes(50, 2);
  for (int i = 0; i < 50; ++i) {
    gp_probes(i, 0) = rng.uniform(-2.5, 2.5);
    gp_probes(i, 1) = rng.uniform(-2.5, 2.5);
  }
  const auto& gp_state = std::get<GpModel>(gp.state());
  const Eigen::VectorXd dense = oracle::dense_gp_mean(gp_state.x, gp_state.y, gp_probes, 1.0,
                                                      gp_state.jitter);
  require((gp.predict(gp_probes) - dense).cwiseAbs().maxCoeff() < 1e-8,
          "GP predictive mean must match the dense-solve oracle within 1e-8");
}

// ---------------------------------------------------------------- criterion 6

PreparedRecording fabricated_recording(const std::string& subject, int n_epochs,
                                       std::uint64_t seed) {
  PreparedRecording rec;
  rec.subject_id = subject;
  rec.experiment_id = "e1";
  Rng rng(seed);
  rec.perclos.resize(n_epochs);
  double level = 0.3;
  for (int e = 0; e < n_epochs; ++e) {
    level = std::clamp(level + 0.08 * rng.normal(), 0.0, 1.0);
    rec.perclos[e] = level;
  }
  rec.thresholds = compute_thresholds(rec.perclos);
  rec.labels = discretize(rec.perclos, rec.thresholds);
  const auto fill = [&](FeatureMatrix& fm, FeatureMode mode, int cols) {
    fm.mode = mode;
    for (int c = 0; c < cols; ++c) fm.feature_names.push_back("f" + std::to_string(c));
    fm.rows.resize(n_epochs, cols);
    for (int e = 0; e < n_epochs; ++e)
      for (int c = 0; c < cols; ++c)
        fm.rows(e, c) = rec.perclos[e] * (c + 1) + 0.05 * rng.normal();
  };
  fill(rec.eeg136, FeatureMode::Eeg136, 136);
  fill(rec.psd5, FeatureMode::Psd5, 5);
  fill(rec.psd_eog6, FeatureMode::PsdEog6, 6);
  rec.ica_converged = true;
  return rec;
}

void criterion_harness() {
  for (const int n : {4, 23, 57, 100}) {
    const TrainTestSplit split = shuffle_split(n, 0.25, 11);
    std::vector<bool> seen(static_cast<std::size_t>(n), false);
    for (const int i : split.train) seen[static_cast<std::size_t>(i)] = true;
    for (const int i : split.test) {
      require(!seen[static_cast<std::size_t>(i)], "train/test sides must be disjoint");
      seen[static_cast<std::size_t>(i)] = true;
    }
    bool all = true;
    for (const bool s : seen) all = all && s;
    require(all, "train/test sides must cover every index for n=" + std::to_string(n));
  }

  const auto folds = kfold_splits(23, 10, 3);
  require(folds.size() == 10, "10-fold split must produce 10 folds");
  std::vector<int> sizes;
  for (const auto& fold : folds) sizes.push_back(static_cast<int>(fold.test.size()));
  require(sizes == std::vector<int>{3, 3, 3, 2, 2, 2, 2, 2, 2, 2},
          "n=23 fold sizes must be three 3s then seven 2s");
  std::vector<bool> covered(23, false);
  for (const auto& fold : folds)
    for (const int i : fold.test) {
      require(!covered[static_cast<std::size_t>(i)],
              "an index must land in exactly one validation fold");
      covered[static_cast<std::size_t>(i)] = true;
    }

  std::vector<PreparedRecording> corpus;
  for (int s = 0; s < 6; ++s) {
    char name[16];
    std::snprintf(name, sizeof(name), "s%02d", s + 1);
    corpus.push_back(fabricated_recording(name, 30, 500 + static_cast<std::uint64_t>(s)));
  }
  SchemeSpec scheme;
  scheme.kind = SchemeKind::SubjectHoldout;
  scheme.cv_folds = 5;
  scheme.holdout_fraction = 0.34;
  scheme.repetitions = 3;
  const EvaluationResult result = run_scheme(corpus, scheme, {Family::Knn, FeatureMode::Psd5},
                                             Task::Classification, 5);
  require(result.units.size() == 3, "subject holdout must run one unit per repetition");

  const auto subject_of = [](const std::string& key) { return key.substr(0, key.find('/')); };
  const auto recording_of = [](const std::string& key) { return key.substr(0, key.find('#')); };
  const auto epoch_of = [](const std::string& key) {
    return std::stoi(key.substr(key.find('#') + 1));
  };

  for (const UnitResult& unit : result.units) {
    // No test subject contributes a single epoch to the training side.
    for (const auto& key : unit.train_keys)
      for (const auto& held : unit.test_subjects)
        require(subject_of(key) != held,
                unit.unit_id + ": training row leaked from held-out subject " + held);
    for (const auto& key : unit.test_keys) {
      bool held = false;
      for (const auto& subject : unit.test_subjects) held = held || subject_of(key) == subject;
      require(held, unit.unit_id + ": test row from a non-held-out subject");
    }

    // The stored scaler must be recomputable from the training rows alone.
    require(unit.scaled, "PSD features must be min-max scaled");
    Eigen::MatrixXd train_rows(static_cast<Eigen::Index>(unit.train_keys.size()), 5);
    for (std::size_t i = 0; i < unit.train_keys.size(); ++i) {
      const std::string rec_key = recording_of(unit.train_keys[i]);
      const int epoch = epoch_of(unit.train_keys[i]);
      bool found = false;
      for (const PreparedRecording& rec : corpus)
        if (rec.key() == rec_key) {
          train_rows.row(static_cast<Eigen::Index>(i)) = rec.psd5.rows.row(epoch);
          found = true;
        }
      require(found, "training key must point at a corpus recording");
    }
    const ScalerParams refit = minmax_fit(train_rows);
    require(refit.min == unit.scaler.min && refit.max == unit.scaler.max,
            unit.unit_id + ": scaler must be exactly the train-row min/max");
  }

  // Reported aggregates recompute from the unit metrics.
  std::vector<double> f1s;
  for (const UnitResult& unit : result.units) f1s.push_back(unit.classification.f1_macro);
  const MeanSd recomputed = aggregate_mean_sd(f1s);
  require(std::abs(recomputed.mean - result.f1_macro.mean) <= 1e-12,
          "aggregate mean must recompute from unit metrics to 1e-12");
  require(std::abs(recomputed.sd - result.f1_macro.sd) <= 1e-12,
          "aggregate sd must recompute from unit metrics to 1e-12");
}

// ---------------------------------------------------------------- criterion 7

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return {};
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(VIGIL_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  if (status == -1) return -1;
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

struct TempTree {
  fs::path path;
  explicit TempTree(const std::string& tag) {
    path = fs::temp_directory_path() / (tag + "-" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempTree() { fs::remove_all(path); }
};

void criterion_end_to_end() {
  RunConfig base;
  base.synth = SynthCorpusConfig{};
  base.synth->n_subjects = 5;
  base.synth->n_epochs = 900;
  base.synth->prototype.snr_band_modulation = 0.8;
  base.seed = 424242;
  base.scheme.kind = SchemeKind::Individual;
  base.scheme.cv_folds = 5;

  note("synthesizing and preprocessing 5 recordings x 900 epochs ...");
  const std::vector<PreparedRecording> prepared = prepare_corpus(base);
  require(prepared.size() == 5, "corpus must contain five recordings");
  for (const PreparedRecording& rec : prepared)
    require(rec.n_epochs() == 900, rec.key() + " must carry 900 epochs");

  RunConfig clf = base;
  clf.task = TaskSelection::Classification;
  clf.combinations = {{Family::Rf, FeatureMode::Psd5},
                      {Family::Svm, FeatureMode::Psd5},
                      {Family::Knn, FeatureMode::Psd5},
                      {Family::Dt, FeatureMode::Psd5},
                      {Family::Gp, FeatureMode::Psd5}};
  note("evaluating five classifier families on band-power features ...");
  const RunReport clf_report = evaluate_corpus(prepared, clf);
  for (const EvaluationResult& eval : clf_report.evaluations) {
    const std::string name = to_string(eval.combination.family);
    note(name + " accuracy " + fmt(eval.accuracy.mean) + ", macro-F1 " +
         fmt(eval.f1_macro.mean));
    require(eval.accuracy.mean > 1.0 / 3.0,
            name + " must beat chance accuracy 1/3, got " + fmt(eval.accuracy.mean));
    if (eval.combination.family == Family::Rf)
      require(eval.f1_macro.mean >= 0.75,
              "random-forest macro-F1 is " + fmt(eval.f1_macro.mean) + " (must reach 0.75)");
  }

  RunConfig reg = base;
  reg.task = TaskSelection::Regression;
  reg.combinations = {{Family::Rf, FeatureMode::PsdEog6}};
  note("evaluating random-forest regression on band-power + blink features ...");
  const RunReport reg_report = evaluate_corpus(prepared, reg);
  const EvaluationResult& rf_reg = reg_report.evaluations.front();
  note("rf regression RMSE " + fmt(rf_reg.rmse.mean));
  require(rf_reg.rmse.mean <= 0.10,
          "random-forest RMSE is " + fmt(rf_reg.rmse.mean) + " (must stay within 0.10)");

  RunConfig pooled = base;
  pooled.scheme.kind = SchemeKind::Pooled100;
  pooled.task = TaskSelection::Both;
  pooled.combinations = {{Family::Rf, FeatureMode::Psd5}, {Family::Rf, FeatureMode::PsdEog6}};
  note("evaluating the pooled scheme and writing the report ...");
  const RunReport pooled_report = evaluate_corpus(prepared, pooled);
  const RunReport pooled_again = evaluate_corpus(prepared, pooled);
  require(report_to_json(pooled_report).dump() == report_to_json(pooled_again).dump(),
          "re-evaluating the same corpus must reproduce the report bit for bit");

  TempTree out_a("vigil-acc7-a");
  TempTree out_b("vigil-acc7-b");
  write_run_outputs(out_a.path, pooled_report, prepared, pooled);
  write_run_outputs(out_b.path, pooled_report, prepared, pooled);
  for (const char* name : {"report.json", "report.md", "thresholds.csv", "features_psd.csv",
                           "features_psd_eog.csv"})
    require(fs::exists(out_a.path / name), std::string("missing output file ") + name);
  require(read_file(out_a.path / "report.json") == read_file(out_b.path / "report.json"),
          "report.json must be byte-identical across reruns");
  require(!read_file(out_a.path / "report.json").empty(), "report.json must not be empty");
  require(read_file(out_a.path / "features_psd.csv") ==
              read_file(out_b.path / "features_psd.csv"),
          "feature tables must be byte-identical across reruns");

  const std::string md = read_file(out_a.path / "report.md");
  require(md.find("## Recordings") != std::string::npos, "report must list the recordings");
  require(md.find("## Classification") != std::string::npos,
          "report must carry the classification table");
  require(md.find("## Regression") != std::string::npos,
          "report must carry the regression table");
  require(md.find("| rf | psd |") != std::string::npos,
          "report tables must name the family/feature combinations");
  const fs::path predictions = out_a.path / "predictions_pooled100_rf_psd_classification_pooled.csv";
  require(fs::exists(predictions), "per-unit prediction files must land flat in the output dir");

  // CLI contract: synth -> run -> rerun -> report on a small corpus.
  TempTree cli_tree("vigil-acc7-cli");
  const std::string corpus = (cli_tree.path / "corpus").string();
  const std::string run1 = (cli_tree.path / "run1").string();
  const std::string run2 = (cli_tree.path / "run2").string();
  note("driving the command-line interface on a small corpus ...");
  require(run_cli("synth --out " + corpus + " --subjects 2 --epochs 60 --seed 3") == 0,
          "synth subcommand must succeed");
  require(run_cli("inspect " + corpus) == 0, "inspect subcommand must succeed");
  require(run_cli("run --data " + corpus + " --out " + run1 + " --seed 5 --quiet") == 0,
          "run subcommand must succeed");
  require(run_cli("run --data " + corpus + " --out " + run2 + " --seed 5 --quiet") == 0,
          "repeated run subcommand must succeed");
  const std::string json1 = read_file(fs::path(run1) / "report.json");
  require(!json1.empty(), "CLI run must write report.json");
  require(json1 == read_file(fs::path(run2) / "report.json"),
          "CLI reruns must write byte-identical reports");
  require(run_cli("report " + (fs::path(run1) / "report.json").string()) == 0,
          "report subcommand must render the stored report");
}

// ---------------------------------------------------------------- criterion 8

void criterion_dataset(const std::string& data_dir) {
  RunConfig cfg;
  cfg.data_dir = data_dir;
  cfg.seed = 1;
  note("preparing recordings from " + data_dir + " ...");
  const std::vector<PreparedRecording> prepared = prepare_corpus(cfg);
  note(std::to_string(prepared.size()) + " recordings prepared");

  SchemeSpec individual;
  individual.kind = SchemeKind::Individual;

  const EvaluationResult reg = run_scheme(prepared, individual,
                                          {Family::Rf, FeatureMode::PsdEog6}, Task::Regression,
                                          derive_seed(cfg.seed, 1));
  note("individual rf regression RMSE " + fmt(reg.rmse.mean) + " +/- " + fmt(reg.rmse.sd));
  require(reg.rmse.mean <= 0.17, "regression RMSE must match or beat the 0.17 baseline");
  require(std::abs(reg.rmse.mean - 0.08) <= 0.04,
          "regression RMSE must land within 0.04 of the 0.08 target");

  const EvaluationResult clf = run_scheme(prepared, individual, {Family::Rf, FeatureMode::Psd5},
                                          Task::Classification, derive_seed(cfg.seed, 2));
  note("individual rf classification macro-F1 " + fmt(clf.f1_macro.mean) + " +/- " +
       fmt(clf.f1_macro.sd));
  require(std::abs(clf.f1_macro.mean - 0.78) <= 0.10,
          "per-subject macro-F1 must land within 0.10 of 0.78");

  SchemeSpec pooled;
  pooled.kind = SchemeKind::Pooled100;
  const EvaluationResult pooled_clf = run_scheme(prepared, pooled,
                                                 {Family::Rf, FeatureMode::Psd5},
                                                 Task::Classification, derive_seed(cfg.seed, 3));
  note("pooled rf classification macro-F1 " + fmt(pooled_clf.f1_macro.mean));
  require(std::abs(pooled_clf.f1_macro.mean - 0.79) <= 0.10,
          "pooled macro-F1 must land within 0.10 of 0.79");
}

// --------------------------------------------------------------------- driver

int run_criterion(int id, const std::string& data_dir) {
  static const char* kLabels[9] = {nullptr,
                                   "PERCLOS thresholds and discretization",
                                   "filter transfer functions and resampling",
                                   "ICA source recovery and artifact removal",
                                   "feature oracles and the 136-entry vector",
                                   "model family sanity and audits",
                                   "split partitions, leakage, and aggregates",
                                   "synthetic end-to-end benchmark",
                                   "dataset-backed benchmark"};
  if (id < 1 || id > 8) {
    std::fprintf(stderr, "unknown criterion %d (valid: 1-8)\n", id);
    return 2;
  }
  if (id == 8 && data_dir.empty()) {
    std::printf("[SKIP] criterion 8: %s (set VIGIL_DATASET_DIR or pass --data <dir>)\n",
                kLabels[8]);
    return 77;
  }

  const int before = g_failures;
  const auto start = std::chrono::steady_clock::now();
  switch (id) {
    case 1: criterion_thresholds(); break;
    case 2: criterion_filters(); break;
    case 3: criterion_ica(); break;
    case 4: criterion_features(); break;
    case 5: criterion_models(); break;
    case 6: criterion_harness(); break;
    case 7: criterion_end_to_end(); break;
    case 8: criterion_dataset(data_dir); break;
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool ok = g_failures == before;
  std::printf("[%s] criterion %d: %s (%.1f s)\n", ok ? "PASS" : "FAIL", id, kLabels[id],
              seconds);
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  std::setvbuf(stdout, nullptr, _IOLBF, 0);  // progress lines show up under ctest
  int criterion = 0;
  std::string data_dir;
  if (const char* env = std::getenv("VIGIL_DATASET_DIR")) data_dir = env;

  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--criterion" && i + 1 < argc) {
      criterion = std::atoi(argv[++i]);
    } else if (arg == "--data" && i + 1 < argc) {
      data_dir = argv[++i];
    } else {
      std::fprintf(stderr, "usage: %s [--criterion N] [--data DATASET_DIR]\n", argv[0]);
      return 2;
    }
  }

  if (criterion != 0) return run_criterion(criterion, data_dir);

  int exit_code = 0;
  for (int id = 1; id <= 8; ++id) {
    const int rc = run_criterion(id, data_dir);
    if (id == 8 && rc == 77) continue;  // optional tier; skipping is not a failure
    if (rc != 0) exit_code = 1;
  }
  return exit_code;
}
