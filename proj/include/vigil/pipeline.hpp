#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vigil/dsp.hpp"
#include "vigil/errors.hpp"
#include "vigil/features.hpp"
#include "vigil/ica.hpp"
#include "vigil/labeling.hpp"
#include "vigil/recording.hpp"

namespace vigil {

// Knobs of the per-recording preprocessing chain, all defaulting to the
// study protocol: 60 Hz notch, 1-30 Hz band-pass, 200 -> 60 Hz resampling,
// ICA ocular-artifact removal, 8 s epochs.
struct PipelineParams {
  double notch_hz = 60.0;
  double notch_bandwidth_hz = 2.0;
  double bandpass_lo_hz = 1.0;
  double bandpass_hi_hz = 30.0;
  std::vector<BandDefinition> bands = default_bands();
  double blink_z_threshold = 3.0;
  double blink_refractory_s = 0.25;
  double eog_correlation_threshold = 0.6;
  int ica_max_iterations = 500;
  double ica_tolerance = 1e-5;
  double threshold_minor_fraction = kMinorRangeFraction;
  double threshold_moderate_fraction = kModerateRangeFraction;

  void validate() const {
    if (!(notch_hz > 0.0)) throw ParameterError("notch_hz must be positive");
    if (!(notch_bandwidth_hz > 0.0))
      throw ParameterError("notch_bandwidth_hz must be positive");
    if (!(bandpass_lo_hz > 0.0 && bandpass_hi_hz > bandpass_lo_hz))
      throw ParameterError("band-pass edges must satisfy 0 < lo < hi");
    if (bands.empty()) throw ParameterError("bands must not be empty");
    if (!(blink_z_threshold > 0.0)) throw ParameterError("blink_z_threshold must be positive");
    if (blink_refractory_s < 0.0)
      throw ParameterError("blink_refractory_s must be non-negative");
    if (!(eog_correlation_threshold >= 0.0 && eog_correlation_threshold <= 1.0))
      throw ParameterError("eog_correlation_threshold must lie in [0, 1]");
    if (ica_max_iterations < 1) throw ParameterError("ica_max_iterations must be >= 1");
    if (!(ica_tolerance > 0.0)) throw ParameterError("ica_tolerance must be positive");
    if (!(threshold_minor_fraction > 0.0 &&
          threshold_moderate_fraction > threshold_minor_fraction &&
          threshold_moderate_fraction < 1.0))
      throw ParameterError("threshold fractions must satisfy 0 < minor < moderate < 1");
  }
};

// Everything the evaluation schemes need from one recording, with the bulky
// signal data already reduced to per-epoch features.
struct PreparedRecording {
  std::string subject_id;
  std::string experiment_id;
  ThresholdPair thresholds;
  Eigen::VectorXd perclos;              // one value per epoch
  std::vector<DrowsinessLevel> labels;  // discretized against `thresholds`
  FeatureMatrix eeg136;
  FeatureMatrix psd5;
  FeatureMatrix psd_eog6;
  std::vector<int> removed_components;
  bool ica_converged = false;
  int ica_iterations = 0;
  Eigen::MatrixXd ica_unmixing;
  Eigen::MatrixXd ica_mixing;

  std::string key() const { return subject_id + "/" + experiment_id; }
  Eigen::Index n_epochs() const { return perclos.size(); }

  const FeatureMatrix& features(FeatureMode mode) const {
    switch (mode) {
      case FeatureMode::Eeg136: return eeg136;
      case FeatureMode::Psd5: return psd5;
      case FeatureMode::PsdEog6: return psd_eog6;
    }
    throw ParameterError("invalid feature mode");
  }
};

// Runs the full preprocessing chain on one recording:
//   notch -> band-pass -> resample to 60 Hz -> ICA -> remove EOG-correlated
//   components -> epoch -> features + PERCLOS discretization.
// Thresholds are computed on the recording's complete PERCLOS series (they
// are a labeling definition, not a learned quantity, so they deliberately do
// not depend on any later train/test split).
inline PreparedRecording prepare_recording(const Recording& rec, const PipelineParams& params,
                                           std::uint64_t ica_seed) {
  rec.validate();
  if (rec.sample_rate_hz != kRawRateHz)
    throw ValidationError("pipeline requires 200 Hz recordings, got " +
                          std::to_string(rec.sample_rate_hz) + " Hz");

  const SosChain notch = design_notch(params.notch_hz, params.notch_bandwidth_hz, kRawRateHz);
  const SosChain bandpass =
      design_bandpass4(params.bandpass_lo_hz, params.bandpass_hi_hz, kRawRateHz);

  Eigen::MatrixXd notched = sos_filtfilt_columns(notch, rec.eeg);

  const Eigen::Index n60 = (rec.n_samples() * 3) / 10;
  Eigen::MatrixXd clean60(n60, rec.eeg.cols());
  {
    Eigen::MatrixXd banded = sos_filtfilt_columns(bandpass, notched);
    for (Eigen::Index c = 0; c < banded.cols(); ++c)
      clean60.col(c) = resample_200_to_60({banded.col(c), kRawRateHz}).samples;
  }
  const Eigen::VectorXd eog60 = resample_200_to_60({rec.eog, kRawRateHz}).samples;

  PreparedRecording out;
  out.subject_id = rec.subject_id;
  out.experiment_id = rec.experiment_id;

  const IcaDecomposition ica =
      fit_fastica(clean60, ica_seed, params.ica_max_iterations, params.ica_tolerance);
  out.removed_components =
      flag_artifact_components(ica, eog60, params.eog_correlation_threshold);
  out.ica_converged = ica.converged;
  out.ica_iterations = ica.iterations;
  out.ica_unmixing = ica.unmixing;
  out.ica_mixing = ica.mixing;
  if (!out.removed_components.empty()) clean60 = reconstruct_without(ica, out.removed_components);

  const std::vector<Epoch> epochs = split_epochs(clean60, notched, rec.eog, rec.perclos);
  out.eeg136 = assemble_features(epochs, FeatureMode::Eeg136, rec.eeg_channels, params.bands);
  out.psd5 = assemble_features(epochs, FeatureMode::Psd5, rec.eeg_channels, params.bands,
                               params.blink_z_threshold, params.blink_refractory_s);
  out.psd_eog6 = assemble_features(epochs, FeatureMode::PsdEog6, rec.eeg_channels, params.bands,
                                   params.blink_z_threshold, params.blink_refractory_s);

  out.perclos = rec.perclos;
  out.thresholds = compute_thresholds(rec.perclos, params.threshold_minor_fraction,
                                      params.threshold_moderate_fraction);
  out.labels = discretize(rec.perclos, out.thresholds);
  return out;
}

inline std::vector<PreparedRecording> prepare_recordings(const std::vector<Recording>& recordings,
                                                         const PipelineParams& params,
                                                         std::uint64_t seed) {
  std::vector<PreparedRecording> prepared;
  prepared.reserve(recordings.size());
  for (std::size_t i = 0; i < recordings.size(); ++i)
    prepared.push_back(prepare_recording(recordings[i], params, derive_seed(seed, i)));
  return prepared;
}

}  // namespace vigil
