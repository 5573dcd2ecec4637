#pragma once

#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vigil/dsp.hpp"
#include "vigil/errors.hpp"
#include "vigil/recording.hpp"
#include "vigil/rng.hpp"

namespace vigil {

// Parameters of the synthetic driving-session generator. The drowsiness state
// is drawn first as a clipped random walk over epochs; everything observable
// (PERCLOS labels, band amplitudes, blink rate) is rendered from that state,
// so the generated data carries a real, recoverable signal by construction.
struct SynthSpec {
  std::string subject_id = "synth";
  std::string experiment_id = "e1";
  int n_epochs = 0;
  std::uint64_t seed = 0;
  double drowsiness_walk_step = 0.02;
  double mains_amplitude_uv = 5.0;
  double blink_rate_per_min = 20.0;  // at full drowsiness (d = 1)
  double snr_band_modulation = 0.8;  // 0 = no label-linked signal, chance-level data

  void validate() const {
    if (n_epochs < 4) throw ParameterError("n_epochs must be >= 4");
    if (!(drowsiness_walk_step >= 0.0)) throw ParameterError("walk step must be >= 0");
    if (!(mains_amplitude_uv >= 0.0)) throw ParameterError("mains amplitude must be >= 0");
    if (!(blink_rate_per_min >= 0.0)) throw ParameterError("blink rate must be >= 0");
    if (!(snr_band_modulation >= 0.0 && snr_band_modulation <= 1.0))
      throw ParameterError("snr_band_modulation must lie in [0, 1]");
  }
};

namespace detail {

struct SynthBand {
  double lo_hz, hi_hz;
  double base_uv;
  double gain_slope;  // band amplitude factor: base * (1 + slope * m * (d - 0.5))
};

// Drowsiness raises theta/alpha power and suppresses beta; delta and gamma
// stay flat so only genuinely informative bands carry label signal.
inline const std::vector<SynthBand>& synth_bands() {
  static const std::vector<SynthBand> bands = {
      {1.0, 4.0, 12.0, 0.0},   // delta
      {4.0, 8.0, 10.0, 1.0},   // theta
      {8.0, 14.0, 10.0, 1.0},  // alpha
      {14.0, 31.0, 8.0, -0.8}, // beta
      {31.0, 50.0, 4.0, 0.0},  // gamma
  };
  return bands;
}

}  // namespace detail

// Adds one biphasic blink deflection (raised-cosine positive lobe followed by
// a smaller negative undershoot) centered at `center`; exposed so tests can
// author epochs with exact blink ground truth.
inline void add_blink_pulse(Eigen::VectorXd& eog, Eigen::Index center, Eigen::Index width_samples,
                            double peak_uv) {
  if (width_samples < 4) throw ParameterError("blink width must be >= 4 samples");
  const Eigen::Index start = center - width_samples / 2;
  const Eigen::Index pos_len = (width_samples * 3) / 5;
  const Eigen::Index neg_len = width_samples - pos_len;
  for (Eigen::Index k = 0; k < width_samples; ++k) {
    const Eigen::Index t = start + k;
    if (t < 0 || t >= eog.size()) continue;
    double value;
    if (k < pos_len) {
      const double phase = static_cast<double>(k) / static_cast<double>(pos_len);
      value = peak_uv * 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * phase));
    } else {
      const double phase = static_cast<double>(k - pos_len) / static_cast<double>(neg_len);
      value = -0.3 * peak_uv * 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * phase));
    }
    eog[t] += value;
  }
}

// Renders one synthetic recording. Deterministic: the same spec (including
// seed) always produces the identical Recording.
inline Recording synth_recording(const SynthSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const Eigen::Index n_epochs = spec.n_epochs;
  const Eigen::Index n = n_epochs * kRawEpochSamples;
  const double fs = kRawRateHz;

  // 1. Latent drowsiness walk, one value per epoch, starting alert.
  Eigen::VectorXd drowsiness(n_epochs);
  drowsiness[0] = 0.0;
  for (Eigen::Index e = 1; e < n_epochs; ++e)
    drowsiness[e] =
        std::clamp(drowsiness[e - 1] + spec.drowsiness_walk_step * rng.normal(), 0.0, 1.0);

  // 2. PERCLOS = drowsiness + small measurement jitter.
  Eigen::VectorXd perclos(n_epochs);
  for (Eigen::Index e = 0; e < n_epochs; ++e)
    perclos[e] = std::clamp(drowsiness[e] + rng.uniform(-0.02, 0.02), 0.0, 1.0);

  // 3. EOG: smooth slow baseline wander plus blink pulses. No broadband noise
  // is added here on purpose: the blink detector is scale-invariant, so the
  // pulse count is exactly the number of injected blinks.
  Eigen::VectorXd eog = Eigen::VectorXd::Zero(n);
  {
    const double wander_amp[3] = {15.0, 8.0, 5.0};
    const double wander_freq[3] = {0.05, 0.11, 0.23};
    double phase[3], freq[3];
    for (int w = 0; w < 3; ++w) {
      phase[w] = rng.uniform(0.0, 2.0 * std::numbers::pi);
      freq[w] = wander_freq[w] * rng.uniform(0.9, 1.1);
    }
    for (Eigen::Index t = 0; t < n; ++t) {
      double v = 0.0;
      for (int w = 0; w < 3; ++w)
        v += wander_amp[w] * std::sin(2.0 * std::numbers::pi * freq[w] * t / fs + phase[w]);
      eog[t] = v;
    }
  }

  Eigen::VectorXd blink_trace = Eigen::VectorXd::Zero(n);
  {
    constexpr double kMinSeparationS = 0.6;
    const auto min_sep = static_cast<Eigen::Index>(kMinSeparationS * fs);
    for (Eigen::Index e = 0; e < n_epochs; ++e) {
      const double rate = spec.blink_rate_per_min * drowsiness[e];
      int count = rng.poisson(rate * kEpochSeconds / 60.0);
      std::vector<Eigen::Index> centers;
      for (int b = 0; b < count; ++b) {
        const auto width = static_cast<Eigen::Index>(rng.uniform(0.2, 0.4) * fs);
        Eigen::Index center = 0;
        bool placed = false;
        for (int attempt = 0; attempt < 64 && !placed; ++attempt) {
          center = e * kRawEpochSamples + width +
                   static_cast<Eigen::Index>(
                       rng.uniform_below(static_cast<std::uint64_t>(kRawEpochSamples - 2 * width)));
          placed = true;
          for (const Eigen::Index c : centers)
            if (std::abs(c - center) < min_sep) { placed = false; break; }
        }
        if (!placed) continue;  // epoch too crowded; skip this blink
        centers.push_back(center);
        add_blink_pulse(blink_trace, center, width, 150.0 * rng.uniform(0.85, 1.15));
      }
    }
  }
  eog += blink_trace;

  // 4. EEG: per channel, independent band-limited noise with label-linked
  // amplitudes, mains interference, leaked blink activity on the anterior
  // channels, and a small independent sensor-noise floor (which also keeps
  // the channel covariance full-rank).
  const auto& channels = standard_eeg_channels();
  Eigen::MatrixXd eeg(n, kEegChannelCount);
  const double m = spec.snr_band_modulation;
  static const double kBlinkLeak[kEegChannelCount] = {0.35, 0.30, 0.20, 0.15, 0.10, 0.05,
                                                      0.0,  0.0,  0.0,  0.0,  0.0,  0.0,
                                                      0.0,  0.0,  0.0,  0.0,  0.0};
  Eigen::VectorXd white(n);
  for (int c = 0; c < kEegChannelCount; ++c) {
    const double mains_phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    Eigen::VectorXd channel = Eigen::VectorXd::Zero(n);
    for (const auto& band : detail::synth_bands()) {
      for (Eigen::Index t = 0; t < n; ++t) white[t] = rng.normal();
      const SosChain sections = design_bandpass4(band.lo_hz, band.hi_hz, fs);
      Eigen::VectorXd shaped = sos_filter_forward(sections, white);
      const double rms = std::sqrt(shaped.squaredNorm() / static_cast<double>(n));
      if (rms > 0.0) shaped /= rms;
      for (Eigen::Index e = 0; e < n_epochs; ++e) {
        const double amp =
            band.base_uv * (1.0 + band.gain_slope * m * (drowsiness[e] - 0.5));
        channel.segment(e * kRawEpochSamples, kRawEpochSamples) +=
            amp * shaped.segment(e * kRawEpochSamples, kRawEpochSamples);
      }
    }
    const double w_mains = 2.0 * std::numbers::pi * 60.0 / fs;
    for (Eigen::Index t = 0; t < n; ++t)
      channel[t] += spec.mains_amplitude_uv * std::sin(w_mains * static_cast<double>(t) + mains_phase);
    if (kBlinkLeak[c] != 0.0) channel += kBlinkLeak[c] * blink_trace;
    for (Eigen::Index t = 0; t < n; ++t) channel[t] += 2.0 * rng.normal();
    eeg.col(c) = channel;
  }

  Recording rec;
  rec.subject_id = spec.subject_id;
  rec.experiment_id = spec.experiment_id;
  rec.sample_rate_hz = kRawRateHz;
  rec.eeg_channels = channels;
  rec.eog_channel = standard_eog_channel();
  rec.eeg = std::move(eeg);
  rec.eog = std::move(eog);
  rec.perclos = std::move(perclos);
  rec.validate();
  return rec;
}

// Corpus-level generator: subjects s01..sNN each contribute experiment "e1";
// the first `repeat_subjects` of them contribute a second session "e2".
// Per-recording seeds are derived from the corpus seed by stream splitting.
inline std::vector<SynthSpec> synth_corpus_specs(int n_subjects, int n_epochs,
                                                 std::uint64_t seed, int repeat_subjects = 0,
                                                 const SynthSpec& prototype = SynthSpec{}) {
  if (n_subjects < 1) throw ParameterError("n_subjects must be >= 1");
  if (repeat_subjects < 0 || repeat_subjects > n_subjects)
    throw ParameterError("repeat_subjects must lie in [0, n_subjects]");
  std::vector<SynthSpec> specs;
  std::uint64_t index = 0;
  for (int s = 1; s <= n_subjects; ++s) {
    const int sessions = s <= repeat_subjects ? 2 : 1;
    for (int x = 1; x <= sessions; ++x) {
      SynthSpec spec = prototype;
      char subject[16];
      std::snprintf(subject, sizeof(subject), "s%02d", s);
      spec.subject_id = subject;
      spec.experiment_id = "e" + std::to_string(x);
      spec.n_epochs = n_epochs;
      spec.seed = derive_seed(seed, index++);
      specs.push_back(std::move(spec));
    }
  }
  return specs;
}

}  // namespace vigil
