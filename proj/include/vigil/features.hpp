#pragma once

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <fftw3.h>

#include "vigil/dsp.hpp"
#include "vigil/errors.hpp"
#include "vigil/recording.hpp"

namespace vigil {

enum class FeatureMode { Eeg136, Psd5, PsdEog6 };

inline const char* to_string(FeatureMode mode) {
  switch (mode) {
    case FeatureMode::Eeg136: return "eeg136";
    case FeatureMode::Psd5: return "psd";
    case FeatureMode::PsdEog6: return "psd_eog";
  }
  throw ParameterError("invalid feature mode");
}

inline FeatureMode feature_mode_from_string(const std::string& name) {
  if (name == "eeg136") return FeatureMode::Eeg136;
  if (name == "psd") return FeatureMode::Psd5;
  if (name == "psd_eog") return FeatureMode::PsdEog6;
  throw ParameterError("unknown feature mode '" + name + "' (expected eeg136/psd/psd_eog)");
}

struct BandDefinition {
  std::string name;
  double lo_hz = 0.0;
  double hi_hz = 0.0;
};

// Clinical EEG rhythm bands; a PSD bin belongs to a band when its center
// frequency lies in [lo, hi).
inline const std::vector<BandDefinition>& default_bands() {
  static const std::vector<BandDefinition> bands = {{"delta", 1.0, 4.0},
                                                    {"theta", 4.0, 8.0},
                                                    {"alpha", 8.0, 14.0},
                                                    {"beta", 14.0, 31.0},
                                                    {"gamma", 31.0, 50.0}};
  return bands;
}

// Eight order/statistics per channel, in this fixed order.
inline const std::vector<std::string>& channel_stat_names() {
  static const std::vector<std::string> names = {"mean", "sd",     "var", "p5",
                                                 "q1",   "median", "q3",  "p95"};
  return names;
}

// mean, sd, variance (population), and linearly interpolated percentiles
// 5/25/50/75/95 of one channel-epoch.
inline Eigen::VectorXd channel_stats(const Eigen::VectorXd& samples) {
  const Eigen::Index n = samples.size();
  if (n < 1) throw ParameterError("channel_stats requires at least one sample");
  const double mean = samples.mean();
  const double variance = (samples.array() - mean).square().sum() / static_cast<double>(n);

  std::vector<double> sorted(samples.data(), samples.data() + n);
  std::sort(sorted.begin(), sorted.end());
  const auto percentile = [&](double p) {
    const double position = p * static_cast<double>(n - 1);
    const auto lower = static_cast<Eigen::Index>(std::floor(position));
    const double fraction = position - static_cast<double>(lower);
    if (lower + 1 >= n) return sorted[static_cast<std::size_t>(n - 1)];
    return sorted[static_cast<std::size_t>(lower)] +
           fraction * (sorted[static_cast<std::size_t>(lower + 1)] -
                       sorted[static_cast<std::size_t>(lower)]);
  };

  Eigen::VectorXd stats(8);
  stats << mean, std::sqrt(variance), variance, percentile(0.05), percentile(0.25),
      percentile(0.50), percentile(0.75), percentile(0.95);
  return stats;
}

namespace detail {

// FFTW's planner is not thread-safe; serialize plan creation/destruction.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace detail

// Welch power spectral density of one channel: `nperseg`-sample segments with
// 50% overlap, per-segment mean removal, periodic Hann window, one-sided
// density normalization (a unit-amplitude in-band sinusoid integrates to 0.5).
// Returns nperseg/2 + 1 values at bin spacing rate/nperseg.
inline Eigen::VectorXd welch_psd(const Eigen::VectorXd& x, double rate_hz, int nperseg = 400) {
  const Eigen::Index n = x.size();
  if (nperseg < 2 || nperseg % 2 != 0) throw ParameterError("nperseg must be even and >= 2");
  if (n < nperseg) throw ParameterError("input shorter than one Welch segment");
  if (!(rate_hz > 0.0)) throw ParameterError("sample rate must be positive");
  const Eigen::Index step = nperseg / 2;
  const Eigen::Index n_segments = (n - nperseg) / step + 1;
  const Eigen::Index n_bins = nperseg / 2 + 1;

  Eigen::VectorXd window(nperseg);
  for (Eigen::Index i = 0; i < nperseg; ++i)
    window[i] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                      static_cast<double>(nperseg)));
  const double scale = 1.0 / (rate_hz * window.squaredNorm());

  double* in = fftw_alloc_real(static_cast<std::size_t>(nperseg));
  fftw_complex* out = fftw_alloc_complex(static_cast<std::size_t>(n_bins));
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(nperseg), in, out, FFTW_ESTIMATE);
  }
  if (!plan) {
    fftw_free(in);
    fftw_free(out);
    throw NumericalError("FFTW plan creation failed");
  }

  Eigen::VectorXd psd = Eigen::VectorXd::Zero(n_bins);
  for (Eigen::Index s = 0; s < n_segments; ++s) {
    const auto segment = x.segment(s * step, nperseg);
    const double segment_mean = segment.mean();
    for (Eigen::Index i = 0; i < nperseg; ++i) in[i] = (segment[i] - segment_mean) * window[i];
    fftw_execute(plan);
    for (Eigen::Index k = 0; k < n_bins; ++k) {
      const double power = out[k][0] * out[k][0] + out[k][1] * out[k][1];
      const double one_sided = (k == 0 || k == n_bins - 1) ? 1.0 : 2.0;
      psd[k] += scale * one_sided * power;
    }
  }
  psd /= static_cast<double>(n_segments);

  {
    std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(in);
  fftw_free(out);
  return psd;
}

// Mean band power over all channels of one raw-rate epoch (1600 x 17 at
// 200 Hz): per channel, Welch PSD, then the mean of the PSD bins whose center
// falls in each band, then the average across channels.
inline Eigen::VectorXd band_powers(const Eigen::MatrixXd& epoch200,
                                   const std::vector<BandDefinition>& bands = default_bands(),
                                   double rate_hz = kRawRateHz, int nperseg = 400) {
  if (epoch200.rows() != kRawEpochSamples || epoch200.cols() != kEegChannelCount)
    throw ParameterError("band_powers expects a 1600 x 17 raw-rate epoch");
  if (bands.empty()) throw ParameterError("at least one band is required");
  for (const auto& b : bands)
    if (!(b.lo_hz >= 0.0 && b.lo_hz < b.hi_hz))
      throw ParameterError("band '" + b.name + "' must satisfy 0 <= lo < hi");

  const double bin_hz = rate_hz / nperseg;
  Eigen::VectorXd powers = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(bands.size()));
  for (Eigen::Index c = 0; c < epoch200.cols(); ++c) {
    const Eigen::VectorXd psd = welch_psd(epoch200.col(c), rate_hz, nperseg);
    for (std::size_t b = 0; b < bands.size(); ++b) {
      double sum = 0.0;
      int count = 0;
      for (Eigen::Index k = 0; k < psd.size(); ++k) {
        const double center = bin_hz * static_cast<double>(k);
        if (center >= bands[b].lo_hz && center < bands[b].hi_hz) {
          sum += psd[k];
          ++count;
        }
      }
      if (count == 0) throw ParameterError("band '" + bands[b].name + "' contains no PSD bins");
      powers[static_cast<Eigen::Index>(b)] += sum / count;
    }
  }
  return powers / static_cast<double>(epoch200.cols());
}

// Blink count of one raw EOG epoch: band-pass 0.5-8 Hz (zero phase), robust
// z-score against the median/MAD, then local maxima with z >= `z_threshold`
// taken greedily left to right with a refractory gap. Scale-invariant; an
// all-flat epoch counts zero.
inline int count_blinks(const Eigen::VectorXd& eog_epoch, double rate_hz = kRawRateHz,
                        double z_threshold = 3.0, double refractory_s = 0.25) {
  const Eigen::Index n = eog_epoch.size();
  if (n < 8) return 0;
  static const SosChain sections = design_bandpass4(0.5, 8.0, kRawRateHz);
  const SosChain& chain =
      rate_hz == kRawRateHz ? sections : design_bandpass4(0.5, 8.0, rate_hz);
  const Eigen::VectorXd filtered = sos_filtfilt(chain, eog_epoch);

  std::vector<double> sorted(filtered.data(), filtered.data() + n);
  std::sort(sorted.begin(), sorted.end());
  const double median = 0.5 * (sorted[static_cast<std::size_t>((n - 1) / 2)] +
                               sorted[static_cast<std::size_t>(n / 2)]);
  std::vector<double> deviations(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i)
    deviations[static_cast<std::size_t>(i)] = std::abs(filtered[i] - median);
  std::sort(deviations.begin(), deviations.end());
  const double mad = 0.5 * (deviations[static_cast<std::size_t>((n - 1) / 2)] +
                            deviations[static_cast<std::size_t>(n / 2)]);
  // A flat or DC-only epoch has no blinks; after the band-pass its residue is
  // rounding dust, so treat dispersion at that level as zero.
  if (mad <= 1e-12 * eog_epoch.cwiseAbs().maxCoeff()) return 0;
  const double sigma = 1.4826 * mad;

  const auto refractory = static_cast<Eigen::Index>(refractory_s * rate_hz);
  int count = 0;
  Eigen::Index last_peak = -refractory - 1;
  for (Eigen::Index i = 1; i + 1 < n; ++i) {
    const double z = (filtered[i] - median) / sigma;
    if (z < z_threshold) continue;
    if (!(filtered[i] > filtered[i - 1] && filtered[i] >= filtered[i + 1])) continue;
    if (i - last_peak < refractory) continue;
    ++count;
    last_peak = i;
  }
  return count;
}

// A design matrix with named columns; rows follow epoch order.
struct FeatureMatrix {
  FeatureMode mode = FeatureMode::Psd5;
  std::vector<std::string> feature_names;
  Eigen::MatrixXd rows;
};

// Assembles the per-epoch design matrix for one recording.
//   eeg136:  8 statistics x 17 channels of the cleaned 60 Hz signal,
//            channel-major (all stats of channel 0, then channel 1, ...).
//   psd:     5 band powers of the notch-only 200 Hz signal.
//   psd_eog: the 5 band powers plus the raw-EOG blink count.
inline FeatureMatrix assemble_features(const std::vector<Epoch>& epochs, FeatureMode mode,
                                       const std::vector<std::string>& channel_names =
                                           standard_eeg_channels(),
                                       const std::vector<BandDefinition>& bands = default_bands(),
                                       double blink_z = 3.0, double blink_refractory_s = 0.25) {
  if (epochs.empty()) throw ParameterError("assemble_features requires at least one epoch");
  FeatureMatrix fm;
  fm.mode = mode;

  switch (mode) {
    case FeatureMode::Eeg136: {
      const auto n_channels = static_cast<Eigen::Index>(channel_names.size());
      if (epochs.front().eeg_clean60.cols() != n_channels)
        throw ParameterError("channel name count does not match epoch channels");
      for (const auto& channel : channel_names)
        for (const auto& stat : channel_stat_names())
          fm.feature_names.push_back(channel + "_" + stat);
      fm.rows.resize(static_cast<Eigen::Index>(epochs.size()), 8 * n_channels);
      for (std::size_t e = 0; e < epochs.size(); ++e) {
        const auto& eeg = epochs[e].eeg_clean60;
        if (eeg.rows() != kCleanEpochSamples || eeg.cols() != n_channels)
          throw ParameterError("epoch " + std::to_string(e) +
                               " does not carry a 480-sample 60 Hz view");
        for (Eigen::Index c = 0; c < n_channels; ++c)
          fm.rows.block(static_cast<Eigen::Index>(e), 8 * c, 1, 8) =
              channel_stats(eeg.col(c)).transpose();
      }
      break;
    }
    case FeatureMode::Psd5:
    case FeatureMode::PsdEog6: {
      const bool with_eog = mode == FeatureMode::PsdEog6;
      for (const auto& band : bands) fm.feature_names.push_back("psd_" + band.name);
      if (with_eog) fm.feature_names.push_back("eog_blink_count");
      const auto n_features = static_cast<Eigen::Index>(fm.feature_names.size());
      fm.rows.resize(static_cast<Eigen::Index>(epochs.size()), n_features);
      for (std::size_t e = 0; e < epochs.size(); ++e) {
        const auto& epoch = epochs[e];
        if (epoch.eeg_notched200.rows() != kRawEpochSamples)
          throw ParameterError("epoch " + std::to_string(e) +
                               " does not carry a 1600-sample raw-rate view");
        fm.rows.block(static_cast<Eigen::Index>(e), 0, 1,
                      static_cast<Eigen::Index>(bands.size())) =
            band_powers(epoch.eeg_notched200, bands).transpose();
        if (with_eog)
          fm.rows(static_cast<Eigen::Index>(e), n_features - 1) = static_cast<double>(
              count_blinks(epoch.eog_raw200, kRawRateHz, blink_z, blink_refractory_s));
      }
      break;
    }
  }
  return fm;
}

// Column-wise min/max ranges learned from training rows only.
struct ScalerParams {
  Eigen::VectorXd min;
  Eigen::VectorXd max;
};

inline ScalerParams minmax_fit(const Eigen::MatrixXd& rows) {
  if (rows.rows() < 1) throw ParameterError("minmax_fit requires at least one row");
  if (!rows.allFinite()) throw ParameterError("minmax_fit requires finite values");
  return ScalerParams{rows.colwise().minCoeff(), rows.colwise().maxCoeff()};
}

// Maps each column to [0, 1] by the fitted range; a constant column maps to 0.
// Values outside the fitted range extrapolate beyond [0, 1] by design.
inline Eigen::MatrixXd minmax_apply(const Eigen::MatrixXd& rows, const ScalerParams& params) {
  if (rows.cols() != params.min.size())
    throw ParameterError("column count does not match the fitted scaler");
  Eigen::MatrixXd scaled(rows.rows(), rows.cols());
  for (Eigen::Index c = 0; c < rows.cols(); ++c) {
    const double range = params.max[c] - params.min[c];
    if (range == 0.0)
      scaled.col(c).setZero();
    else
      scaled.col(c) = (rows.col(c).array() - params.min[c]) / range;
  }
  return scaled;
}

}  // namespace vigil
