#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "vigil/errors.hpp"

namespace vigil {

struct TimeSeries {
  Eigen::VectorXd samples;
  double rate_hz = 0.0;
};

// Second-order section in direct form II transposed, normalized so a0 = 1.
struct Biquad {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;
};

using SosChain = std::vector<Biquad>;

// |H(e^{j 2 pi f / fs})| of a section chain; exposed so callers can audit a
// design against its stopband/passband requirements.
inline double sos_gain(const SosChain& sections, double freq_hz, double rate_hz) {
  const double w = 2.0 * std::numbers::pi * freq_hz / rate_hz;
  const std::complex<double> z1 = std::polar(1.0, -w);
  const std::complex<double> z2 = z1 * z1;
  std::complex<double> h(1.0, 0.0);
  for (const Biquad& s : sections)
    h *= (s.b0 + s.b1 * z1 + s.b2 * z2) / (1.0 + s.a1 * z1 + s.a2 * z2);
  return std::abs(h);
}

// RBJ cookbook notch: zeros pinned on the unit circle at the notch frequency,
// pole radius set by the -3 dB bandwidth.
inline SosChain design_notch(double notch_hz, double bandwidth_hz, double rate_hz) {
  if (!(rate_hz > 0.0)) throw ParameterError("sample rate must be positive");
  if (!(notch_hz > 0.0 && notch_hz < rate_hz / 2.0))
    throw ParameterError("notch frequency must lie in (0, rate/2)");
  if (!(bandwidth_hz > 0.0)) throw ParameterError("notch bandwidth must be positive");
  const double w0 = 2.0 * std::numbers::pi * notch_hz / rate_hz;
  const double q = notch_hz / bandwidth_hz;
  const double alpha = std::sin(w0) / (2.0 * q);
  const double a0 = 1.0 + alpha;
  Biquad s;
  s.b0 = 1.0 / a0;
  s.b1 = -2.0 * std::cos(w0) / a0;
  s.b2 = 1.0 / a0;
  s.a1 = -2.0 * std::cos(w0) / a0;
  s.a2 = (1.0 - alpha) / a0;
  return {s};
}

// 4th-order Butterworth band-pass as two biquads: the order-2 low-pass
// prototype is band-transformed in the analog domain (with pre-warped edges)
// and mapped through the bilinear transform. Conjugate pole pairs are grouped
// per section; each section carries one (z-1)(z+1) numerator, and overall gain
// is normalized to 1 at the geometric center frequency.
inline SosChain design_bandpass4(double lo_hz, double hi_hz, double rate_hz) {
  if (!(rate_hz > 0.0)) throw ParameterError("sample rate must be positive");
  if (!(lo_hz > 0.0 && lo_hz < hi_hz && hi_hz < rate_hz / 2.0))
    throw ParameterError("band edges must satisfy 0 < lo < hi < rate/2");
  using cd = std::complex<double>;
  const double fs2 = 2.0 * rate_hz;
  const double warped_lo = fs2 * std::tan(std::numbers::pi * lo_hz / rate_hz);
  const double warped_hi = fs2 * std::tan(std::numbers::pi * hi_hz / rate_hz);
  const double band = warped_hi - warped_lo;
  const double center_sq = warped_lo * warped_hi;

  // Order-2 Butterworth prototype poles sit at 135 and 225 degrees.
  const cd prototype = std::polar(1.0, 3.0 * std::numbers::pi / 4.0);
  std::array<cd, 4> analog;
  {
    // s^2 - p*B*s + W0^2 = 0 for each prototype pole p and its conjugate.
    const cd pb = prototype * band;
    const cd disc = std::sqrt(pb * pb - 4.0 * center_sq);
    analog[0] = (pb + disc) / 2.0;
    analog[1] = (pb - disc) / 2.0;
    analog[2] = std::conj(analog[0]);
    analog[3] = std::conj(analog[1]);
  }

  SosChain sections(2);
  for (int k = 0; k < 2; ++k) {
    const cd z = (fs2 + analog[k]) / (fs2 - analog[k]);
    sections[k].b0 = 1.0;
    sections[k].b1 = 0.0;
    sections[k].b2 = -1.0;
    sections[k].a1 = -2.0 * z.real();
    sections[k].a2 = std::norm(z);
  }

  const double center_hz = rate_hz / std::numbers::pi * std::atan(std::sqrt(center_sq) / fs2);
  const double gain = sos_gain(sections, center_hz, rate_hz);
  if (!(gain > 0.0) || !std::isfinite(gain))
    throw NumericalError("band-pass design produced a degenerate response");
  const double per_section = 1.0 / std::sqrt(gain);
  for (Biquad& s : sections) {
    s.b0 *= per_section;
    s.b2 *= per_section;
  }
  return sections;
}

// Causal run through the chain, direct form II transposed.
inline Eigen::VectorXd sos_filter_forward(const SosChain& sections, const Eigen::VectorXd& x) {
  Eigen::VectorXd y = x;
  for (const Biquad& s : sections) {
    double z1 = 0.0, z2 = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      const double in = y[i];
      const double out = s.b0 * in + z1;
      z1 = s.b1 * in - s.a1 * out + z2;
      z2 = s.b2 * in - s.a2 * out;
      y[i] = out;
    }
  }
  return y;
}

// Number of samples after which the chain's slowest pole has decayed to 0.1%.
inline Eigen::Index sos_settle_length(const SosChain& sections) {
  double radius = 0.0;
  for (const Biquad& s : sections) radius = std::max(radius, std::sqrt(std::abs(s.a2)));
  if (!(radius > 0.0) || radius >= 1.0) return 9;
  return static_cast<Eigen::Index>(std::ceil(std::log(1e-3) / std::log(radius)));
}

// Zero-phase filtering: forward pass, reverse, forward again, reverse. The
// input is extended at both ends by odd reflection (3x the chain's settle
// length) so filter start-up transients land in the padding, not the data.
inline Eigen::VectorXd sos_filtfilt(const SosChain& sections, const Eigen::VectorXd& x) {
  const Eigen::Index n = x.size();
  if (n == 0) return x;
  const Eigen::Index pad = std::min(3 * sos_settle_length(sections), n - 1);

  Eigen::VectorXd extended(n + 2 * pad);
  for (Eigen::Index i = 0; i < pad; ++i) extended[i] = 2.0 * x[0] - x[pad - i];
  extended.segment(pad, n) = x;
  for (Eigen::Index i = 0; i < pad; ++i)
    extended[pad + n + i] = 2.0 * x[n - 1] - x[n - 2 - i];

  Eigen::VectorXd y = sos_filter_forward(sections, extended);
  y.reverseInPlace();
  y = sos_filter_forward(sections, y);
  y.reverseInPlace();
  return y.segment(pad, n);
}

inline TimeSeries notch_filter(const TimeSeries& x, double notch_hz = 60.0,
                               double bandwidth_hz = 2.0) {
  const SosChain sections = design_notch(notch_hz, bandwidth_hz, x.rate_hz);
  return TimeSeries{sos_filtfilt(sections, x.samples), x.rate_hz};
}

inline TimeSeries bandpass_filter(const TimeSeries& x, double lo_hz = 1.0, double hi_hz = 30.0) {
  const SosChain sections = design_bandpass4(lo_hz, hi_hz, x.rate_hz);
  return TimeSeries{sos_filtfilt(sections, x.samples), x.rate_hz};
}

namespace detail {

inline double sinc(double x) {
  if (x == 0.0) return 1.0;
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

// Modified Bessel function of the first kind, order zero (power series).
inline double bessel_i0(double x) {
  double sum = 1.0, term = 1.0;
  const double half_sq = x * x / 4.0;
  for (int k = 1; k < 64; ++k) {
    term *= half_sq / (static_cast<double>(k) * k);
    sum += term;
    if (term < sum * 1e-18) break;
  }
  return sum;
}

struct ResamplerTaps {
  std::vector<double> taps;
  Eigen::Index delay = 0;  // group delay in virtual-rate samples
};

// Kaiser-windowed sinc low-pass at the 600 Hz virtual rate (cutoff 30 Hz,
// 80 dB design rejection), scaled by the upsampling factor and then DC-
// normalized per polyphase branch so a constant input is reproduced exactly.
inline const ResamplerTaps& resampler_taps_200_to_60() {
  static const ResamplerTaps cached = [] {
    constexpr int kUp = 3;
    constexpr double kRejectionDb = 80.0;
    constexpr double kCutoff = 0.05;          // 30 Hz / 600 Hz
    constexpr double kTransition = 1.0 / 120.0;  // 5 Hz / 600 Hz
    const double beta = 0.1102 * (kRejectionDb - 8.7);
    int order = static_cast<int>(std::ceil(
        (kRejectionDb - 7.95) / (2.285 * 2.0 * std::numbers::pi * kTransition)));
    if (order % 2 != 0) ++order;  // even order -> odd length -> integer delay
    const int length = order + 1;
    const double half = order / 2.0;

    ResamplerTaps r;
    r.taps.resize(static_cast<std::size_t>(length));
    r.delay = static_cast<Eigen::Index>(order / 2);
    const double i0_beta = bessel_i0(beta);
    for (int k = 0; k < length; ++k) {
      const double offset = (k - half) / half;
      const double window = bessel_i0(beta * std::sqrt(1.0 - offset * offset)) / i0_beta;
      r.taps[static_cast<std::size_t>(k)] =
          kUp * 2.0 * kCutoff * sinc(2.0 * kCutoff * (k - half)) * window;
    }
    for (int phase = 0; phase < kUp; ++phase) {
      double sum = 0.0;
      for (int k = phase; k < length; k += kUp) sum += r.taps[static_cast<std::size_t>(k)];
      for (int k = phase; k < length; k += kUp) r.taps[static_cast<std::size_t>(k)] /= sum;
    }
    return r;
  }();
  return cached;
}

}  // namespace detail

// Rational 3/10 polyphase resampling, 200 Hz -> 60 Hz. Output length is
// floor(3n/10); sample i is the anti-aliased interpolation at time 10i/3
// input samples (the filter's integer group delay is compensated). The input
// is extended by sample-hold at both ends, so together with the per-branch DC
// normalization a constant input maps to the same constant everywhere.
inline TimeSeries resample_200_to_60(const TimeSeries& x) {
  if (x.rate_hz != 200.0) throw ParameterError("resampler expects a 200 Hz input");
  constexpr Eigen::Index kUp = 3, kDown = 10;
  const Eigen::Index n = x.samples.size();
  const Eigen::Index n_out = (n * kUp) / kDown;
  const auto& design = detail::resampler_taps_200_to_60();
  const auto& h = design.taps;
  const auto n_taps = static_cast<Eigen::Index>(h.size());

  Eigen::VectorXd out(n_out);
  for (Eigen::Index i = 0; i < n_out; ++i) {
    const Eigen::Index base = kDown * i + design.delay;
    double acc = 0.0;
    for (Eigen::Index k = base % kUp; k < n_taps; k += kUp) {
      const Eigen::Index m = std::clamp<Eigen::Index>((base - k) / kUp, 0, n - 1);
      acc += h[static_cast<std::size_t>(k)] * x.samples[m];
    }
    out[i] = acc;
  }
  return TimeSeries{std::move(out), 60.0};
}

inline constexpr int kEpochSeconds = 8;
inline constexpr int kRawRateHz = 200;
inline constexpr int kCleanRateHz = 60;
inline constexpr int kRawEpochSamples = kEpochSeconds * kRawRateHz;      // 1600
inline constexpr int kCleanEpochSamples = kEpochSeconds * kCleanRateHz;  // 480

// One labeled 8 s window carrying every view downstream features need:
// artifact-cleaned EEG at 60 Hz, notch-only EEG at the native 200 Hz (for
// spectral estimation out to 50 Hz), and raw EOG at 200 Hz (for blinks).
struct Epoch {
  int index = 0;
  double perclos = 0.0;
  Eigen::MatrixXd eeg_clean60;    // 480 x n_channels
  Eigen::MatrixXd eeg_notched200; // 1600 x n_channels
  Eigen::VectorXd eog_raw200;     // 1600
};

inline std::vector<Epoch> split_epochs(const Eigen::MatrixXd& eeg_clean60,
                                       const Eigen::MatrixXd& eeg_notched200,
                                       const Eigen::VectorXd& eog_raw200,
                                       const Eigen::VectorXd& perclos) {
  const Eigen::Index n_epochs = perclos.size();
  if (eeg_notched200.cols() != eeg_clean60.cols())
    throw AlignmentError("channel counts differ between 200 Hz and 60 Hz views");
  if (eeg_notched200.rows() < n_epochs * kRawEpochSamples ||
      eog_raw200.size() < n_epochs * kRawEpochSamples)
    throw AlignmentError("200 Hz stream shorter than the labeled epoch span");
  if (eeg_clean60.rows() < n_epochs * kCleanEpochSamples)
    throw AlignmentError("60 Hz stream shorter than the labeled epoch span");

  std::vector<Epoch> epochs;
  epochs.reserve(static_cast<std::size_t>(n_epochs));
  for (Eigen::Index e = 0; e < n_epochs; ++e) {
    Epoch ep;
    ep.index = static_cast<int>(e);
    ep.perclos = perclos[e];
    ep.eeg_clean60 = eeg_clean60.middleRows(e * kCleanEpochSamples, kCleanEpochSamples);
    ep.eeg_notched200 = eeg_notched200.middleRows(e * kRawEpochSamples, kRawEpochSamples);
    ep.eog_raw200 = eog_raw200.segment(e * kRawEpochSamples, kRawEpochSamples);
    epochs.push_back(std::move(ep));
  }
  return epochs;
}

// Column-wise zero-phase filtering for multichannel data.
inline Eigen::MatrixXd sos_filtfilt_columns(const SosChain& sections, const Eigen::MatrixXd& x) {
  Eigen::MatrixXd y(x.rows(), x.cols());
  for (Eigen::Index c = 0; c < x.cols(); ++c) y.col(c) = sos_filtfilt(sections, x.col(c));
  return y;
}

}  // namespace vigil
