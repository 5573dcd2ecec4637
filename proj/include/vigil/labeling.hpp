#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vigil/errors.hpp"

namespace vigil {

enum class DrowsinessLevel : int { Minor = 0, Moderate = 1, Severe = 2 };

inline const char* to_string(DrowsinessLevel level) {
  switch (level) {
    case DrowsinessLevel::Minor: return "minor";
    case DrowsinessLevel::Moderate: return "moderate";
    case DrowsinessLevel::Severe: return "severe";
  }
  throw ParameterError("invalid drowsiness level");
}

inline DrowsinessLevel level_from_index(int index) {
  if (index < 0 || index > 2) throw ParameterError("class index must be 0, 1, or 2");
  return static_cast<DrowsinessLevel>(index);
}

// Per-recording PERCLOS cut points. Thresholds sit at fixed fractions of the
// recording's own observed range, so a sleepy recording and an alert one are
// each discretized relative to their own span.
struct ThresholdPair {
  double minor_upper = 0.0;     // boundary between minor and moderate
  double moderate_upper = 0.0;  // boundary between moderate and severe
  double perclos_min = 0.0;
  double perclos_max = 0.0;
};

inline constexpr double kMinorRangeFraction = 0.125;
inline constexpr double kModerateRangeFraction = 0.30;

inline ThresholdPair compute_thresholds(const Eigen::VectorXd& perclos,
                                        double minor_fraction = kMinorRangeFraction,
                                        double moderate_fraction = kModerateRangeFraction) {
  if (perclos.size() == 0) throw ParameterError("PERCLOS series must be non-empty");
  if (!(minor_fraction >= 0.0 && moderate_fraction >= minor_fraction && moderate_fraction <= 1.0))
    throw ParameterError("threshold fractions must satisfy 0 <= minor <= moderate <= 1");
  double lo = perclos[0];
  double hi = perclos[0];
  for (Eigen::Index i = 0; i < perclos.size(); ++i) {
    const double v = perclos[i];
    if (!std::isfinite(v) || v < 0.0 || v > 1.0)
      throw ValidationError("PERCLOS values must lie in [0, 1]");
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  ThresholdPair t;
  t.perclos_min = lo;
  t.perclos_max = hi;
  t.minor_upper = lo + (hi - lo) * minor_fraction;
  t.moderate_upper = lo + (hi - lo) * moderate_fraction;
  return t;
}

// Half-open intervals; a value exactly on a boundary takes the upper class.
inline DrowsinessLevel discretize_value(double perclos, const ThresholdPair& thresholds) {
  if (!std::isfinite(perclos) || perclos < 0.0 || perclos > 1.0)
    throw ValidationError("PERCLOS values must lie in [0, 1]");
  if (perclos < thresholds.minor_upper) return DrowsinessLevel::Minor;
  if (perclos < thresholds.moderate_upper) return DrowsinessLevel::Moderate;
  return DrowsinessLevel::Severe;
}

inline std::vector<DrowsinessLevel> discretize(const Eigen::VectorXd& perclos,
                                               const ThresholdPair& thresholds) {
  std::vector<DrowsinessLevel> levels;
  levels.reserve(static_cast<std::size_t>(perclos.size()));
  for (Eigen::Index i = 0; i < perclos.size(); ++i)
    levels.push_back(discretize_value(perclos[i], thresholds));
  return levels;
}

}  // namespace vigil
