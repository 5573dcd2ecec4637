#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "vigil/errors.hpp"

namespace vigil {

// splitmix64: used to expand a single 64-bit seed into independent streams and
// to seed Xoshiro256++ state. Constants are Sebastiano Vigna's published ones.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

// xoshiro256++ with splitmix64 seeding. Every stochastic component in the
// library draws from this generator so that a run is reproducible from its
// seed alone, independent of platform and standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    SplitMix64 sm(seed);
    for (auto& word : s_) word = sm.next();
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Unbiased uniform integer in [0, n) by rejection.
  std::uint64_t uniform_below(std::uint64_t n) {
    if (n == 0) throw ParameterError("uniform_below requires n >= 1");
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r >= threshold) return r % n;
    }
  }

  // Standard normal via Box-Muller; the second variate of each pair is cached.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    // u1 in (0, 1] so the log is finite.
    const double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = uniform01();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

  // Knuth's product method; fine for the small rates used here.
  int poisson(double mean) {
    if (!(mean >= 0.0)) throw ParameterError("poisson requires mean >= 0");
    if (mean == 0.0) return 0;
    const double limit = std::exp(-mean);
    int k = 0;
    double product = 1.0;
    do {
      ++k;
      product *= uniform01();
    } while (product > limit);
    return k - 1;
  }

  // In-place Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(uniform_below(i));
      std::swap(values[i - 1], values[j]);
    }
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  std::uint64_t s_[4];
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Derives the seed for a named sub-stream; mixing the index through splitmix64
// keeps sibling streams statistically independent.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  SplitMix64 sm(base ^ (0x632BE59BD9B4E019ull * (index + 1)));
  return sm.next();
}

}  // namespace vigil
