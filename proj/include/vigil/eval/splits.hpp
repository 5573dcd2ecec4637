#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "vigil/errors.hpp"
#include "vigil/rng.hpp"

namespace vigil {

struct TrainTestSplit {
  std::vector<int> train;  // ascending
  std::vector<int> test;   // ascending
};

// Fisher-Yates shuffle of [0, n), first round(n * test_fraction) indices
// become the test set (clamped so both sides are non-empty). Index sets are
// returned sorted; together they partition [0, n).
inline TrainTestSplit shuffle_split(int n, double test_fraction, std::uint64_t seed) {
  if (n < 4) throw ParameterError("shuffle_split requires n >= 4");
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw ParameterError("test_fraction must lie in (0, 1)");
  std::vector<int> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  Rng rng(seed);
  rng.shuffle(order);

  auto n_test = static_cast<long>(std::llround(static_cast<double>(n) * test_fraction));
  n_test = std::clamp<long>(n_test, 1, n - 1);

  TrainTestSplit split;
  split.test.assign(order.begin(), order.begin() + n_test);
  split.train.assign(order.begin() + n_test, order.end());
  std::sort(split.test.begin(), split.test.end());
  std::sort(split.train.begin(), split.train.end());
  return split;
}

// k-fold cross-validation folds over [0, n): one shuffle, then contiguous
// chunks with the remainder spread over the first folds (larger folds first).
// Every index appears in exactly one validation fold.
inline std::vector<TrainTestSplit> kfold_splits(int n, int k, std::uint64_t seed) {
  if (k < 2) throw ParameterError("k-fold requires k >= 2");
  if (k > n) throw ParameterError("k-fold requires k <= n");
  std::vector<int> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  Rng rng(seed);
  rng.shuffle(order);

  std::vector<TrainTestSplit> folds;
  folds.reserve(static_cast<std::size_t>(k));
  const int base = n / k;
  const int remainder = n % k;
  int at = 0;
  for (int f = 0; f < k; ++f) {
    const int size = base + (f < remainder ? 1 : 0);
    TrainTestSplit fold;
    fold.test.assign(order.begin() + at, order.begin() + at + size);
    fold.train.reserve(static_cast<std::size_t>(n - size));
    fold.train.insert(fold.train.end(), order.begin(), order.begin() + at);
    fold.train.insert(fold.train.end(), order.begin() + at + size, order.end());
    std::sort(fold.test.begin(), fold.test.end());
    std::sort(fold.train.begin(), fold.train.end());
    folds.push_back(std::move(fold));
    at += size;
  }
  return folds;
}

}  // namespace vigil
