#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "vigil/errors.hpp"
#include "vigil/rng.hpp"

namespace vigil {

// Result of a FastICA fit on an n x p data matrix X (rows = samples).
// sources = (X - mean) * unmixing^T, and X is recovered (up to numerical
// round-off) as sources * mixing^T + mean, with mixing = unmixing^{-1}.
struct IcaDecomposition {
  Eigen::MatrixXd unmixing;   // p x p
  Eigen::MatrixXd mixing;     // p x p
  Eigen::MatrixXd sources;    // n x p, unit variance per column
  Eigen::RowVectorXd means;   // 1 x p
  bool converged = false;
  int iterations = 0;
};

namespace detail {

// Symmetric decorrelation: W <- (W W^T)^{-1/2} W.
inline Eigen::MatrixXd symmetric_decorrelation(const Eigen::MatrixXd& w) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(w * w.transpose());
  const Eigen::VectorXd& values = eig.eigenvalues();
  if (values.minCoeff() <= 0.0)
    throw NumericalError("unmixing matrix became singular during decorrelation");
  return eig.eigenvectors() * values.cwiseSqrt().cwiseInverse().asDiagonal() *
         eig.eigenvectors().transpose() * w;
}

}  // namespace detail

// Symmetric (parallel) FastICA with the log-cosh contrast. The data is mean-
// centered and PCA-whitened first; the rotation is initialized from `seed` and
// iterated with symmetric decorrelation until the largest change in any
// component direction falls below `tolerance`.
inline IcaDecomposition fit_fastica(const Eigen::MatrixXd& x, std::uint64_t seed,
                                    int max_iterations = 500, double tolerance = 1e-5) {
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  if (p < 1) throw ParameterError("ICA requires at least one column");
  if (n < p) throw ParameterError("ICA requires at least as many samples as channels");
  if (max_iterations < 1) throw ParameterError("max_iterations must be >= 1");
  if (!(tolerance > 0.0)) throw ParameterError("tolerance must be positive");
  if (!x.allFinite()) throw ParameterError("ICA input must be finite");

  IcaDecomposition result;
  result.means = x.colwise().mean();
  const Eigen::MatrixXd centered = x.rowwise() - result.means;

  const Eigen::MatrixXd covariance =
      centered.transpose() * centered / static_cast<double>(n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(covariance);
  const Eigen::VectorXd& eigenvalues = eig.eigenvalues();  // ascending
  if (!(eigenvalues.maxCoeff() > 0.0) ||
      eigenvalues.minCoeff() < 1e-10 * eigenvalues.maxCoeff())
    throw DegenerateInputError(
        "covariance is rank-deficient; channels are linearly dependent or constant");

  // Whitening K and its exact inverse from the same eigendecomposition.
  const Eigen::MatrixXd whitening = eigenvalues.cwiseSqrt().cwiseInverse().asDiagonal() *
                                    eig.eigenvectors().transpose();
  const Eigen::MatrixXd dewhitening = eig.eigenvectors() * eigenvalues.cwiseSqrt().asDiagonal();
  const Eigen::MatrixXd whitened = centered * whitening.transpose();  // n x p

  Rng rng(seed);
  Eigen::MatrixXd rotation(p, p);
  for (Eigen::Index r = 0; r < p; ++r)
    for (Eigen::Index c = 0; c < p; ++c) rotation(r, c) = rng.normal();
  rotation = detail::symmetric_decorrelation(rotation);

  for (int iteration = 1; iteration <= max_iterations; ++iteration) {
    const Eigen::MatrixXd projected = whitened * rotation.transpose();      // n x p
    const Eigen::MatrixXd g = projected.array().tanh().matrix();            // n x p
    const Eigen::VectorXd g_prime_mean =
        (1.0 - g.array().square()).colwise().mean().transpose();            // p
    Eigen::MatrixXd updated = (g.transpose() * whitened) / static_cast<double>(n) -
                              g_prime_mean.asDiagonal() * rotation;
    updated = detail::symmetric_decorrelation(updated);

    const double drift =
        ((updated * rotation.transpose()).diagonal().cwiseAbs().array() - 1.0)
            .abs()
            .maxCoeff();
    rotation = std::move(updated);
    result.iterations = iteration;
    if (drift < tolerance) {
      result.converged = true;
      break;
    }
  }

  result.sources = whitened * rotation.transpose();
  result.unmixing = rotation * whitening;
  result.mixing = dewhitening * rotation.transpose();
  return result;
}

// Indices (ascending) of components whose absolute Pearson correlation with
// the reference signal strictly exceeds `threshold`. A zero-variance side
// makes the correlation 0 by convention.
inline std::vector<int> flag_artifact_components(const IcaDecomposition& ica,
                                                 const Eigen::VectorXd& reference,
                                                 double threshold = 0.6) {
  if (reference.size() != ica.sources.rows())
    throw AlignmentError("reference length does not match the source rows");
  if (!(threshold >= 0.0)) throw ParameterError("threshold must be >= 0");
  const Eigen::VectorXd ref_centered = reference.array() - reference.mean();
  const double ref_norm = ref_centered.norm();
  std::vector<int> flagged;
  for (Eigen::Index c = 0; c < ica.sources.cols(); ++c) {
    const Eigen::VectorXd src = ica.sources.col(c).array() - ica.sources.col(c).mean();
    const double denom = ref_norm * src.norm();
    const double r = denom > 0.0 ? ref_centered.dot(src) / denom : 0.0;
    if (std::abs(r) > threshold) flagged.push_back(static_cast<int>(c));
  }
  return flagged;
}

// Rebuilds the signal with the listed components zeroed out. An empty list
// reproduces the input up to round-off; removing all components leaves the
// per-channel means.
inline Eigen::MatrixXd reconstruct_without(const IcaDecomposition& ica,
                                           const std::vector<int>& removed) {
  const Eigen::Index p = ica.sources.cols();
  for (const int c : removed)
    if (c < 0 || c >= p) throw ParameterError("component index out of range");
  Eigen::MatrixXd kept = ica.sources;
  for (const int c : removed) kept.col(c).setZero();
  Eigen::MatrixXd rebuilt = kept * ica.mixing.transpose();
  rebuilt.rowwise() += ica.means;
  return rebuilt;
}

}  // namespace vigil
