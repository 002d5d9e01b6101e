#pragma once

#include <Eigen/Dense>

namespace shrinkage_lab {

/// Eigenvalues (ascending) and optionally eigenvectors of a symmetric matrix.
struct EigenSystem {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
};

/// LAPACK dsyevr on the lower triangle of a. Throws ConvergenceError.
EigenSystem symmetric_eigen(const Eigen::MatrixXd& a, bool with_vectors);

/// a a' / scale via a symmetric rank-k update (lower triangle filled too).
Eigen::MatrixXd gram_rows(const Eigen::MatrixXd& a, double scale);
/// a' a / scale.
Eigen::MatrixXd gram_cols(const Eigen::MatrixXd& a, double scale);

/// Nonzero eigen-pairs of S = X X' / n for a p x n matrix X: the thin SVD
/// X / sqrt(n) = U diag(sqrt(values)) V'. When p > n only the n eigenvalues
/// of the Gram matrix X'X / n are computed; the remaining p - rank
/// directions have eigenvalue zero.
struct SampleSpectrum {
  int p = 0;
  int n = 0;
  /// Ascending, all strictly positive.
  Eigen::VectorXd values;
  /// p x rank, orthonormal columns.
  Eigen::MatrixXd vectors;

  int rank() const noexcept { return static_cast<int>(values.size()); }
  /// Eigenvalues of S including the zeros, ascending, length p.
  Eigen::VectorXd all_values() const;
};

/// Eigenvalues at or below 1e-12 times the largest are treated as zero.
SampleSpectrum sample_covariance_spectrum(const Eigen::MatrixXd& x, bool with_vectors = true);

}  // namespace shrinkage_lab
