#pragma once

#include <complex>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "shrinkage_lab/shrinkage_function.hpp"
#include "shrinkage_lab/spectrum.hpp"

namespace shrinkage_lab {

/// A limiting trace functional with its quadrature diagnostics.
struct FunctionalValue {
  double value = 0.0;
  /// Contribution of the continuous part of the spectrum.
  double bulk = 0.0;
  /// Contribution of the atom at zero (gamma > 1), zero otherwise.
  double atom = 0.0;
  /// |fine rule - half-resolution rule|
  double error_estimate = 0.0;
  /// Set when error_estimate exceeds 1e-6 |value| + 1e-9.
  bool flagged = false;
};

/// Quadrature representation of the limits of p^{-1} tr(Sigma h(S_n)) (M) and
/// p^{-1} tr(Sigma h(S_n) Sigma h(S_n)) (T) on the grid of one spectrum.
///
/// A function enters as the vector v = (h(x_1), ..., h(x_N)[, h(0)]); the
/// trailing entry exists only when gamma > 1. Then
///   M(h) = m_weights . v,   T(h) = v' t_matrix v.
class TraceOperator {
 public:
  explicit TraceOperator(const LimitingSpectrum& spectrum);

  /// N, or N + 1 when the atom at zero carries its own variable.
  Eigen::Index dimension() const noexcept { return m_weights_.size(); }
  bool has_atom() const noexcept { return has_atom_; }

  const Eigen::VectorXd& m_weights() const noexcept { return m_weights_; }
  /// Symmetric matrix of the T quadratic form.
  const Eigen::MatrixXd& t_matrix() const noexcept { return t_matrix_; }

  Eigen::VectorXd vectorize(const SampledFunction& h) const;

  FunctionalValue m(const SampledFunction& h) const;
  FunctionalValue t(const SampledFunction& h) const;
  /// Symmetric bilinear form whose diagonal is T; equal to
  /// (T(a + b) - T(a - b)) / 4.
  double t_bilinear(const SampledFunction& a, const SampledFunction& b) const;

 private:
  bool has_atom_;
  Eigen::VectorXd m_weights_, m_weights_coarse_;
  Eigen::MatrixXd t_matrix_, t_matrix_coarse_;
};

/// M_{gamma,H}(h) = \int h g / (gamma pi x (f^2 + g^2)) dx + h(0) / (gamma m(0)) [gamma > 1].
/// Throws EvaluationError when h is not finite on the grid or at zero.
FunctionalValue m_functional(const LimitingSpectrum& spectrum, const ShrinkageFunction& h);

/// T_{gamma,H}(h): single integral, double integral against K, and the
/// h(0) terms for gamma > 1.
FunctionalValue t_functional(const LimitingSpectrum& spectrum, const ShrinkageFunction& h);

/// Polarized T(h1, h2).
double t_bilinear(const LimitingSpectrum& spectrum, const ShrinkageFunction& h1,
                  const ShrinkageFunction& h2);

/// Limit of p^{-1} tr(Sigma (S_n - z1)^{-1} Sigma (S_n - z2)^{-1}).
/// Points below the real axis use m(conj z) = conj m(z). When
/// |z1 - z2| < 1e-8 the divided difference is replaced by m'(z1).
/// Throws DomainError for a real argument.
std::complex<double> two_resolvent_limit(const LimitingSpectrum& spectrum, std::complex<double> z1,
                                         std::complex<double> z2);

/// Kernel K(x, y) of the T double integral. Symmetric; the removable
/// singularity on the diagonal is filled with its analytic limit.
/// Throws DomainError outside the support.
double kernel_K(const LimitingSpectrum& spectrum, double x, double y);

/// Frobenius-optimal covariance shrinker 1 / (x (f^2 + g^2)); at zero
/// 1 / ((gamma - 1) m(0)) for gamma > 1, the value at the first node otherwise.
ShrinkageFunction lp_covariance_shrinker(const LimitingSpectrum& spectrum);

/// Precision-matrix shrinker (gamma - 1 - 2 x f) / x. Throws DomainError when
/// the spectrum has mass at or near zero (gamma > 1 or support touching 0).
ShrinkageFunction lp_precision_shrinker(const LimitingSpectrum& spectrum);

}  // namespace shrinkage_lab
