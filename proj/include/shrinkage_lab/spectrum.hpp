#pragma once

#include <complex>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "shrinkage_lab/population_spectrum.hpp"

namespace shrinkage_lab {

namespace detail {
class InverseMap;
}

/// Stieltjes transform m of F_{gamma,H} and its companion at one point.
struct StieltjesValue {
  std::complex<double> m;
  std::complex<double> companion;
  /// |m - \int dH(t) / (t (1 - gamma - gamma z m) - z)|
  double residual;
};

/// Solves the generalized Marchenko-Pastur equation at Im z > 0.
/// Throws DomainError for Im z <= 0 and ConvergenceError on failure.
StieltjesValue solve_stieltjes(const PopulationSpectrum& h, AspectRatio gamma,
                               std::complex<double> z);

/// One connected component of the support of F_{gamma,H} on (0, inf).
/// The companion transform is real at both edges; its values are kept
/// because they are the critical points of the inverse map.
struct SupportInterval {
  double lower;
  double upper;
  double companion_at_lower;
  double companion_at_upper;

  double width() const noexcept { return upper - lower; }
};

/// Support of the continuous part of F_{gamma,H}, sorted and disjoint.
/// Requires every atom of H to be strictly positive (DomainError otherwise).
std::vector<SupportInterval> find_support(const PopulationSpectrum& h, AspectRatio gamma);

/// Boundary value f(x) + i g(x) of the companion transform on the real axis.
struct BoundaryValue {
  double f;
  double g;
};

/// Throws DomainError when x is outside the support by more than
/// 1e-6 times the width of the nearest support interval.
BoundaryValue boundary_values(const PopulationSpectrum& h, AspectRatio gamma, double x);

/// Companion transform and its derivative at z = 0, defined for gamma > 1.
struct CompanionAtZero {
  double value;
  double derivative;
};

/// Throws DomainError when gamma < 1.
CompanionAtZero companion_at_zero(const PopulationSpectrum& h, AspectRatio gamma);

/// Solved limiting spectrum F_{gamma,H} sampled on a quadrature grid.
///
/// Each support interval [a, b] carries N (odd) nodes
///   x_j = (a + b)/2 - (b - a)/2 cos(theta_j),  theta_j = j pi / (N + 1),
/// with trapezoid weights in theta. Every integrand the library evaluates
/// carries a factor g, which vanishes like a square root at soft edges, so
/// the rule converges geometrically. Even-indexed nodes with doubled weights
/// form the N/2 rule used for error estimates.
///
/// Immutable after construction; safe to share between threads.
class LimitingSpectrum {
 public:
  const PopulationSpectrum& population() const noexcept { return population_; }
  AspectRatio aspect_ratio() const noexcept { return gamma_; }
  double gamma() const noexcept { return gamma_.value(); }
  const std::vector<SupportInterval>& support() const noexcept { return support_; }

  std::size_t size() const noexcept { return x_.size(); }
  std::span<const double> x() const noexcept { return x_; }
  std::span<const double> f() const noexcept { return f_; }
  std::span<const double> g() const noexcept { return g_; }
  std::span<const double> density() const noexcept { return density_; }
  /// Quadrature weights dx_j of the fine rule.
  std::span<const double> weights() const noexcept { return weights_; }
  /// Weights of the half-resolution rule (zero on odd nodes).
  std::span<const double> coarse_weights() const noexcept { return coarse_weights_; }
  /// Derivative of f + i g along the real axis at each node.
  std::span<const std::complex<double>> companion_derivative() const noexcept {
    return derivative_;
  }
  /// Index into support() of the interval holding each node.
  std::span<const int> interval_index() const noexcept { return interval_; }

  double atom0_mass() const noexcept { return gamma_.atom_at_zero(); }
  /// m(0) and m'(0) of the companion transform; present iff gamma > 1.
  const std::optional<CompanionAtZero>& zero() const noexcept { return zero_; }
  /// Throws DomainError when gamma < 1.
  double m0() const;
  double m0_prime() const;

  /// Continuous mass plus atom at zero.
  double total_mass() const;
  /// \int x dF_{gamma,H}(x)
  double first_moment() const;

  /// F-measure of each node: density_j * weight_j.
  std::vector<double> measure_weights() const;

  bool in_support(double x, double relative_tolerance = 1e-6) const;
  /// Boundary value at an arbitrary point of the support.
  BoundaryValue boundary_value(double x) const;
  /// Companion transform at Im z > 0.
  std::complex<double> companion(std::complex<double> z) const;
  /// d/dz of the companion transform, from the inverse-map derivative at m.
  std::complex<double> companion_slope(std::complex<double> companion_value) const;

 private:
  friend LimitingSpectrum build_limiting_spectrum(const PopulationSpectrum&, AspectRatio, int);
  LimitingSpectrum(PopulationSpectrum h, AspectRatio gamma);

  PopulationSpectrum population_;
  AspectRatio gamma_;
  std::shared_ptr<const detail::InverseMap> map_;
  std::vector<SupportInterval> support_;
  std::vector<double> x_, f_, g_, density_, weights_, coarse_weights_;
  std::vector<std::complex<double>> derivative_;
  std::vector<int> interval_;
  std::optional<CompanionAtZero> zero_;
};

/// Solves F_{gamma,H} on a grid of roughly grid_size nodes (>= 64).
LimitingSpectrum build_limiting_spectrum(const PopulationSpectrum& h, AspectRatio gamma,
                                         int grid_size = 512);

}  // namespace shrinkage_lab
