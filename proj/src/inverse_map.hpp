#pragma once

#include <complex>
#include <vector>

#include "shrinkage_lab/population_spectrum.hpp"

namespace shrinkage_lab::detail {

using cplx = std::complex<double>;

/// Inverse of the companion Stieltjes transform,
///   z(m) = -1/m + gamma * \int t / (1 + t m) dH(t),
/// together with the solvers that invert it.
class InverseMap {
 public:
  InverseMap(const PopulationSpectrum& h, double gamma);

  cplx z(cplx m) const;
  cplx dz(cplx m) const;

  /// \int (t m / (1 + t m))^2 dH(t) for real m. z'(m) = (1 - gamma psi(m)) / m^2.
  double psi(double m) const;
  /// gamma \int t m / (1 + t m) dH(t) - 1; vanishes at m(0) when gamma > 1.
  double zero_equation(double m) const;

  /// Stieltjes transform of F from the companion value at z.
  cplx stieltjes_from_companion(cplx z, cplx companion) const;
  /// |m - \int dH / (t (1 - gamma - gamma z m) - z)|
  double fixed_point_residual(cplx z, cplx m) const;

  /// Companion transform at Im z > 0, reached by imaginary-part continuation
  /// from far above the support. Throws ConvergenceError.
  cplx solve_upper(cplx z) const;
  /// Boundary value lim_{eps -> 0} m(x + i eps) for real x > 0.
  cplx boundary(double x) const;

  double gamma() const noexcept { return gamma_; }
  const std::vector<double>& locations() const noexcept { return t_; }
  const std::vector<double>& weights() const noexcept { return w_; }
  /// Upper bound on the support: t_max (1 + sqrt(gamma))^2.
  double spectral_scale() const noexcept { return scale_; }

 private:
  struct NewtonResult {
    cplx m;
    double residual;
    bool converged;
  };
  NewtonResult newton(cplx z, cplx guess, int max_iter) const;
  cplx damped_fixed_point(cplx z, cplx companion_guess, int max_iter) const;
  cplx descend(double x, double eta_target, cplx guess, double eta_start) const;

  std::vector<double> t_;
  std::vector<double> w_;
  double gamma_;
  double scale_;
};

}  // namespace shrinkage_lab::detail
