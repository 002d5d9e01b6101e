#pragma once

// Reference values computed independently of the library's solvers.

#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

inline constexpr double kPi = 3.14159265358979323846;

/// Closed-form Marchenko-Pastur density (identity population), continuous part.
inline double mp_density(double gamma, double x) {
  const double lo = std::pow(1.0 - std::sqrt(gamma), 2), hi = std::pow(1.0 + std::sqrt(gamma), 2);
  if (x <= lo || x >= hi) return 0.0;
  return std::sqrt((hi - x) * (x - lo)) / (2.0 * kPi * gamma * x);
}

inline double mp_lower(double gamma) { return std::pow(1.0 - std::sqrt(gamma), 2); }
inline double mp_upper(double gamma) { return std::pow(1.0 + std::sqrt(gamma), 2); }

/// Stieltjes transform of the identity-population law at z, Im z > 0: the root
/// of gamma z m^2 - (1 - gamma - z) m + 1 = 0 with positive imaginary part.
inline std::complex<double> mp_stieltjes(double gamma, std::complex<double> z) {
  const std::complex<double> b = 1.0 - gamma - z;
  const std::complex<double> disc = std::sqrt(b * b - 4.0 * gamma * z);
  const std::complex<double> r1 = (b + disc) / (2.0 * gamma * z);
  const std::complex<double> r2 = (b - disc) / (2.0 * gamma * z);
  return r1.imag() > 0.0 ? r1 : r2;
}

/// Symmetric h(S) built from a dense eigen-decomposition.
template <class F>
Eigen::MatrixXd spectral_apply(const Eigen::MatrixXd& s, F h) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
  Eigen::VectorXd d = es.eigenvalues();
  for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = h(std::max(d(i), 0.0));
  return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
}

/// Simpson rule on [a, b] with n (even) panels.
template <class F>
double simpson(F f, double a, double b, int n = 20000) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

/// \int phi dF for the identity population, substituting x = c + r cos(theta)
/// to remove the square-root edges.
template <class F>
double mp_integral(double gamma, F phi, int n = 4000) {
  const double lo = mp_lower(gamma), hi = mp_upper(gamma);
  const double c = 0.5 * (lo + hi), r = 0.5 * (hi - lo);
  auto integrand = [&](double th) {
    const double x = c + r * std::cos(th);
    return phi(x) * mp_density(gamma, x) * r * std::sin(th);
  };
  double v = simpson(integrand, 0.0, kPi, n);
  if (gamma > 1.0) v += (1.0 - 1.0 / gamma) * phi(0.0);
  return v;
}

}  // namespace oracle
