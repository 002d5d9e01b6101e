#include "inverse_map.hpp"

#include <algorithm>
#include <cmath>

#include "shrinkage_lab/errors.hpp"

namespace shrinkage_lab::detail {

namespace {
constexpr double kDamping = 0.5;
constexpr double kFinalEta = 1e-7;
}  // namespace

InverseMap::InverseMap(const PopulationSpectrum& h, double gamma) : gamma_(gamma) {
  t_.reserve(h.size());
  w_.reserve(h.size());
  for (const auto& a : h.atoms()) {
    t_.push_back(a.location);
    w_.push_back(a.weight);
  }
  const double r = 1.0 + std::sqrt(gamma);
  scale_ = h.max_location() * r * r;
}

cplx InverseMap::z(cplx m) const {
  cplx s = 0.0;
  for (std::size_t i = 0; i < t_.size(); ++i) s += w_[i] * t_[i] / (1.0 + t_[i] * m);
  return -1.0 / m + gamma_ * s;
}

cplx InverseMap::dz(cplx m) const {
  cplx s = 0.0;
  for (std::size_t i = 0; i < t_.size(); ++i) {
    const cplx d = 1.0 + t_[i] * m;
    s += w_[i] * t_[i] * t_[i] / (d * d);
  }
  return 1.0 / (m * m) - gamma_ * s;
}

double InverseMap::psi(double m) const {
  double s = 0.0;
  for (std::size_t i = 0; i < t_.size(); ++i) {
    const double q = t_[i] * m / (1.0 + t_[i] * m);
    s += w_[i] * q * q;
  }
  return s;
}

double InverseMap::zero_equation(double m) const {
  double s = 0.0;
  for (std::size_t i = 0; i < t_.size(); ++i) s += w_[i] * t_[i] * m / (1.0 + t_[i] * m);
  return gamma_ * s - 1.0;
}

cplx InverseMap::stieltjes_from_companion(cplx z, cplx companion) const {
  return (companion + (1.0 - gamma_) / z) / gamma_;
}

double InverseMap::fixed_point_residual(cplx z, cplx m) const {
  const cplx a = 1.0 - gamma_ - gamma_ * z * m;
  cplx rhs = 0.0;
  for (std::size_t i = 0; i < t_.size(); ++i) rhs += w_[i] / (t_[i] * a - z);
  return std::abs(m - rhs);
}

InverseMap::NewtonResult InverseMap::newton(cplx target, cplx guess, int max_iter) const {
  cplx m = guess;
  double r = std::abs(z(m) - target);
  const double tol = 1e-14 * (1.0 + std::abs(target));
  for (int it = 0; it < max_iter && r > tol; ++it) {
    const cplx d = dz(m);
    if (d == 0.0) break;
    const cplx step = -(z(m) - target) / d;
    double lambda = 1.0;
    bool accepted = false;
    for (int k = 0; k < 40; ++k, lambda *= 0.5) {
      const cplx cand = m + lambda * step;
      if (!(cand.imag() > 0.0)) continue;
      const double rc = std::abs(z(cand) - target);
      if (rc < r) {
        m = cand;
        r = rc;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    if (std::abs(lambda * step) < 1e-16 * std::abs(m)) break;
  }
  return {m, r, r <= 1e-11 * (1.0 + std::abs(target))};
}

cplx InverseMap::damped_fixed_point(cplx zv, cplx companion_guess, int max_iter) const {
  cplx m = stieltjes_from_companion(zv, companion_guess);
  for (int it = 0; it < max_iter; ++it) {
    const cplx a = 1.0 - gamma_ - gamma_ * zv * m;
    cplx rhs = 0.0;
    for (std::size_t i = 0; i < t_.size(); ++i) rhs += w_[i] / (t_[i] * a - zv);
    const cplx next = (1.0 - kDamping) * m + kDamping * rhs;
    const bool done = std::abs(next - m) < 1e-15 * (1.0 + std::abs(m));
    m = next;
    if (done) break;
  }
  return -(1.0 - gamma_) / zv + gamma_ * m;
}

cplx InverseMap::descend(double x, double eta_target, cplx guess, double eta) const {
  cplx m = guess;
  for (;;) {
    const double level = std::max(eta, eta_target);
    const cplx zv(x, level);
    auto res = newton(zv, m, 100);
    if (!res.converged) {
      const cplx fp = damped_fixed_point(zv, m, 200000);
      res = newton(zv, fp, 100);
      if (!res.converged)
        throw ConvergenceError("companion transform did not converge at z = " +
                                   std::to_string(x) + " + " + std::to_string(level) + "i",
                               res.residual);
    }
    m = res.m;
    if (level <= eta_target) return m;
    eta = level * 0.1;
  }
}

cplx InverseMap::solve_upper(cplx zv) const {
  if (!(zv.imag() > 0.0)) throw DomainError("solve_upper needs Im z > 0");
  const double s = std::max(scale_, std::abs(zv));
  double eta0 = std::pow(10.0, std::ceil(std::log10(s)));
  eta0 = std::max(eta0, zv.imag());
  const cplx top(zv.real(), eta0);
  cplx m = damped_fixed_point(top, -1.0 / top, 100000);
  return descend(zv.real(), zv.imag(), m, eta0 * 0.1);
}

cplx InverseMap::boundary(double x) const {
  const cplx near = solve_upper(cplx(x, kFinalEta));
  auto polished = newton(cplx(x, 0.0), near, 100);
  if (polished.converged && polished.m.imag() > 0.0) return polished.m;
  return near;
}

}  // namespace shrinkage_lab::detail
