#include "shrinkage_lab/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "inverse_map.hpp"
#include "shrinkage_lab/errors.hpp"
#include "shrinkage_lab/parallel.hpp"

namespace shrinkage_lab {

namespace {

using detail::cplx;
using detail::InverseMap;

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSupportTolerance = 1e-6;

// Root of a function on the open interval (lo, hi) given the sign it has
// near lo. Only interior points are evaluated, so lo/hi may be poles.
template <class F>
double bisect(F&& fn, double lo, double hi, bool positive_at_lo) {
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if ((fn(mid) > 0.0) == positive_at_lo)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

// Minimizer of a convex function on the open interval (lo, hi).
template <class F>
double golden_section(F&& fn, double lo, double hi) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  const double tol = 1e-10 * (hi - lo);
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
  double fc = fn(c), fd = fn(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = fn(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = fn(d);
    }
  }
  return 0.5 * (a + b);
}

// A maximal interval of the real axis on which the inverse map increases,
// i.e. a piece of the complement of the support. m_lo/m_hi are the
// companion values at the finite ends.
struct Gap {
  double lo, hi;
  double m_lo, m_hi;
};

std::vector<SupportInterval> support_from_map(const InverseMap& map) {
  const auto& t = map.locations();
  const double gamma = map.gamma();
  if (t.front() <= 0.0)
    throw DomainError("limiting spectrum requires strictly positive population eigenvalues");
  const std::size_t k = t.size();
  // gamma psi(m) - 1 has the sign of -z'(m)
  auto crit = [&](double m) { return gamma * map.psi(m) - 1.0; };
  auto zr = [&](double m) { return map.z(cplx(m, 0.0)).real(); };

  std::vector<Gap> gaps;

  // m in (0, inf): z rises from -inf; for gamma > 1 it turns back toward 0+
  // after a maximum, which is the left edge of the support.
  if (gamma > 1.0) {
    double hi = 1.0 / t.back();
    while (crit(hi) <= 0.0) hi *= 2.0;
    const double c = bisect(crit, 0.0, hi, false);
    gaps.push_back({-kInf, zr(c), kInf, c});
  }
  // m in (-1/t_max, 0): single minimum, the right edge.
  {
    const double c = bisect(crit, -1.0 / t.back(), 0.0, true);
    gaps.push_back({zr(c), kInf, c, kInf});
  }
  // m in (-inf, -1/t_min): for gamma < 1, z rises from 0+ to a maximum,
  // which is the left edge.
  if (gamma < 1.0) {
    double lo = -2.0 / t.front();
    while (crit(lo) >= 0.0) lo *= 2.0;
    const double c = bisect(crit, lo, -1.0 / t.front(), false);
    gaps.push_back({0.0, zr(c), -kInf, c});
  }
  // Between consecutive poles psi is convex; where its minimum drops below
  // 1/gamma the map increases and opens a gap between two bulks.
  for (std::size_t j = 0; j + 1 < k; ++j) {
    const double a = -1.0 / t[j], b = -1.0 / t[j + 1];
    const double m_min = golden_section([&](double m) { return map.psi(m); }, a, b);
    if (crit(m_min) >= 0.0) continue;
    const double c1 = bisect(crit, a, m_min, true);
    const double c2 = bisect(crit, m_min, b, false);
    const double z1 = zr(c1), z2 = zr(c2);
    if (z2 - z1 > 1e-12 * map.spectral_scale()) gaps.push_back({z1, z2, c1, c2});
  }

  std::sort(gaps.begin(), gaps.end(), [](const Gap& a, const Gap& b) { return a.lo < b.lo; });
  std::vector<SupportInterval> support;
  Gap cur = gaps.front();
  for (std::size_t i = 1; i < gaps.size(); ++i) {
    const Gap& next = gaps[i];
    if (next.lo <= cur.hi) {
      if (next.hi > cur.hi) {
        cur.hi = next.hi;
        cur.m_hi = next.m_hi;
      }
      continue;
    }
    support.push_back({cur.hi, next.lo, cur.m_hi, next.m_lo});
    cur = next;
  }
  if (support.empty() || support.front().lower <= 0.0)
    throw DomainError("could not isolate the support away from zero");
  return support;
}

CompanionAtZero zero_from_map(const InverseMap& map) {
  const auto& t = map.locations();
  double hi = 1.0 / t.front();
  while (map.zero_equation(hi) <= 0.0) hi *= 2.0;
  const double m0 = bisect([&](double m) { return map.zero_equation(m); }, 0.0, hi, false);
  const double slope = map.dz(cplx(m0, 0.0)).real();
  return {m0, 1.0 / slope};
}

void check_in_support(const std::vector<SupportInterval>& support, double x) {
  for (const auto& s : support) {
    const double tol = kSupportTolerance * s.width();
    if (x >= s.lower - tol && x <= s.upper + tol) return;
  }
  throw DomainError("x = " + std::to_string(x) + " lies outside the support");
}

BoundaryValue to_boundary(cplx m) { return {m.real(), std::max(m.imag(), 0.0)}; }

}  // namespace

StieltjesValue solve_stieltjes(const PopulationSpectrum& h, AspectRatio gamma, std::complex<double> z) {
  if (!(z.imag() > 0.0)) throw DomainError("solve_stieltjes requires Im z > 0");
  const InverseMap map(h, gamma.value());
  const cplx companion = map.solve_upper(z);
  const cplx m = map.stieltjes_from_companion(z, companion);
  return {m, companion, map.fixed_point_residual(z, m)};
}

std::vector<SupportInterval> find_support(const PopulationSpectrum& h, AspectRatio gamma) {
  return support_from_map(InverseMap(h, gamma.value()));
}

BoundaryValue boundary_values(const PopulationSpectrum& h, AspectRatio gamma, double x) {
  const InverseMap map(h, gamma.value());
  check_in_support(support_from_map(map), x);
  return to_boundary(map.boundary(x));
}

CompanionAtZero companion_at_zero(const PopulationSpectrum& h, AspectRatio gamma) {
  if (!gamma.overparameterized())
    throw DomainError("companion transform at zero is only used for gamma > 1");
  const InverseMap map(h, gamma.value());
  if (map.locations().front() <= 0.0)
    throw DomainError("companion at zero requires strictly positive population eigenvalues");
  return zero_from_map(map);
}

LimitingSpectrum::LimitingSpectrum(PopulationSpectrum h, AspectRatio gamma)
    : population_(std::move(h)), gamma_(gamma) {}

double LimitingSpectrum::m0() const {
  if (!zero_) throw DomainError("m(0) is only defined for gamma > 1");
  return zero_->value;
}

double LimitingSpectrum::m0_prime() const {
  if (!zero_) throw DomainError("m'(0) is only defined for gamma > 1");
  return zero_->derivative;
}

double LimitingSpectrum::total_mass() const {
  double s = atom0_mass();
  for (std::size_t j = 0; j < size(); ++j) s += density_[j] * weights_[j];
  return s;
}

double LimitingSpectrum::first_moment() const {
  double s = 0.0;
  for (std::size_t j = 0; j < size(); ++j) s += x_[j] * density_[j] * weights_[j];
  return s;
}

std::vector<double> LimitingSpectrum::measure_weights() const {
  std::vector<double> out(size());
  for (std::size_t j = 0; j < size(); ++j) out[j] = density_[j] * weights_[j];
  return out;
}

bool LimitingSpectrum::in_support(double x, double relative_tolerance) const {
  return std::any_of(support_.begin(), support_.end(), [&](const SupportInterval& s) {
    const double tol = relative_tolerance * s.width();
    return x >= s.lower - tol && x <= s.upper + tol;
  });
}

BoundaryValue LimitingSpectrum::boundary_value(double x) const {
  check_in_support(support_, x);
  return to_boundary(map_->boundary(x));
}

std::complex<double> LimitingSpectrum::companion(std::complex<double> z) const {
  return map_->solve_upper(z);
}

std::complex<double> LimitingSpectrum::companion_slope(std::complex<double> m) const {
  return 1.0 / map_->dz(m);
}

LimitingSpectrum build_limiting_spectrum(const PopulationSpectrum& h, AspectRatio gamma, int grid_size) {
  if (grid_size < 64) throw ConfigError("grid_size must be at least 64");
  LimitingSpectrum spec(h, gamma);
  auto map = std::make_shared<const InverseMap>(h, gamma.value());
  spec.support_ = support_from_map(*map);
  if (gamma.overparameterized()) spec.zero_ = zero_from_map(*map);

  // nodes are shared out by the mean of each interval's width and mass
  // fractions; a narrow interval next to zero can hold most of the mass
  const std::size_t k = spec.support_.size();
  std::vector<double> mass(k, 0.0);
  double total_width = 0.0, total_mass = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const auto& s = spec.support_[i];
    total_width += s.width();
    constexpr int probe = 33;
    const double step = std::numbers::pi / (probe + 1);
    for (int j = 1; j <= probe; ++j) {
      const double x = 0.5 * (s.lower + s.upper) - 0.5 * s.width() * std::cos(j * step);
      mass[i] += to_boundary(map->boundary(x)).g * 0.5 * s.width() * std::sin(j * step) * step;
    }
    total_mass += mass[i];
  }

  for (std::size_t i = 0; i < k; ++i) {
    const auto& s = spec.support_[i];
    const double share = 0.5 * (s.width() / total_width + mass[i] / total_mass);
    int n = std::max(15, static_cast<int>(std::lround(grid_size * share)));
    if (n % 2 == 0) ++n;
    const double centre = 0.5 * (s.lower + s.upper), radius = 0.5 * s.width();
    const double step = std::numbers::pi / (n + 1);
    for (int j = 1; j <= n; ++j) {
      const double theta = j * step;
      spec.x_.push_back(centre - radius * std::cos(theta));
      const double w = radius * std::sin(theta) * step;
      spec.weights_.push_back(w);
      spec.coarse_weights_.push_back(j % 2 == 0 ? 2.0 * w : 0.0);
      spec.interval_.push_back(static_cast<int>(i));
    }
  }

  const std::size_t n = spec.x_.size();
  std::vector<cplx> values(n);
  parallel_for(n, [&](std::size_t j) { values[j] = map->boundary(spec.x_[j]); });

  const double g_scale = gamma.value() * std::numbers::pi;
  spec.f_.resize(n);
  spec.g_.resize(n);
  spec.density_.resize(n);
  spec.derivative_.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const BoundaryValue b = to_boundary(values[j]);
    spec.f_[j] = b.f;
    spec.g_[j] = b.g;
    spec.density_[j] = b.g / g_scale;
    spec.derivative_[j] = 1.0 / map->dz(values[j]);
  }
  spec.map_ = std::move(map);
  return spec;
}

}  // namespace shrinkage_lab
