#include "shrinkage_lab/functionals.hpp"

#include <cmath>
#include <numbers>

#include "shrinkage_lab/errors.hpp"
#include "shrinkage_lab/parallel.hpp"

namespace shrinkage_lab {

namespace {

using cplx = std::complex<double>;
constexpr double kPi = std::numbers::pi;

struct Node {
  double x, f, g, d;
  cplx slope;  // f' + i g'
};

Node node_at(const LimitingSpectrum& s, std::size_t j) {
  const double f = s.f()[j], g = s.g()[j];
  return {s.x()[j], f, g, f * f + g * g, s.companion_derivative()[j]};
}

Node node_at(const LimitingSpectrum& s, double x) {
  const BoundaryValue b = s.boundary_value(x);
  const cplx m(b.f, b.g);
  return {x, b.f, b.g, b.f * b.f + b.g * b.g, s.companion_slope(m)};
}

double kernel_value(const Node& a, const Node& b, double gamma, bool diagonal) {
  const double c = gamma * kPi * kPi * a.x * b.x;
  const double first = -a.g * b.g / (c * a.d * b.d);
  double second;
  if (diagonal) {
    // limit of (f(x) D(y) - f(y) D(x)) / (y - x) is f D' - f' D
    const double fp = a.slope.real(), gp = a.slope.imag();
    const double dp = 2.0 * (a.f * fp + a.g * gp);
    second = 2.0 * (a.f * dp - fp * a.d) * a.g * a.g / (c * a.d * a.d * a.d * a.d);
  } else {
    second = 2.0 * (a.f * b.d - b.f * a.d) * a.g * b.g / (c * (b.x - a.x) * a.d * a.d * b.d * b.d);
  }
  return first + second;
}

cplx companion_anywhere(const LimitingSpectrum& s, cplx z) {
  if (z.imag() > 0.0) return s.companion(z);
  if (z.imag() < 0.0) return std::conj(s.companion(std::conj(z)));
  throw DomainError("two_resolvent_limit needs non-real arguments");
}

bool needs_flag(const FunctionalValue& v) {
  return v.error_estimate > 1e-6 * std::abs(v.value) + 1e-9;
}

}  // namespace

TraceOperator::TraceOperator(const LimitingSpectrum& s) : has_atom_(s.gamma() > 1.0) {
  const std::size_t n = s.size();
  const Eigen::Index dim = static_cast<Eigen::Index>(n) + (has_atom_ ? 1 : 0);
  const double gamma = s.gamma();
  const auto w = s.weights();
  const auto cw = s.coarse_weights();

  std::vector<Node> nodes(n);
  for (std::size_t j = 0; j < n; ++j) nodes[j] = node_at(s, j);

  m_weights_ = Eigen::VectorXd::Zero(dim);
  m_weights_coarse_ = Eigen::VectorXd::Zero(dim);
  for (std::size_t j = 0; j < n; ++j) {
    const Node& a = nodes[j];
    const double k = a.g / (gamma * kPi * a.x * a.d);
    m_weights_[j] = w[j] * k;
    m_weights_coarse_[j] = cw[j] * k;
  }

  t_matrix_ = Eigen::MatrixXd::Zero(dim, dim);
  t_matrix_coarse_ = Eigen::MatrixXd::Zero(dim, dim);
  parallel_for(n, [&](std::size_t i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double k = kernel_value(nodes[i], nodes[j], gamma, i == j);
      t_matrix_(i, j) = w[i] * w[j] * k;
      t_matrix_coarse_(i, j) = cw[i] * cw[j] * k;
    }
  });
  for (std::size_t j = 0; j < n; ++j) {
    const Node& a = nodes[j];
    const double single = a.g / (gamma * kPi * a.x * a.x * a.d * a.d);
    t_matrix_(j, j) += w[j] * single;
    t_matrix_coarse_(j, j) += cw[j] * single;
  }

  if (has_atom_) {
    const double m0 = s.m0(), m0p = s.m0_prime();
    const Eigen::Index z = dim - 1;
    m_weights_[z] = m_weights_coarse_[z] = 1.0 / (gamma * m0);
    t_matrix_(z, z) = t_matrix_coarse_(z, z) =
        (m0p / std::pow(m0, 4) - 1.0 / (m0 * m0)) / gamma;
    for (std::size_t j = 0; j < n; ++j) {
      const Node& a = nodes[j];
      // half of the cross term 2 h(0) / (gamma m0^2) \int u_h
      const double u = (a.d - 2.0 * a.f * m0 - a.x * m0 * a.d) * a.g /
                       (kPi * a.x * a.x * a.d * a.d) / (gamma * m0 * m0);
      t_matrix_(j, z) = t_matrix_(z, j) = w[j] * u;
      t_matrix_coarse_(j, z) = t_matrix_coarse_(z, j) = cw[j] * u;
    }
  }
}

Eigen::VectorXd TraceOperator::vectorize(const SampledFunction& h) const {
  const Eigen::Index n = dimension() - (has_atom_ ? 1 : 0);
  if (static_cast<Eigen::Index>(h.values.size()) != n)
    throw ConfigError("sampled function does not match the spectrum grid");
  Eigen::VectorXd v(dimension());
  for (Eigen::Index j = 0; j < n; ++j) v[j] = h.values[j];
  if (has_atom_) v[n] = h.at_zero;
  return v;
}

FunctionalValue TraceOperator::m(const SampledFunction& h) const {
  const Eigen::VectorXd v = vectorize(h);
  FunctionalValue out;
  out.value = m_weights_.dot(v);
  out.atom = has_atom_ ? m_weights_[dimension() - 1] * v[dimension() - 1] : 0.0;
  out.bulk = out.value - out.atom;
  out.error_estimate = std::abs(out.value - m_weights_coarse_.dot(v));
  out.flagged = needs_flag(out);
  return out;
}

FunctionalValue TraceOperator::t(const SampledFunction& h) const {
  const Eigen::VectorXd v = vectorize(h);
  FunctionalValue out;
  out.value = v.dot(t_matrix_ * v);
  if (has_atom_) {
    const Eigen::Index z = dimension() - 1;
    const Eigen::Index n = z;
    out.bulk = v.head(n).dot(t_matrix_.topLeftCorner(n, n) * v.head(n));
    out.atom = out.value - out.bulk;
  } else {
    out.bulk = out.value;
  }
  out.error_estimate = std::abs(out.value - v.dot(t_matrix_coarse_ * v));
  out.flagged = needs_flag(out);
  return out;
}

double TraceOperator::t_bilinear(const SampledFunction& a, const SampledFunction& b) const {
  return vectorize(a).dot(t_matrix_ * vectorize(b));
}

FunctionalValue m_functional(const LimitingSpectrum& spectrum, const ShrinkageFunction& h) {
  // M needs only the weight vector; skip the O(N^2) kernel assembly
  const double gamma = spectrum.gamma();
  const SampledFunction v = h.sample(spectrum);
  const auto w = spectrum.weights(), cw = spectrum.coarse_weights();
  FunctionalValue out;
  double coarse = 0.0;
  for (std::size_t j = 0; j < spectrum.size(); ++j) {
    const double f = spectrum.f()[j], g = spectrum.g()[j], x = spectrum.x()[j];
    const double k = v.values[j] * g / (gamma * kPi * x * (f * f + g * g));
    out.bulk += w[j] * k;
    coarse += cw[j] * k;
  }
  if (gamma > 1.0) out.atom = v.at_zero / (gamma * spectrum.m0());
  out.value = out.bulk + out.atom;
  out.error_estimate = std::abs(out.bulk - coarse);
  out.flagged = needs_flag(out);
  return out;
}

FunctionalValue t_functional(const LimitingSpectrum& spectrum, const ShrinkageFunction& h) {
  return TraceOperator(spectrum).t(h.sample(spectrum));
}

double t_bilinear(const LimitingSpectrum& spectrum, const ShrinkageFunction& h1,
                  const ShrinkageFunction& h2) {
  const TraceOperator op(spectrum);
  const SampledFunction a = h1.sample(spectrum), b = h2.sample(spectrum);
  return 0.25 * (op.t(a + b).value - op.t(a - b).value);
}

std::complex<double> two_resolvent_limit(const LimitingSpectrum& spectrum, std::complex<double> z1,
                                         std::complex<double> z2) {
  const double gamma = spectrum.gamma();
  const cplx m1 = companion_anywhere(spectrum, z1);
  const cplx m2 = companion_anywhere(spectrum, z2);
  cplx slope;
  if (std::abs(z1 - z2) < 1e-8) {
    slope = spectrum.companion_slope(m1);
  } else {
    slope = (m2 - m1) / (z2 - z1);
  }
  const cplx zz = z1 * z2, mm = m1 * m2;
  return -1.0 / (gamma * zz * mm) + slope / (gamma * zz * mm * mm);
}

double kernel_K(const LimitingSpectrum& spectrum, double x, double y) {
  const Node a = node_at(spectrum, x);
  const double scale = spectrum.support().back().upper;
  if (std::abs(y - x) <= 1e-9 * scale) return kernel_value(a, a, spectrum.gamma(), true);
  const Node b = node_at(spectrum, y);
  // (x, y) and (y, x) must agree bit for bit
  return x < y ? kernel_value(a, b, spectrum.gamma(), false)
               : kernel_value(b, a, spectrum.gamma(), false);
}

ShrinkageFunction lp_covariance_shrinker(const LimitingSpectrum& spectrum) {
  std::vector<double> values(spectrum.size());
  for (std::size_t j = 0; j < spectrum.size(); ++j) {
    const double f = spectrum.f()[j], g = spectrum.g()[j];
    values[j] = 1.0 / (spectrum.x()[j] * (f * f + g * g));
  }
  const double at_zero =
      spectrum.gamma() > 1.0 ? 1.0 / ((spectrum.gamma() - 1.0) * spectrum.m0()) : values.front();
  return ShrinkageFunction::on_grid(spectrum, std::move(values), at_zero, "lp_covariance");
}

ShrinkageFunction lp_precision_shrinker(const LimitingSpectrum& spectrum) {
  if (spectrum.gamma() > 1.0)
    throw DomainError("lp_precision_shrinker needs gamma < 1 (the spectrum has an atom at zero)");
  const auto& support = spectrum.support();
  if (support.front().lower <= 1e-8 * support.back().upper)
    throw DomainError("lp_precision_shrinker needs a support bounded away from zero");
  const double gamma = spectrum.gamma();
  std::vector<double> values(spectrum.size());
  for (std::size_t j = 0; j < spectrum.size(); ++j) {
    const double x = spectrum.x()[j];
    values[j] = (gamma - 1.0 - 2.0 * x * spectrum.f()[j]) / x;
  }
  const double at_zero = values.front();
  return ShrinkageFunction::on_grid(spectrum, std::move(values), at_zero, "lp_precision");
}

}  // namespace shrinkage_lab
