#include "shrinkage_lab/shrinkage_function.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "shrinkage_lab/errors.hpp"
#include "shrinkage_lab/spectrum.hpp"

namespace shrinkage_lab {

SampledFunction& SampledFunction::operator+=(const SampledFunction& o) {
  if (o.values.size() != values.size()) throw ConfigError("sampled functions differ in length");
  for (std::size_t i = 0; i < values.size(); ++i) values[i] += o.values[i];
  at_zero += o.at_zero;
  return *this;
}

SampledFunction& SampledFunction::operator-=(const SampledFunction& o) {
  if (o.values.size() != values.size()) throw ConfigError("sampled functions differ in length");
  for (std::size_t i = 0; i < values.size(); ++i) values[i] -= o.values[i];
  at_zero -= o.at_zero;
  return *this;
}

SampledFunction& SampledFunction::operator*=(double c) {
  for (double& v : values) v *= c;
  at_zero *= c;
  return *this;
}

SampledFunction operator+(SampledFunction a, const SampledFunction& b) { return a += b; }
SampledFunction operator-(SampledFunction a, const SampledFunction& b) { return a -= b; }
SampledFunction operator*(double c, SampledFunction a) { return a *= c; }

ShrinkageFunction::ShrinkageFunction(Family family, std::string name, std::vector<double> params)
    : family_(family), name_(std::move(name)), params_(std::move(params)) {}

namespace {
void require_nonnegative(double v, const char* what) {
  if (!std::isfinite(v) || v < 0.0)
    throw ConfigError(std::string(what) + " must be finite and nonnegative");
}
}  // namespace

ShrinkageFunction ShrinkageFunction::ridge(double lambda) {
  require_nonnegative(lambda, "ridge lambda");
  return {Family::ridge, "ridge", {lambda}};
}

ShrinkageFunction ShrinkageFunction::ridge_inverse(double lambda) {
  require_nonnegative(lambda, "ridge_inverse lambda");
  return {Family::ridge_inverse, "ridge_inverse", {lambda}};
}

ShrinkageFunction ShrinkageFunction::gradient_flow(double t, double lambda) {
  require_nonnegative(t, "gradient_flow time");
  require_nonnegative(lambda, "gradient_flow lambda");
  return {Family::gradient_flow, "gradient_flow", {t, lambda}};
}

ShrinkageFunction ShrinkageFunction::pseudo_inverse() {
  return {Family::pseudo_inverse, "pseudo_inverse", {}};
}

ShrinkageFunction ShrinkageFunction::identity() { return {Family::identity, "identity", {}}; }

ShrinkageFunction ShrinkageFunction::constant(double c) {
  if (!std::isfinite(c)) throw ConfigError("constant must be finite");
  return {Family::constant, "constant", {c}};
}

ShrinkageFunction ShrinkageFunction::exponential(double rate) {
  require_nonnegative(rate, "exponential rate");
  return {Family::exponential, "exponential", {rate}};
}

ShrinkageFunction ShrinkageFunction::polynomial(std::vector<double> coefficients) {
  if (coefficients.empty()) throw ConfigError("polynomial needs at least one coefficient");
  return {Family::polynomial, "polynomial", std::move(coefficients)};
}

ShrinkageFunction ShrinkageFunction::grid(std::vector<double> abscissae, std::vector<int> interval,
                                          std::vector<double> values, double at_zero,
                                          std::string label) {
  if (abscissae.empty() || abscissae.size() != values.size() || interval.size() != values.size())
    throw ConfigError("grid shrinkage function needs matching, non-empty abscissae and values");
  for (std::size_t i = 1; i < abscissae.size(); ++i)
    if (!(abscissae[i] > abscissae[i - 1]))
      throw ConfigError("grid abscissae must be strictly increasing");
  for (double v : values)
    if (!std::isfinite(v)) throw EvaluationError("grid shrinkage function has a non-finite value");
  if (!std::isfinite(at_zero)) throw EvaluationError("grid value at zero is not finite");
  ShrinkageFunction h(Family::grid, std::move(label), {at_zero});
  h.abscissae_ = std::move(abscissae);
  h.interval_ = std::move(interval);
  h.values_ = std::move(values);
  return h;
}

ShrinkageFunction ShrinkageFunction::on_grid(const LimitingSpectrum& spectrum, std::vector<double> values,
                                             double at_zero, std::string label) {
  return grid({spectrum.x().begin(), spectrum.x().end()},
              {spectrum.interval_index().begin(), spectrum.interval_index().end()}, std::move(values),
              at_zero, std::move(label));
}

double ShrinkageFunction::operator()(double x) const {
  const auto& p = params_;
  double v = 0.0;
  switch (family_) {
    case Family::ridge:
      v = x <= 0.0 ? 0.0 : std::sqrt(x) / (x + p[0]);
      break;
    case Family::ridge_inverse:
      v = 1.0 / (x + p[0]);
      break;
    case Family::gradient_flow: {
      const double s = x + p[1];
      // (1 - e^{-t s}) / s -> t as s -> 0
      const double ratio = s > 0.0 ? -std::expm1(-p[0] * s) / s : p[0];
      v = std::sqrt(std::max(x, 0.0)) * ratio;
      break;
    }
    case Family::pseudo_inverse:
      v = x <= 0.0 ? 0.0 : 1.0 / std::sqrt(x);
      break;
    case Family::identity:
      v = x;
      break;
    case Family::constant:
      v = p[0];
      break;
    case Family::exponential:
      v = std::exp(-p[0] * x);
      break;
    case Family::polynomial:
      for (auto it = p.rbegin(); it != p.rend(); ++it) v = v * x + *it;
      break;
    case Family::grid: {
      if (x <= 0.0) {
        v = p[0];
        break;
      }
      const auto& xs = abscissae_;
      auto it = std::lower_bound(xs.begin(), xs.end(), x);
      if (it == xs.begin()) {
        v = values_.front();
      } else if (it == xs.end()) {
        v = values_.back();
      } else {
        const std::size_t hi = static_cast<std::size_t>(it - xs.begin()), lo = hi - 1;
        if (interval_[lo] == interval_[hi]) {
          const double u = (x - xs[lo]) / (xs[hi] - xs[lo]);
          v = (1.0 - u) * values_[lo] + u * values_[hi];
        } else {
          v = (x - xs[lo] <= xs[hi] - x) ? values_[lo] : values_[hi];
        }
      }
      break;
    }
  }
  return scale_ * v;
}

SampledFunction ShrinkageFunction::sample(const LimitingSpectrum& spectrum) const {
  SampledFunction out;
  const auto xs = spectrum.x();
  if (family_ == Family::grid && abscissae_.size() == xs.size() &&
      std::equal(xs.begin(), xs.end(), abscissae_.begin())) {
    out.values = values_;
    for (double& v : out.values) v *= scale_;
  } else {
    out.values.resize(xs.size());
    for (std::size_t j = 0; j < xs.size(); ++j) out.values[j] = (*this)(xs[j]);
  }
  // h(0) only enters through the atom at zero
  out.at_zero = spectrum.gamma() > 1.0 ? at_zero() : 0.0;
  for (double v : out.values)
    if (!std::isfinite(v)) throw EvaluationError("shrinkage function '" + name_ + "' is not finite on the grid");
  if (!std::isfinite(out.at_zero))
    throw EvaluationError("shrinkage function '" + name_ + "' is not finite at zero");
  return out;
}

ShrinkageFunction ShrinkageFunction::scaled(double c) const {
  ShrinkageFunction h = *this;
  h.scale_ *= c;
  return h;
}

}  // namespace shrinkage_lab
