#include "shrinkage_lab/regression.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "shrinkage_lab/errors.hpp"
#include "shrinkage_lab/functionals.hpp"
#include "shrinkage_lab/parallel.hpp"

namespace shrinkage_lab {

namespace {

void check_model(const RegressionModel& model, const LimitingSpectrum& spectrum) {
  if (!(model.alpha >= 0.0) || !std::isfinite(model.alpha))
    throw DomainError("alpha must be finite and nonnegative");
  if (model.gamma.value() != spectrum.gamma() || !(model.population == spectrum.population()))
    throw ConfigError("limiting spectrum was built for a different (gamma, H)");
}

void check_times(const std::vector<double>& times) {
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (!(times[k] >= 0.0) || !std::isfinite(times[k]))
      throw ConfigError("training times must be finite and nonnegative");
    if (k > 0 && !(times[k] > times[k - 1]))
      throw ConfigError("training times must be strictly increasing");
  }
}

// x / (x + lambda) (1 - exp(-t (x + lambda))), the fraction of the
// least-squares fit reached along eigendirection x
double fitted_fraction(double x, double lambda, double t) {
  const double s = x + lambda;
  if (s <= 0.0) return 0.0;
  return -x / s * std::expm1(-t * s);
}

}  // namespace

RiskReport predicted_test_risk(const RegressionModel& model, const LimitingSpectrum& spectrum,
                               const ShrinkageFunction& h) {
  check_model(model, spectrum);
  const double gamma = spectrum.gamma(), a2 = model.alpha * model.alpha;
  const SampledFunction v = h.sample(spectrum);
  const auto w = spectrum.weights(), cw = spectrum.coarse_weights();
  RiskReport r;
  double coarse = 0.0;
  for (std::size_t j = 0; j < spectrum.size(); ++j) {
    const double x = spectrum.x()[j], f = spectrum.f()[j], g = spectrum.g()[j];
    const double kernel = g / (gamma * std::numbers::pi * x * (f * f + g * g));
    const double resid = std::sqrt(x) * v.values[j] - 1.0;
    const double b = a2 * resid * resid * kernel * w[j];
    const double var = gamma * v.values[j] * v.values[j] * kernel * w[j];
    r.bias += b;
    r.variance += var;
    coarse += (b + var) / w[j] * cw[j];
  }
  r.error_estimate = std::abs(r.bias + r.variance - coarse);
  if (spectrum.gamma() > 1.0) {
    const double m0 = spectrum.m0();
    const double atom_bias = a2 / (gamma * m0);
    const double atom_var = v.at_zero * v.at_zero / m0;
    r.bias += atom_bias;
    r.variance += atom_var;
    r.atom = atom_bias + atom_var;
  }
  r.risk = 1.0 + r.bias + r.variance;
  r.flagged = r.error_estimate > 1e-6 * r.risk + 1e-9;
  return r;
}

ShrinkageFunction gd_shrinkage(double t, double lambda) {
  return ShrinkageFunction::gradient_flow(t, lambda);
}

double predicted_train_error(const RegressionModel& model, const LimitingSpectrum& spectrum,
                             double lambda, double t) {
  check_model(model, spectrum);
  if (!(lambda >= 0.0) || !(t >= 0.0)) throw ConfigError("lambda and t must be nonnegative");
  const double gamma = spectrum.gamma(), a2 = model.alpha * model.alpha;
  const auto mw = spectrum.measure_weights();
  // companion measure: max(1 - gamma, 0) at zero plus gamma times the bulk of F
  double e = std::max(1.0 - gamma, 0.0);
  for (std::size_t j = 0; j < spectrum.size(); ++j) {
    const double x = spectrum.x()[j];
    const double r = fitted_fraction(x, lambda, t) - 1.0;
    e += (gamma + a2 * x) * r * r * mw[j];
  }
  return e;
}

LearningCurve learning_curve(const RegressionModel& model, const LimitingSpectrum& spectrum,
                             double lambda, const std::vector<double>& times) {
  check_model(model, spectrum);
  check_times(times);
  if (!(lambda >= 0.0)) throw ConfigError("lambda must be nonnegative");
  LearningCurve c;
  c.lambda = lambda;
  c.times = times;
  c.test_risk.resize(times.size());
  c.train_error.resize(times.size());
  parallel_for(times.size(), [&](std::size_t k) {
    c.test_risk[k] = predicted_test_risk(model, spectrum, gd_shrinkage(times[k], lambda)).risk;
    c.train_error[k] = predicted_train_error(model, spectrum, lambda, times[k]);
  });
  return c;
}

LearningCurve closed_form_identity_curve(double alpha, AspectRatio gamma_ratio,
                                         const std::vector<double>& times) {
  check_times(times);
  const double gamma = gamma_ratio.value(), a2 = alpha * alpha;
  const double lo = std::pow(1.0 - std::sqrt(gamma), 2), hi = std::pow(1.0 + std::sqrt(gamma), 2);
  const double c = 0.5 * (lo + hi), r = 0.5 * (hi - lo);
  // x = c - r cos(theta): the density sqrt((hi - x)(x - lo)) / (2 pi gamma x) dx
  // becomes r^2 sin^2(theta) / (2 pi gamma x) dtheta
  constexpr int nodes = 2001;
  const double step = std::numbers::pi / (nodes + 1);
  std::vector<double> xs(nodes), ws(nodes);
  for (int j = 1; j <= nodes; ++j) {
    const double theta = j * step, s = std::sin(theta);
    xs[j - 1] = c - r * std::cos(theta);
    ws[j - 1] = r * r * s * s / (2.0 * std::numbers::pi * gamma * xs[j - 1]) * step;
  }
  const double atom = std::max(1.0 - 1.0 / gamma, 0.0);
  LearningCurve out;
  out.times = times;
  for (double t : times) {
    double v = 1.0 + a2 * atom;
    for (int j = 0; j < nodes; ++j) {
      const double x = xs[j];
      const double decay = std::exp(-t * x), grown = -std::expm1(-t * x);
      v += ws[j] * (a2 * decay * decay + gamma * grown * grown / x);
    }
    out.test_risk.push_back(v);
  }
  return out;
}

MonotonicityReport check_overregularized_monotone(const RegressionModel& model,
                                                  const LimitingSpectrum& spectrum, double lambda,
                                                  const std::vector<double>& times,
                                                  bool diagnostic) {
  if (!diagnostic && lambda < model.optimal_lambda())
    throw DomainError("monotonicity is only guaranteed for lambda >= gamma / alpha^2");
  const LearningCurve c = learning_curve(model, spectrum, lambda, times);
  MonotonicityReport rep;
  for (std::size_t k = 1; k < c.test_risk.size(); ++k)
    rep.max_violation = std::max(rep.max_violation, c.test_risk[k] - c.test_risk[k - 1]);
  rep.monotone = rep.max_violation <= 1e-8;
  return rep;
}

StoppingPoint optimal_stopping_time(const RegressionModel& model, const LimitingSpectrum& spectrum,
                                    double lambda, double t_min, double t_max) {
  if (!(t_min > 0.0) || !(t_max > t_min)) throw ConfigError("need 0 < t_min < t_max");
  auto risk = [&](double log_t) {
    return predicted_test_risk(model, spectrum, gd_shrinkage(std::exp(log_t), lambda)).risk;
  };
  // coarse scan first so a non-unimodal curve still lands in the right basin
  const int scan = 41;
  const double a0 = std::log(t_min), b0 = std::log(t_max), h = (b0 - a0) / (scan - 1);
  int best = 0;
  double best_val = risk(a0);
  for (int k = 1; k < scan; ++k) {
    const double v = risk(a0 + k * h);
    if (v < best_val) {
      best_val = v;
      best = k;
    }
  }
  double a = a0 + std::max(best - 1, 0) * h, b = a0 + std::min(best + 1, scan - 1) * h;
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
  double fc = risk(c), fd = risk(d);
  while (b - a > 1e-9) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = risk(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = risk(d);
    }
  }
  StoppingPoint out{std::exp(0.5 * (a + b)), risk(0.5 * (a + b))};
  if (best_val < out.risk) out = {std::exp(a0 + best * h), best_val};
  return out;
}

std::vector<double> log_space(double lo, double hi, int n) {
  if (!(lo > 0.0) || !(hi > lo) || n < 2) throw ConfigError("log_space needs 0 < lo < hi and n >= 2");
  std::vector<double> out(n);
  const double a = std::log(lo), b = std::log(hi);
  for (int k = 0; k < n; ++k) out[k] = std::exp(a + (b - a) * k / (n - 1));
  out.front() = lo;
  out.back() = hi;
  return out;
}

}  // namespace shrinkage_lab
