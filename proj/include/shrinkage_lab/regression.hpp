#pragma once

#include <vector>

#include "shrinkage_lab/population_spectrum.hpp"
#include "shrinkage_lab/shrinkage_function.hpp"
#include "shrinkage_lab/spectrum.hpp"

namespace shrinkage_lab {

/// Linear model y = w'x + eps with Var(w_i) = alpha^2 / p, x = Sigma^{1/2} z,
/// unit noise variance, p / n -> gamma and spectrum of Sigma -> H.
struct RegressionModel {
  double alpha;
  AspectRatio gamma;
  PopulationSpectrum population;

  /// gamma / alpha^2, the risk-optimal ridge parameter.
  double optimal_lambda() const { return gamma.value() / (alpha * alpha); }
};

/// Asymptotic out-of-sample risk 1 + bias + variance.
struct RiskReport {
  double risk = 0.0;
  /// alpha^2 M((sqrt(x) h - 1)^2), atom at zero included
  double bias = 0.0;
  /// gamma M(h^2), atom at zero included
  double variance = 0.0;
  /// (alpha^2 + gamma h(0)^2) / (gamma m(0)) for gamma > 1; part of bias + variance
  double atom = 0.0;
  double error_estimate = 0.0;
  bool flagged = false;
};

/// Throws ConfigError when the spectrum was built for another (gamma, H)
/// and DomainError when alpha is negative.
RiskReport predicted_test_risk(const RegressionModel& model, const LimitingSpectrum& spectrum,
                               const ShrinkageFunction& h);

/// Shrinkage applied by gradient flow on the ridge objective after time t:
/// (1 - exp(-t (x + lambda))) sqrt(x) / (x + lambda), zero at x = 0.
ShrinkageFunction gd_shrinkage(double t, double lambda);

/// Asymptotic training error n^{-1} |y - X'w(t)|^2 of gradient flow.
double predicted_train_error(const RegressionModel& model, const LimitingSpectrum& spectrum,
                             double lambda, double t);

struct LearningCurve {
  double lambda = 0.0;
  std::vector<double> times;
  std::vector<double> test_risk;
  std::vector<double> train_error;
};

/// Throws ConfigError unless times are nonnegative and strictly increasing.
LearningCurve learning_curve(const RegressionModel& model, const LimitingSpectrum& spectrum,
                             double lambda, const std::vector<double>& times);

/// Learning curve of unregularized gradient flow for Sigma = I from the
/// closed-form Marchenko-Pastur density. train_error is left empty.
LearningCurve closed_form_identity_curve(double alpha, AspectRatio gamma,
                                         const std::vector<double>& times);

struct MonotonicityReport {
  bool monotone = true;
  /// Largest increase test_risk[k+1] - test_risk[k], zero if none.
  double max_violation = 0.0;
};

/// Checks that the ridge learning curve never increases (within 1e-8).
/// Throws DomainError when lambda < gamma / alpha^2 unless diagnostic is set.
MonotonicityReport check_overregularized_monotone(const RegressionModel& model,
                                                  const LimitingSpectrum& spectrum, double lambda,
                                                  const std::vector<double>& times,
                                                  bool diagnostic = false);

struct StoppingPoint {
  double time;
  double risk;
};

/// Minimizes the gradient-flow risk over t in [t_min, t_max] by
/// golden-section search in log t.
StoppingPoint optimal_stopping_time(const RegressionModel& model, const LimitingSpectrum& spectrum,
                                    double lambda, double t_min = 1e-2, double t_max = 1e3);

/// n points log-spaced on [lo, hi].
std::vector<double> log_space(double lo, double hi, int n);

}  // namespace shrinkage_lab
