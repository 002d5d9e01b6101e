#pragma once

#include <optional>
#include <string>
#include <vector>

#include "shrinkage_lab/functionals.hpp"
#include "shrinkage_lab/population_spectrum.hpp"
#include "shrinkage_lab/shrinkage_function.hpp"
#include "shrinkage_lab/spectrum.hpp"

namespace shrinkage_lab {

/// Two Gaussian classes x = Sigma^{1/2} z + y delta, y = +-1, with
/// Var(delta_i) = alpha^2 / p. H must be bounded away from zero.
struct LdaModel {
  double alpha;
  AspectRatio gamma;
  PopulationSpectrum population;

  /// Signal-to-noise ratio alpha^2 / gamma.
  double snr() const { return alpha * alpha / gamma.value(); }
};

/// Asymptotic misclassification of the rule sign(delta_hat' h(Sigma_hat) x).
struct LdaErrorReport {
  double theta = 0.0;
  double error = 0.5;
  /// alpha^4 (\int h dF)^2
  double numerator = 0.0;
  /// alpha^2 M(h^2)
  double denom_m = 0.0;
  /// gamma T(h)
  double denom_t = 0.0;
  /// \int h dF vanished; error is reported as 1/2.
  bool degenerate = false;
};

/// Standard normal distribution function.
double normal_cdf(double x);

/// Evaluates Theta and the quadratic forms of the optimization program on
/// one spectrum, reusing the assembled trace operator.
class LdaCalculator {
 public:
  explicit LdaCalculator(const LimitingSpectrum& spectrum);

  const LimitingSpectrum& spectrum() const noexcept { return *spectrum_; }
  const TraceOperator& trace() const noexcept { return trace_; }

  /// Throws DomainError if h < 0 somewhere on the grid (or at zero for gamma > 1).
  LdaErrorReport theta(double alpha, const SampledFunction& h) const;
  LdaErrorReport theta(double alpha, const ShrinkageFunction& h) const;

  /// \int h dF including the atom at zero.
  double integral(const SampledFunction& h) const;

 private:
  const LimitingSpectrum* spectrum_;
  TraceOperator trace_;
  std::vector<double> measure_;
};

/// Throws ConfigError when the spectrum does not match the model.
LdaErrorReport lda_theta(const LdaModel& model, const LimitingSpectrum& spectrum,
                         const ShrinkageFunction& h);

struct RelaxationFit {
  /// Coefficients of h = A x (f^2 + g^2) - B with A = 1.
  double a = 1.0;
  double b = 0.0;
  /// L2(F) distance from the numerically solved relaxed program to the
  /// closest function affine in x (f^2 + g^2).
  double residual = 0.0;
};

struct QpSolution {
  /// Normalized so that \int h dF = 1.
  ShrinkageFunction h_opt;
  double objective = 0.0;
  double kkt_residual = 0.0;
  bool bound_active = false;
  /// The T matrix needed eigenvalue flooring.
  bool regularized = false;
  std::optional<RelaxationFit> relaxation_fit;
};

/// Minimizes s M(h^2) + T(h) over h >= 0 with \int h dF = 1, h piecewise
/// constant on grid_size cells of consecutive spectrum nodes (each node its
/// own cell when grid_size >= number of nodes). Throws ConfigError when
/// grid_size < 32.
QpSolution optimal_shrinkage_qp(const LdaModel& model, const LimitingSpectrum& spectrum,
                                int grid_size = 1024);
QpSolution optimal_shrinkage_qp(const LdaModel& model, const LdaCalculator& calc,
                                int grid_size = 1024);

/// Optimum of the relaxation M(h^2) + (gamma / alpha^2) M(h)^2, with
/// \int h dF = 1, over functions affine in x (f^2 + g^2); the fit residual
/// compares it with the node-level numerical solution. gamma < 1 only.
QpSolution relaxed_optimum(const LdaModel& model, const LimitingSpectrum& spectrum);

/// Shrinker r(x) = s / (s + 1 / (x (f^2 + g^2))) of the class-mean
/// difference, s = alpha^2 / gamma.
ShrinkageFunction mean_shrinker(const LdaModel& model, const LimitingSpectrum& spectrum);

/// Asymptotic |r(Sigma_hat) delta_hat - delta|^2 = gamma M(r^2) + alpha^2 \int (r - 1)^2 dF.
double mean_shrinker_loss(const LdaModel& model, const LimitingSpectrum& spectrum,
                          const ShrinkageFunction& r);

struct AlphaEstimate {
  double value = 0.0;
  /// The raw estimate was negative and has been set to zero.
  bool clamped = false;
  double raw = 0.0;
};

/// alpha^2 estimate |delta_hat|^2 - tr(Sigma_hat) / n.
AlphaEstimate estimate_alpha2(double delta_hat_norm2, double trace_sample_cov, double n);

struct RidgeChoice {
  double lambda;
  LdaErrorReport report;
};

/// Precision estimate obtained by inverting the Frobenius-optimal covariance
/// shrinker: x (f^2 + g^2) on the grid. This is the covariance-based
/// competitor in LDA comparisons. Throws DomainError for gamma > 1.
ShrinkageFunction lp_covariance_precision(const LimitingSpectrum& spectrum);

/// Best ridge-inverse shrinker 1 / (x + lambda) over lambda in
/// [lambda_min, lambda_max], by log-grid scan and golden-section refinement.
RidgeChoice best_ridge_inverse(const LdaCalculator& calc, double alpha, double lambda_min = 1e-4,
                               double lambda_max = 1e4);

/// One row of the shrinker comparison table.
struct ComparisonRow {
  double alpha;
  double error_optimal;
  double error_lp_cov;
  double error_lp_prec;
  double error_ridge_best;
  double lambda_ridge_best;
  double error_identity;
};

/// Asymptotic errors of the QP optimum, the two Frobenius-optimal shrinkers
/// (as precision estimates), the best ridge inverse and the plain inverse
/// 1 / x, for each alpha.
std::vector<ComparisonRow> compare_shrinkers(const LimitingSpectrum& spectrum,
                                             const std::vector<double>& alphas,
                                             int grid_size = 1024);

}  // namespace shrinkage_lab
