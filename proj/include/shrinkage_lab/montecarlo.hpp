#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "shrinkage_lab/linalg.hpp"
#include "shrinkage_lab/population_spectrum.hpp"
#include "shrinkage_lab/shrinkage_function.hpp"

namespace shrinkage_lab {

/// Sigma_ij = rho^|i - j|.
struct ToeplitzAr {
  double rho;
};

/// Diagonal covariance built from atoms of H, or an AR(1) Toeplitz matrix.
using SigmaSpec = std::variant<PopulationSpectrum, ToeplitzAr>;

enum class NoiseDistribution { gaussian, rademacher };

/// A finite-dimensional population covariance.
class CovarianceModel {
 public:
  /// floor(w_i p) copies of each location t_i; the remainder goes to the
  /// atom of largest weight.
  static CovarianceModel diagonal_from_atoms(const PopulationSpectrum& h, int p);
  static CovarianceModel toeplitz_ar(double rho, int p);
  static CovarianceModel from_spec(const SigmaSpec& spec, int p);

  int dimension() const noexcept { return p_; }
  bool is_diagonal() const noexcept { return diagonal_; }
  /// Ascending eigenvalues.
  const Eigen::VectorXd& eigenvalues() const noexcept { return eigenvalues_; }
  /// Equally weighted atoms at the eigenvalues.
  PopulationSpectrum population() const;

  Eigen::MatrixXd dense() const;
  /// Sigma^{1/2} z, column by column.
  Eigen::MatrixXd sqrt_times(const Eigen::MatrixXd& z) const;
  Eigen::MatrixXd times(const Eigen::MatrixXd& v) const;
  /// v' Sigma v
  double quadratic(const Eigen::VectorXd& v) const;
  double trace() const;
  /// tr(Sigma^2)
  double trace_squared() const;

 private:
  int p_ = 0;
  bool diagonal_ = true;
  Eigen::VectorXd diag_;
  Eigen::MatrixXd dense_, sqrt_;
  Eigen::VectorXd eigenvalues_;
};

/// Finite-sample experiment. Replicate r draws from a generator seeded by
/// a mix of seed ^ r, so replicates are independent of scheduling.
struct ExperimentConfig {
  int p = 0;
  int n = 0;
  double alpha = 0.0;
  SigmaSpec sigma = PopulationSpectrum::point_mass(1.0);
  NoiseDistribution z_dist = NoiseDistribution::gaussian;
  std::uint64_t seed = 0;
  int replicates = 1;

  /// Throws ConfigError: p, n >= 2, replicates >= 1, alpha >= 0, rho in (0, 1).
  void validate() const;
  double gamma() const { return static_cast<double>(p) / n; }
};

/// Generator for replicate r of a run seeded with seed.
std::mt19937_64 replicate_engine(std::uint64_t seed, int replicate);

/// p x n matrix of i.i.d. standard noise entries.
Eigen::MatrixXd noise_matrix(std::mt19937_64& rng, int p, int n, NoiseDistribution dist);

struct RegressionDraw {
  /// p x n design, columns x_i = Sigma^{1/2} z_i.
  Eigen::MatrixXd x;
  Eigen::VectorXd w;
  Eigen::VectorXd eps;
  Eigen::VectorXd y;
  /// Singular system of X / sqrt(n).
  SampleSpectrum spectrum;
  /// U' X y / n
  Eigen::VectorXd projected_response;
};

RegressionDraw generate_regression_draw(const ExperimentConfig& config,
                                        const CovarianceModel& sigma, int replicate = 0);

struct RegressionOutcome {
  /// 1 + (w_hat - w)' Sigma (w_hat - w)
  double test_risk;
  /// |y - X' w_hat|^2 / n
  double train_error;
};

/// w_hat = sum_i h(lambda_i) u_i v_i' y / sqrt(n).
RegressionOutcome empirical_regression_risk(const RegressionDraw& draw, const ShrinkageFunction& h,
                                            const CovarianceModel& sigma);
/// w_hat for the shrinker h.
Eigen::VectorXd regression_estimate(const RegressionDraw& draw, const ShrinkageFunction& h);

/// Two-class draw: the first n/2 columns have label +1. The within-class
/// covariance does not depend on delta, so with_alpha() re-scales the mean
/// difference while keeping the noise.
struct LdaDraw {
  int n = 0;
  double alpha = 0.0;
  /// delta / alpha, i.i.d. N(0, 1/p) entries.
  Eigen::VectorXd direction;
  /// delta_hat - delta
  Eigen::VectorXd noise_mean;
  Eigen::VectorXd delta;
  Eigen::VectorXd delta_hat;
  /// Eigen-pairs of Sigma_hat = (1/n) sum (x_i - y_i delta_hat)(x_i - y_i delta_hat)'.
  std::shared_ptr<const SampleSpectrum> spectrum;
  double trace_sample_cov = 0.0;

  LdaDraw with_alpha(double alpha) const;
};

/// Throws ConfigError for odd n or non-Gaussian noise.
LdaDraw generate_lda_draw(const ExperimentConfig& config, const CovarianceModel& sigma,
                          int replicate = 0);

struct LdaOutcome {
  double error;
  bool degenerate;
};

/// Phi(-delta_hat' A delta / |Sigma^{1/2} A delta_hat|) with A = h(Sigma_hat).
LdaOutcome empirical_lda_error(const LdaDraw& draw, const ShrinkageFunction& h,
                               const CovarianceModel& sigma);

/// |r(Sigma_hat) delta_hat - delta|^2
double empirical_mean_loss(const LdaDraw& draw, const ShrinkageFunction& r);

/// p^{-1} |Sigma - h(S_n)|_F^2
double empirical_frobenius_loss(const SampleSpectrum& spectrum, const ShrinkageFunction& h,
                                const CovarianceModel& sigma);

/// h(S) v, with h(0) on the null space of S.
Eigen::VectorXd apply_spectral(const SampleSpectrum& spectrum, const ShrinkageFunction& h,
                               const Eigen::VectorXd& v);

/// Finite-p traces p^{-1} tr(Sigma h(S)), p^{-1} tr(Sigma h(S) Sigma h(S)) and
/// the two-resolvent trace, from one eigen-decomposition.
class TraceSample {
 public:
  TraceSample(const SampleSpectrum& spectrum, const CovarianceModel& sigma);

  double m(const ShrinkageFunction& h) const;
  double t(const ShrinkageFunction& h) const;
  std::complex<double> two_resolvent(std::complex<double> z1, std::complex<double> z2) const;

 private:
  using cvec = Eigen::VectorXcd;
  std::complex<double> m_of(const cvec& h, std::complex<double> h0) const;
  std::complex<double> t_of(const cvec& h1, std::complex<double> h01, const cvec& h2,
                            std::complex<double> h02) const;

  int p_;
  bool has_null_;
  Eigen::VectorXd lambda_;
  Eigen::VectorXd c_diag_;   // (U' Sigma U)_ii
  Eigen::VectorXd e_diag_;   // (U' Sigma^2 U)_ii
  Eigen::MatrixXd c_sq_;     // (U' Sigma U)_ij^2
  double trace_, trace_sq_;
};

/// Mean and standard error of the mean.
struct Summary {
  double mean = 0.0;
  double se = 0.0;
  int count = 0;
};

Summary summarize(std::span<const double> values);

}  // namespace shrinkage_lab
