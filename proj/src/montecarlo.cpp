#include "shrinkage_lab/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "shrinkage_lab/errors.hpp"
#include "shrinkage_lab/lda.hpp"

namespace shrinkage_lab {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Eigen::VectorXd gaussian_vector(std::mt19937_64& rng, int size) {
  std::normal_distribution<double> normal;
  Eigen::VectorXd v(size);
  for (int i = 0; i < size; ++i) v[i] = normal(rng);
  return v;
}

Eigen::VectorXd evaluate(const ShrinkageFunction& h, const Eigen::VectorXd& lambda) {
  Eigen::VectorXd out(lambda.size());
  for (Eigen::Index i = 0; i < lambda.size(); ++i) out[i] = h(lambda[i]);
  if (!out.allFinite()) throw EvaluationError("shrinkage function '" + h.name() + "' is not finite at a sample eigenvalue");
  return out;
}

bool has_null_space(const SampleSpectrum& s) { return s.rank() < s.p; }

}  // namespace

CovarianceModel CovarianceModel::diagonal_from_atoms(const PopulationSpectrum& h, int p) {
  if (p < 2) throw ConfigError("dimension must be at least 2");
  const auto& atoms = h.atoms();
  std::vector<long> counts(atoms.size());
  long used = 0;
  std::size_t largest = 0;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    counts[i] = static_cast<long>(std::floor(atoms[i].weight * p + 1e-9));
    used += counts[i];
    if (atoms[i].weight > atoms[largest].weight) largest = i;
  }
  counts[largest] += p - used;
  CovarianceModel m;
  m.p_ = p;
  m.diagonal_ = true;
  m.diag_.resize(p);
  Eigen::Index k = 0;
  for (std::size_t i = 0; i < atoms.size(); ++i)
    for (long c = 0; c < counts[i]; ++c) m.diag_[k++] = atoms[i].location;
  m.eigenvalues_ = m.diag_;
  std::sort(m.eigenvalues_.data(), m.eigenvalues_.data() + p);
  return m;
}

CovarianceModel CovarianceModel::toeplitz_ar(double rho, int p) {
  if (!(rho > 0.0 && rho < 1.0)) throw ConfigError("toeplitz rho must lie in (0, 1)");
  if (p < 2) throw ConfigError("dimension must be at least 2");
  CovarianceModel m;
  m.p_ = p;
  m.diagonal_ = false;
  m.dense_.resize(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) m.dense_(i, j) = std::pow(rho, std::abs(i - j));
  const EigenSystem es = symmetric_eigen(m.dense_, true);
  m.eigenvalues_ = es.values;
  m.sqrt_ = es.vectors * es.values.cwiseMax(0.0).cwiseSqrt().asDiagonal() * es.vectors.transpose();
  return m;
}

CovarianceModel CovarianceModel::from_spec(const SigmaSpec& spec, int p) {
  if (const auto* h = std::get_if<PopulationSpectrum>(&spec)) return diagonal_from_atoms(*h, p);
  return toeplitz_ar(std::get<ToeplitzAr>(spec).rho, p);
}

PopulationSpectrum CovarianceModel::population() const {
  return PopulationSpectrum::from_eigenvalues({eigenvalues_.data(), static_cast<std::size_t>(p_)});
}

Eigen::MatrixXd CovarianceModel::dense() const {
  if (diagonal_) return diag_.asDiagonal();
  return dense_;
}

Eigen::MatrixXd CovarianceModel::sqrt_times(const Eigen::MatrixXd& z) const {
  if (diagonal_) return diag_.cwiseSqrt().asDiagonal() * z;
  return sqrt_ * z;
}

Eigen::MatrixXd CovarianceModel::times(const Eigen::MatrixXd& v) const {
  if (diagonal_) return diag_.asDiagonal() * v;
  return dense_ * v;
}

double CovarianceModel::quadratic(const Eigen::VectorXd& v) const {
  if (diagonal_) return (v.array().square() * diag_.array()).sum();
  return v.dot(dense_ * v);
}

double CovarianceModel::trace() const { return eigenvalues_.sum(); }

double CovarianceModel::trace_squared() const { return eigenvalues_.squaredNorm(); }

void ExperimentConfig::validate() const {
  if (p < 2 || n < 2) throw ConfigError("p and n must be at least 2");
  if (replicates < 1) throw ConfigError("replicates must be at least 1");
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ConfigError("alpha must be finite and nonnegative");
  if (const auto* t = std::get_if<ToeplitzAr>(&sigma))
    if (!(t->rho > 0.0 && t->rho < 1.0)) throw ConfigError("toeplitz rho must lie in (0, 1)");
}

std::mt19937_64 replicate_engine(std::uint64_t seed, int replicate) {
  return std::mt19937_64(splitmix64(seed ^ static_cast<std::uint64_t>(replicate)));
}

Eigen::MatrixXd noise_matrix(std::mt19937_64& rng, int p, int n, NoiseDistribution dist) {
  Eigen::MatrixXd z(p, n);
  double* d = z.data();
  const Eigen::Index size = z.size();
  if (dist == NoiseDistribution::gaussian) {
    std::normal_distribution<double> normal;
    for (Eigen::Index i = 0; i < size; ++i) d[i] = normal(rng);
  } else {
    for (Eigen::Index i = 0; i < size; ++i) d[i] = (rng() >> 63) ? 1.0 : -1.0;
  }
  return z;
}

RegressionDraw generate_regression_draw(const ExperimentConfig& config,
                                        const CovarianceModel& sigma, int replicate) {
  config.validate();
  if (sigma.dimension() != config.p) throw ConfigError("covariance dimension does not match p");
  auto rng = replicate_engine(config.seed, replicate);
  RegressionDraw d;
  d.x = sigma.sqrt_times(noise_matrix(rng, config.p, config.n, config.z_dist));
  d.w = gaussian_vector(rng, config.p) * (config.alpha / std::sqrt(double(config.p)));
  d.eps = gaussian_vector(rng, config.n);
  d.y = d.x.transpose() * d.w + d.eps;
  d.spectrum = sample_covariance_spectrum(d.x, true);
  d.projected_response = d.spectrum.vectors.transpose() * (d.x * d.y) / double(config.n);
  return d;
}

Eigen::VectorXd regression_estimate(const RegressionDraw& draw, const ShrinkageFunction& h) {
  // v_i' y / sqrt(n) = b_i / sqrt(lambda_i)
  const Eigen::VectorXd hv = evaluate(h, draw.spectrum.values);
  const Eigen::VectorXd coef =
      hv.cwiseProduct(draw.projected_response).cwiseQuotient(draw.spectrum.values.cwiseSqrt());
  return draw.spectrum.vectors * coef;
}

RegressionOutcome empirical_regression_risk(const RegressionDraw& draw, const ShrinkageFunction& h,
                                            const CovarianceModel& sigma) {
  const Eigen::VectorXd hv = evaluate(h, draw.spectrum.values);
  const Eigen::VectorXd& b = draw.projected_response;
  const Eigen::VectorXd& lambda = draw.spectrum.values;
  const Eigen::VectorXd coef = hv.cwiseProduct(b).cwiseQuotient(lambda.cwiseSqrt());
  const Eigen::VectorXd w_hat = draw.spectrum.vectors * coef;
  RegressionOutcome out;
  out.test_risk = 1.0 + sigma.quadratic(w_hat - draw.w);
  const double n = static_cast<double>(draw.y.size());
  out.train_error = draw.y.squaredNorm() / n - 2.0 * coef.dot(b) +
                    (lambda.array() * coef.array().square()).sum();
  return out;
}

LdaDraw LdaDraw::with_alpha(double a) const {
  LdaDraw d = *this;
  d.alpha = a;
  d.delta = a * direction;
  d.delta_hat = d.delta + noise_mean;
  return d;
}

LdaDraw generate_lda_draw(const ExperimentConfig& config, const CovarianceModel& sigma,
                          int replicate) {
  config.validate();
  if (config.n % 2 != 0) throw ConfigError("LDA needs an even sample count");
  if (config.z_dist != NoiseDistribution::gaussian) throw ConfigError("LDA draws need Gaussian noise");
  if (sigma.dimension() != config.p) throw ConfigError("covariance dimension does not match p");
  auto rng = replicate_engine(config.seed, replicate);
  const int p = config.p, n = config.n;
  Eigen::MatrixXd x = sigma.sqrt_times(noise_matrix(rng, p, n, config.z_dist));
  LdaDraw d;
  d.n = n;
  d.alpha = config.alpha;
  d.direction = gaussian_vector(rng, p) / std::sqrt(double(p));
  d.delta = config.alpha * d.direction;
  Eigen::VectorXd labels(n);
  labels.head(n / 2).setOnes();
  labels.tail(n - n / 2).setConstant(-1.0);
  x += d.delta * labels.transpose();
  d.delta_hat = x * labels / double(n);
  d.noise_mean = d.delta_hat - d.delta;
  x -= d.delta_hat * labels.transpose();
  d.trace_sample_cov = x.squaredNorm() / n;
  d.spectrum = std::make_shared<const SampleSpectrum>(sample_covariance_spectrum(x, true));
  return d;
}

Eigen::VectorXd apply_spectral(const SampleSpectrum& s, const ShrinkageFunction& h,
                               const Eigen::VectorXd& v) {
  const Eigen::VectorXd coords = s.vectors.transpose() * v;
  const Eigen::VectorXd hv = evaluate(h, s.values);
  Eigen::VectorXd out = s.vectors * hv.cwiseProduct(coords);
  if (has_null_space(s)) {
    const double h0 = h(0.0);
    if (!std::isfinite(h0)) throw EvaluationError("shrinkage function is not finite at zero");
    out += h0 * (v - s.vectors * coords);
  }
  return out;
}

LdaOutcome empirical_lda_error(const LdaDraw& draw, const ShrinkageFunction& h,
                               const CovarianceModel& sigma) {
  const Eigen::VectorXd a = apply_spectral(*draw.spectrum, h, draw.delta_hat);
  const double num = a.dot(draw.delta);
  const double den2 = sigma.quadratic(a);
  if (!(den2 > 0.0)) return {0.5, true};
  return {normal_cdf(-num / std::sqrt(den2)), false};
}

double empirical_mean_loss(const LdaDraw& draw, const ShrinkageFunction& r) {
  return (apply_spectral(*draw.spectrum, r, draw.delta_hat) - draw.delta).squaredNorm();
}

double empirical_frobenius_loss(const SampleSpectrum& s, const ShrinkageFunction& h,
                                const CovarianceModel& sigma) {
  const TraceSample traces(s, sigma);
  const Eigen::VectorXd hv = evaluate(h, s.values);
  double h_sq = hv.squaredNorm();
  if (has_null_space(s)) h_sq += (s.p - s.rank()) * h(0.0) * h(0.0);
  const double p = s.p;
  return sigma.trace_squared() / p - 2.0 * traces.m(h) + h_sq / p;
}

TraceSample::TraceSample(const SampleSpectrum& s, const CovarianceModel& sigma)
    : p_(s.p), has_null_(has_null_space(s)), lambda_(s.values),
      trace_(sigma.trace()), trace_sq_(sigma.trace_squared()) {
  const Eigen::MatrixXd su = sigma.times(s.vectors);
  const Eigen::MatrixXd c = s.vectors.transpose() * su;
  c_diag_ = c.diagonal();
  e_diag_ = su.colwise().squaredNorm().transpose();
  c_sq_ = c.array().square().matrix();
}

std::complex<double> TraceSample::m_of(const cvec& h, std::complex<double> h0) const {
  std::complex<double> s = (h.array() * c_diag_.array().cast<std::complex<double>>()).sum();
  if (has_null_) s += h0 * (trace_ - c_diag_.sum());
  return s / double(p_);
}

std::complex<double> TraceSample::t_of(const cvec& h1, std::complex<double> h01, const cvec& h2,
                                       std::complex<double> h02) const {
  // A_k = h0_k I + U diag(d_k) U' with d_k = h_k - h0_k
  if (!has_null_) {
    h01 = h02 = 0.0;
  }
  const cvec d1 = h1.array() - h01, d2 = h2.array() - h02;
  const Eigen::VectorXcd e = e_diag_.cast<std::complex<double>>();
  // plain sums: Eigen's dot() would conjugate the first factor
  std::complex<double> s = h01 * h02 * trace_sq_ + h01 * (d2.array() * e.array()).sum() +
                           h02 * (d1.array() * e.array()).sum();
  s += (d1.array() * (c_sq_.cast<std::complex<double>>() * d2).array()).sum();
  return s / double(p_);
}

double TraceSample::m(const ShrinkageFunction& h) const {
  const double h0 = has_null_ ? h(0.0) : 0.0;
  return m_of(evaluate(h, lambda_).cast<std::complex<double>>(), h0).real();
}

double TraceSample::t(const ShrinkageFunction& h) const {
  const cvec hv = evaluate(h, lambda_).cast<std::complex<double>>();
  const double h0 = has_null_ ? h(0.0) : 0.0;
  return t_of(hv, h0, hv, h0).real();
}

std::complex<double> TraceSample::two_resolvent(std::complex<double> z1,
                                                std::complex<double> z2) const {
  const cvec r1 = (lambda_.cast<std::complex<double>>().array() - z1).inverse();
  const cvec r2 = (lambda_.cast<std::complex<double>>().array() - z2).inverse();
  return t_of(r1, -1.0 / z1, r2, -1.0 / z2);
}

Summary summarize(std::span<const double> values) {
  Summary s;
  s.count = static_cast<int>(values.size());
  if (values.empty()) return s;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / s.count;
  if (s.count > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.se = std::sqrt(ss / (s.count - 1) / s.count);
  }
  return s;
}

}  // namespace shrinkage_lab
