#include "shrinkage_lab/lda.hpp"

#include <cmath>

#include "shrinkage_lab/errors.hpp"
#include "shrinkage_lab/quadratic_program.hpp"

namespace shrinkage_lab {

namespace {

void check_model(const LdaModel& model, const LimitingSpectrum& spectrum) {
  if (!(model.alpha > 0.0) || !std::isfinite(model.alpha))
    throw ConfigError("LDA alpha must be positive and finite");
  if (model.gamma.value() != spectrum.gamma() || !(model.population == spectrum.population()))
    throw ConfigError("limiting spectrum was built for a different (gamma, H)");
  if (!(model.population.min_location() > 0.0))
    throw ConfigError("LDA needs a population spectrum bounded away from zero");
}

// x (f^2 + g^2) on the grid: the precision estimate matching the
// Frobenius-optimal covariance shrinker, and the ratio dF / dM
std::vector<double> precision_profile(const LimitingSpectrum& s) {
  std::vector<double> q(s.size());
  for (std::size_t j = 0; j < s.size(); ++j) {
    const double f = s.f()[j], g = s.g()[j];
    q[j] = s.x()[j] * (f * f + g * g);
  }
  return q;
}

// cells of consecutive nodes, never straddling two support intervals
std::vector<std::vector<std::size_t>> make_cells(const LimitingSpectrum& s, int grid_size) {
  const std::size_t n = s.size();
  std::vector<std::vector<std::size_t>> cells;
  if (static_cast<std::size_t>(grid_size) >= n) {
    for (std::size_t j = 0; j < n; ++j) cells.push_back({j});
    return cells;
  }
  const auto idx = s.interval_index();
  std::size_t start = 0;
  while (start < n) {
    std::size_t stop = start;
    while (stop < n && idx[stop] == idx[start]) ++stop;
    const std::size_t count = stop - start;
    const std::size_t k =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(double(grid_size) * count / n)));
    for (std::size_t c = 0; c < k; ++c) {
      const std::size_t lo = start + c * count / k, hi = start + (c + 1) * count / k;
      std::vector<std::size_t> cell;
      for (std::size_t j = lo; j < hi; ++j) cell.push_back(j);
      if (!cell.empty()) cells.push_back(std::move(cell));
    }
    start = stop;
  }
  return cells;
}

}  // namespace

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

LdaCalculator::LdaCalculator(const LimitingSpectrum& spectrum)
    : spectrum_(&spectrum), trace_(spectrum), measure_(spectrum.measure_weights()) {}

double LdaCalculator::integral(const SampledFunction& h) const {
  double s = spectrum_->atom0_mass() * h.at_zero;
  for (std::size_t j = 0; j < measure_.size(); ++j) s += measure_[j] * h.values[j];
  return s;
}

LdaErrorReport LdaCalculator::theta(double alpha, const SampledFunction& h) const {
  for (double v : h.values)
    if (v < 0.0) throw DomainError("LDA shrinkage function must be nonnegative");
  if (trace_.has_atom() && h.at_zero < 0.0)
    throw DomainError("LDA shrinkage function must be nonnegative at zero");
  const double a2 = alpha * alpha;
  SampledFunction sq = h;
  for (double& v : sq.values) v *= v;
  sq.at_zero *= sq.at_zero;
  LdaErrorReport r;
  const double mean = integral(h);
  r.numerator = a2 * a2 * mean * mean;
  r.denom_m = a2 * trace_.m(sq).value;
  r.denom_t = spectrum_->gamma() * trace_.t(h).value;
  const double denom = r.denom_m + r.denom_t;
  if (mean == 0.0 || !(denom > 0.0)) {
    r.degenerate = true;
    r.theta = 0.0;
    r.error = 0.5;
    return r;
  }
  r.theta = r.numerator / denom;
  r.error = normal_cdf(-std::sqrt(r.theta));
  return r;
}

LdaErrorReport LdaCalculator::theta(double alpha, const ShrinkageFunction& h) const {
  return theta(alpha, h.sample(*spectrum_));
}

LdaErrorReport lda_theta(const LdaModel& model, const LimitingSpectrum& spectrum,
                         const ShrinkageFunction& h) {
  check_model(model, spectrum);
  return LdaCalculator(spectrum).theta(model.alpha, h);
}

QpSolution optimal_shrinkage_qp(const LdaModel& model, const LimitingSpectrum& spectrum,
                                int grid_size) {
  check_model(model, spectrum);
  return optimal_shrinkage_qp(model, LdaCalculator(spectrum), grid_size);
}

QpSolution optimal_shrinkage_qp(const LdaModel& model, const LdaCalculator& calc, int grid_size) {
  const LimitingSpectrum& s = calc.spectrum();
  check_model(model, s);
  if (grid_size < 32) throw ConfigError("QP grid_size must be at least 32");
  const TraceOperator& op = calc.trace();
  const auto cells = make_cells(s, grid_size);
  const Eigen::Index k = static_cast<Eigen::Index>(cells.size());
  const Eigen::Index dim = k + (op.has_atom() ? 1 : 0);
  const Eigen::Index n = static_cast<Eigen::Index>(s.size());

  // node-to-cell aggregation; the atom at zero keeps its own variable
  Eigen::MatrixXd agg = Eigen::MatrixXd::Zero(dim, op.dimension());
  for (Eigen::Index c = 0; c < k; ++c)
    for (std::size_t j : cells[c]) agg(c, static_cast<Eigen::Index>(j)) = 1.0;
  if (op.has_atom()) agg(k, n) = 1.0;

  Eigen::MatrixXd t = agg * op.t_matrix() * agg.transpose();
  const bool regularized = floor_psd(t);
  const Eigen::VectorXd m2 = agg * op.m_weights();  // M(h^2) is diagonal in cell values
  Eigen::MatrixXd p = t;
  p.diagonal() += model.snr() * m2;

  const auto mw = s.measure_weights();
  Eigen::VectorXd c = Eigen::VectorXd::Zero(dim);
  for (Eigen::Index a = 0; a < k; ++a)
    for (std::size_t j : cells[a]) c[a] += mw[j];
  if (op.has_atom()) c[k] = s.atom0_mass();

  const SimplexQpResult qp = solve_simplex_qp(p, c);
  std::vector<double> values(s.size());
  for (Eigen::Index a = 0; a < k; ++a)
    for (std::size_t j : cells[a]) values[j] = qp.solution[a];
  const double at_zero = op.has_atom() ? qp.solution[k] : values.front();
  return {ShrinkageFunction::on_grid(s, std::move(values), at_zero, "optimal_qp"),
          qp.objective,
          qp.kkt_residual,
          qp.bound_active,
          regularized,
          std::nullopt};
}

QpSolution relaxed_optimum(const LdaModel& model, const LimitingSpectrum& s) {
  check_model(model, s);
  if (s.gamma() > 1.0) throw DomainError("the relaxed program is only solved for gamma < 1");
  const std::size_t n = s.size();
  const double c = s.gamma() / (model.alpha * model.alpha);
  const auto mw = s.measure_weights();
  const auto q = precision_profile(s);
  // M(phi) = \int phi / q dF
  auto m = [&](auto&& phi) {
    double v = 0.0;
    for (std::size_t j = 0; j < n; ++j) v += mw[j] * phi(j) / q[j];
    return v;
  };
  double q1 = 0.0;
  for (std::size_t j = 0; j < n; ++j) q1 += mw[j] * q[j];
  // h = 1 + A (q - q1) keeps \int h dF = 1; the objective is quadratic in A
  const double m1 = m([](std::size_t) { return 1.0; });
  // M(q - q1) = -\int (q - q1)^2 / (q q1) dF since \int (q - q1) dF = 0; this form
  // keeps its relative accuracy when q is nearly flat
  const double mdd = m([&](std::size_t j) { return (q[j] - q1) * (q[j] - q1); });
  const double md = -mdd / q1;
  const double slope = mdd > 0.0 ? -md * (1.0 + c * m1) / (mdd + c * md * md) : 0.0;

  std::vector<double> values(n);
  for (std::size_t j = 0; j < n; ++j) values[j] = 1.0 + slope * (q[j] - q1);
  auto objective = [&](const std::vector<double>& h) {
    const double mh = m([&](std::size_t j) { return h[j]; });
    return m([&](std::size_t j) { return h[j] * h[j]; }) + c * mh * mh;
  };

  // the same program solved numerically over all nonnegative node values
  Eigen::VectorXd w(n), cv(n);
  for (std::size_t j = 0; j < n; ++j) {
    w[j] = mw[j] / q[j];
    cv[j] = mw[j];
  }
  Eigen::MatrixXd p = c * w * w.transpose();
  p.diagonal() += w;
  const SimplexQpResult qp = solve_simplex_qp(p, cv);

  // weighted least squares of the numerical solution on {q, 1}
  double s00 = 0, s01 = 0, s11 = 0, r0 = 0, r1 = 0;
  for (std::size_t j = 0; j < n; ++j) {
    s00 += mw[j] * q[j] * q[j];
    s01 += mw[j] * q[j];
    s11 += mw[j];
    r0 += mw[j] * q[j] * qp.solution[j];
    r1 += mw[j] * qp.solution[j];
  }
  const double det = s00 * s11 - s01 * s01;
  const double fa = (r0 * s11 - r1 * s01) / det, fb = (s00 * r1 - s01 * r0) / det;
  double resid = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double e = qp.solution[j] - (fa * q[j] + fb);
    resid += mw[j] * e * e;
  }

  RelaxationFit fit;
  fit.a = 1.0;
  // h = slope q + (1 - slope q1) = slope (q - B)
  fit.b = slope != 0.0 ? q1 - 1.0 / slope : 0.0;
  fit.residual = std::sqrt(resid);
  const double obj = objective(values);
  const double at_zero = values.front();
  return {ShrinkageFunction::on_grid(s, std::move(values), at_zero, "relaxed_optimum"),
          obj,
          qp.kkt_residual,
          qp.bound_active,
          false,
          fit};
}

ShrinkageFunction mean_shrinker(const LdaModel& model, const LimitingSpectrum& spectrum) {
  if (!(model.alpha > 0.0)) throw ConfigError("mean shrinker needs alpha > 0");
  if (model.gamma.value() != spectrum.gamma() || !(model.population == spectrum.population()))
    throw ConfigError("limiting spectrum was built for a different (gamma, H)");
  const double snr = model.snr();
  const auto q = precision_profile(spectrum);
  std::vector<double> values(q.size());
  for (std::size_t j = 0; j < q.size(); ++j) values[j] = snr / (snr + 1.0 / q[j]);
  const double at_zero = spectrum.gamma() > 1.0
                             ? snr / (snr + 1.0 / ((spectrum.gamma() - 1.0) * spectrum.m0()))
                             : values.front();
  return ShrinkageFunction::on_grid(spectrum, std::move(values), at_zero, "mean_shrinker");
}

double mean_shrinker_loss(const LdaModel& model, const LimitingSpectrum& spectrum,
                          const ShrinkageFunction& r) {
  const SampledFunction v = r.sample(spectrum);
  SampledFunction sq = v;
  for (double& x : sq.values) x *= x;
  sq.at_zero *= sq.at_zero;
  const auto mw = spectrum.measure_weights();
  double bias = spectrum.atom0_mass() * (v.at_zero - 1.0) * (v.at_zero - 1.0);
  for (std::size_t j = 0; j < mw.size(); ++j) bias += mw[j] * (v.values[j] - 1.0) * (v.values[j] - 1.0);
  const double var = spectrum.gamma() * m_functional(spectrum, ShrinkageFunction::on_grid(
                                                                   spectrum, sq.values, sq.at_zero, "r2"))
                                            .value;
  return var + model.alpha * model.alpha * bias;
}

AlphaEstimate estimate_alpha2(double delta_hat_norm2, double trace_sample_cov, double n) {
  if (!(n > 0.0)) throw ConfigError("sample count must be positive");
  AlphaEstimate e;
  e.raw = delta_hat_norm2 - trace_sample_cov / n;
  e.clamped = e.raw < 0.0;
  e.value = e.clamped ? 0.0 : e.raw;
  return e;
}

RidgeChoice best_ridge_inverse(const LdaCalculator& calc, double alpha, double lambda_min,
                               double lambda_max) {
  if (!(lambda_min > 0.0) || !(lambda_max > lambda_min))
    throw ConfigError("need 0 < lambda_min < lambda_max");
  auto err = [&](double log_l) {
    return calc.theta(alpha, ShrinkageFunction::ridge_inverse(std::exp(log_l))).error;
  };
  const int scan = 81;
  const double a0 = std::log(lambda_min), b0 = std::log(lambda_max), h = (b0 - a0) / (scan - 1);
  int best = 0;
  double best_val = err(a0);
  for (int k = 1; k < scan; ++k) {
    const double v = err(a0 + k * h);
    if (v < best_val) {
      best_val = v;
      best = k;
    }
  }
  double a = a0 + std::max(best - 1, 0) * h, b = a0 + std::min(best + 1, scan - 1) * h;
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
  double fc = err(c), fd = err(d);
  while (b - a > 1e-8) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = err(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = err(d);
    }
  }
  double lambda = std::exp(0.5 * (a + b));
  if (best_val < err(0.5 * (a + b))) lambda = std::exp(a0 + best * h);
  return {lambda, calc.theta(alpha, ShrinkageFunction::ridge_inverse(lambda))};
}

ShrinkageFunction lp_covariance_precision(const LimitingSpectrum& spectrum) {
  if (spectrum.gamma() > 1.0)
    throw DomainError("inverting the covariance shrinker needs gamma < 1");
  auto q = precision_profile(spectrum);
  const double first = q.front();
  return ShrinkageFunction::on_grid(spectrum, std::move(q), first, "lp_covariance");
}

std::vector<ComparisonRow> compare_shrinkers(const LimitingSpectrum& spectrum,
                                             const std::vector<double>& alphas, int grid_size) {
  if (spectrum.gamma() > 1.0)
    throw DomainError("shrinker comparison needs gamma < 1 (1 / x is unbounded otherwise)");
  const LdaCalculator calc(spectrum);
  const ShrinkageFunction lp_cov = lp_covariance_precision(spectrum);
  const ShrinkageFunction lp_prec = lp_precision_shrinker(spectrum);
  const ShrinkageFunction identity = ShrinkageFunction::ridge_inverse(0.0);
  std::vector<ComparisonRow> rows;
  for (double alpha : alphas) {
    const LdaModel model{alpha, spectrum.aspect_ratio(), spectrum.population()};
    const QpSolution opt = optimal_shrinkage_qp(model, calc, grid_size);
    const RidgeChoice ridge = best_ridge_inverse(calc, alpha);
    rows.push_back({alpha, calc.theta(alpha, opt.h_opt).error, calc.theta(alpha, lp_cov).error,
                    calc.theta(alpha, lp_prec).error, ridge.report.error, ridge.lambda,
                    calc.theta(alpha, identity).error});
  }
  return rows;
}

}  // namespace shrinkage_lab
