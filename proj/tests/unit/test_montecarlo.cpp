#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "shrinkage_lab/errors.hpp"
#include "shrinkage_lab/functionals.hpp"
#include "shrinkage_lab/kernel_estimate.hpp"
#include "shrinkage_lab/lda.hpp"
#include "shrinkage_lab/montecarlo.hpp"
#include "shrinkage_lab/spectrum.hpp"

using namespace shrinkage_lab;

namespace {

PopulationSpectrum two_atoms() { return PopulationSpectrum({{1.0, 0.5}, {4.0, 0.5}}); }

ExperimentConfig config(int p, int n, double alpha, SigmaSpec sigma, std::uint64_t seed) {
  ExperimentConfig c;
  c.p = p;
  c.n = n;
  c.alpha = alpha;
  c.sigma = std::move(sigma);
  c.seed = seed;
  return c;
}

Eigen::VectorXd nonzero_eigenvalues(const ExperimentConfig& c, int replicate = 0) {
  const auto sigma = CovarianceModel::from_spec(c.sigma, c.p);
  auto rng = replicate_engine(c.seed, replicate);
  return sample_covariance_spectrum(sigma.sqrt_times(noise_matrix(rng, c.p, c.n, c.z_dist)), false).values;
}

// sup |g_hat - gamma pi rho| over the inner share of the MP support
double kde_error(int p, double gamma, double inner, std::uint64_t seed) {
  const int n = static_cast<int>(std::lround(p / gamma));
  const Eigen::VectorXd ev = nonzero_eigenvalues(config(p, n, 0.0, PopulationSpectrum::point_mass(1.0), seed));
  const double lo = oracle::mp_lower(gamma), hi = oracle::mp_upper(gamma);
  const double pad = 0.5 * (1.0 - inner) * (hi - lo);
  std::vector<double> grid;
  for (int k = 0; k <= 200; ++k) grid.push_back(lo + pad + (hi - lo - 2.0 * pad) * k / 200.0);
  const auto est = kernel_estimate_fg(std::span<const double>(ev.data(), ev.size()), gamma, grid);
  double err = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k)
    err = std::max(err, std::abs(est.g_hat[k] - gamma * oracle::kPi * oracle::mp_density(gamma, grid[k])));
  return err;
}

}  // namespace

TEST_CASE("configuration validation") {
  CHECK_THROWS_AS(config(1, 10, 1.0, two_atoms(), 0).validate(), ConfigError);
  CHECK_THROWS_AS(config(10, 1, 1.0, two_atoms(), 0).validate(), ConfigError);
  CHECK_THROWS_AS(config(10, 10, -1.0, two_atoms(), 0).validate(), ConfigError);
  CHECK_THROWS_AS(config(10, 10, 1.0, ToeplitzAr{1.0}, 0).validate(), ConfigError);
  CHECK_THROWS_AS(config(10, 10, 1.0, ToeplitzAr{0.0}, 0).validate(), ConfigError);
  auto c = config(10, 10, 1.0, two_atoms(), 0);
  c.replicates = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("covariance models") {
  const auto d = CovarianceModel::diagonal_from_atoms(PopulationSpectrum({{1.0, 0.3}, {2.0, 0.7}}), 11);
  // floor(3.3) = 3 ones, the remainder goes to the heavier atom
  CHECK((d.eigenvalues().array() == 1.0).count() == 3);
  CHECK((d.eigenvalues().array() == 2.0).count() == 8);
  CHECK(d.trace() == doctest::Approx(19.0));

  const auto t = CovarianceModel::toeplitz_ar(0.5, 6);
  const Eigen::MatrixXd dense = t.dense();
  CHECK(dense(0, 3) == 0.125);
  CHECK(dense(4, 2) == 0.25);
  CHECK(t.trace() == doctest::Approx(6.0));
  CHECK(t.trace_squared() == doctest::Approx(dense.squaredNorm()).epsilon(1e-12));
  Eigen::MatrixXd z = Eigen::MatrixXd::Random(6, 3);
  const Eigen::MatrixXd root = t.sqrt_times(Eigen::MatrixXd::Identity(6, 6));
  CHECK((root * root.transpose() - dense).norm() < 1e-12);
  CHECK((t.times(z) - dense * z).norm() < 1e-12);
  CHECK(t.population().moment(1) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("draws are deterministic") {
  const auto c = config(60, 40, 1.0, two_atoms(), 123);
  const auto sigma = CovarianceModel::from_spec(c.sigma, c.p);
  const auto a = generate_regression_draw(c, sigma, 3), b = generate_regression_draw(c, sigma, 3);
  CHECK(a.x == b.x);
  CHECK(a.y == b.y);
  CHECK(a.spectrum.values == b.spectrum.values);
  const auto other = generate_regression_draw(c, sigma, 4);
  CHECK(a.x != other.x);

  auto cl = config(60, 40, 1.0, two_atoms(), 9);
  const auto l1 = generate_lda_draw(cl, sigma, 1), l2 = generate_lda_draw(cl, sigma, 1);
  CHECK(l1.delta_hat == l2.delta_hat);
  CHECK(l1.spectrum->values == l2.spectrum->values);
  CHECK(empirical_lda_error(l1, ShrinkageFunction::ridge_inverse(1.0), sigma).error ==
        empirical_lda_error(l2, ShrinkageFunction::ridge_inverse(1.0), sigma).error);
}

TEST_CASE("singular system reconstructs the design") {
  for (auto [p, n] : {std::pair{30, 50}, std::pair{50, 30}}) {
    const auto c = config(p, n, 1.0, ToeplitzAr{0.5}, 5);
    const auto sigma = CovarianceModel::from_spec(c.sigma, p);
    const auto d = generate_regression_draw(c, sigma);
    const auto& s = d.spectrum;
    CHECK(s.rank() == std::min(p, n));
    // X / sqrt(n) = U diag(sqrt(lambda)) V' with V = X' U / (sqrt(n lambda))
    const Eigen::MatrixXd xs = d.x / std::sqrt(double(n));
    const Eigen::MatrixXd v = (xs.transpose() * s.vectors) * s.values.cwiseSqrt().cwiseInverse().asDiagonal();
    CHECK((v.transpose() * v - Eigen::MatrixXd::Identity(s.rank(), s.rank())).norm() < 1e-10);
    CHECK((s.vectors * s.values.cwiseSqrt().asDiagonal() * v.transpose() - xs).norm() < 1e-10 * xs.norm());
    CHECK(s.all_values().size() == p);
  }
}

TEST_CASE("null signal and null estimator") {
  auto c = config(200, 4000, 0.0, PopulationSpectrum::point_mass(1.0), 17);
  const auto sigma = CovarianceModel::from_spec(c.sigma, c.p);
  const auto d = generate_regression_draw(c, sigma);
  CHECK(d.y == d.eps);
  const double var = (d.y.array() - d.y.mean()).square().sum() / (d.y.size() - 1);
  CHECK(std::abs(var - 1.0) < 4.0 * std::sqrt(2.0 / d.y.size()));

  c.alpha = 1.0;
  const auto s2 = CovarianceModel::from_spec(two_atoms(), c.p);
  std::vector<double> risks;
  for (int r = 0; r < 40; ++r) {
    const auto dr = generate_regression_draw(c, s2, r);
    const auto out = empirical_regression_risk(dr, ShrinkageFunction::constant(0.0), s2);
    CHECK(out.test_risk == doctest::Approx(1.0 + s2.quadratic(dr.w)).epsilon(1e-12));
    risks.push_back(out.test_risk);
  }
  const Summary sum = summarize(risks);
  CHECK(std::abs(sum.mean - 3.5) < 3.0 * sum.se);
}

TEST_CASE("top eigenvalue of a square white design") {
  const Eigen::VectorXd ev = nonzero_eigenvalues(config(1000, 1000, 0.0, PopulationSpectrum::point_mass(1.0), 1));
  CHECK(std::abs(ev.maxCoeff() - 4.0) < 0.2);
}

TEST_CASE("ridge shrinkage equals a direct ridge solve") {
  for (auto [p, n] : {std::pair{80, 200}, std::pair{200, 80}}) {
    const auto c = config(p, n, 1.0, two_atoms(), 31);
    const auto sigma = CovarianceModel::from_spec(c.sigma, p);
    const auto d = generate_regression_draw(c, sigma);
    const double lambda = 0.3;
    const Eigen::MatrixXd a = d.x * d.x.transpose() / double(n) + lambda * Eigen::MatrixXd::Identity(p, p);
    const Eigen::VectorXd direct = a.ldlt().solve(d.x * d.y / double(n));
    const Eigen::VectorXd shrunk = regression_estimate(d, ShrinkageFunction::ridge(lambda));
    CHECK((shrunk - direct).norm() < 1e-8 * direct.norm());
    // long gradient flow lands on the same point
    const Eigen::VectorXd flow = regression_estimate(d, ShrinkageFunction::gradient_flow(1e6, lambda));
    CHECK((flow - direct).norm() < 1e-8 * direct.norm());

    const auto out = empirical_regression_risk(d, ShrinkageFunction::ridge(lambda), sigma);
    const Eigen::VectorXd resid = d.y - d.x.transpose() * direct;
    CHECK(out.train_error == doctest::Approx(resid.squaredNorm() / n).epsilon(1e-8));
    CHECK(out.test_risk == doctest::Approx(1.0 + sigma.quadratic(direct - d.w)).epsilon(1e-8));
  }
}

TEST_CASE("lda draw requirements") {
  const auto sigma = CovarianceModel::from_spec(two_atoms(), 40);
  CHECK_THROWS_AS(generate_lda_draw(config(40, 41, 1.0, two_atoms(), 0), sigma), ConfigError);
  auto c = config(40, 40, 1.0, two_atoms(), 0);
  c.z_dist = NoiseDistribution::rademacher;
  CHECK_THROWS_AS(generate_lda_draw(c, sigma), ConfigError);
  CHECK_THROWS_AS(generate_lda_draw(config(30, 40, 1.0, two_atoms(), 0), sigma), ConfigError);
}

TEST_CASE("conditional lda error") {
  const auto c = config(200, 400, 1.5, two_atoms(), 8);
  const auto sigma = CovarianceModel::from_spec(c.sigma, c.p);
  const auto d = generate_lda_draw(c, sigma);

  // identity shrinkage: the plain mean difference
  const double plain = normal_cdf(-d.delta_hat.dot(d.delta) / std::sqrt(sigma.quadratic(d.delta_hat)));
  CHECK(empirical_lda_error(d, ShrinkageFunction::constant(1.0), sigma).error ==
        doctest::Approx(plain).epsilon(1e-12));

  // against classifying 1e5 fresh points
  const auto h = ShrinkageFunction::ridge_inverse(1.0);
  const Eigen::VectorXd a = apply_spectral(*d.spectrum, h, d.delta_hat);
  const double predicted = empirical_lda_error(d, h, sigma).error;
  auto rng = replicate_engine(99, 0);
  const int tests = 100000, block = 5000;
  int wrong = 0;
  for (int done = 0; done < tests; done += block) {
    const Eigen::MatrixXd z = sigma.sqrt_times(noise_matrix(rng, c.p, block, NoiseDistribution::gaussian));
    for (int i = 0; i < block; ++i) {
      const double y = (i % 2 == 0) ? 1.0 : -1.0;
      const double score = a.dot(z.col(i)) + y * a.dot(d.delta);
      if (score * y < 0.0) ++wrong;
    }
  }
  const double frac = double(wrong) / tests;
  CHECK(std::abs(frac - predicted) < 3.0 * std::sqrt(predicted * (1.0 - predicted) / tests));

  // large separation
  const auto far = d.with_alpha(8.0);
  for (const auto& g : {ShrinkageFunction::ridge_inverse(1.0), ShrinkageFunction::constant(1.0),
                        ShrinkageFunction::ridge_inverse(0.1)})
    CHECK(empirical_lda_error(far, g, sigma).error < 1e-3);
  CHECK(empirical_lda_error(d, ShrinkageFunction::constant(0.0), sigma).degenerate);
}

TEST_CASE("with_alpha keeps the noise") {
  const auto c = config(50, 60, 1.0, two_atoms(), 4);
  const auto sigma = CovarianceModel::from_spec(c.sigma, c.p);
  const auto base = generate_lda_draw(c, sigma);
  auto c2 = c;
  c2.alpha = 2.5;
  const auto fresh = generate_lda_draw(c2, sigma);
  const auto moved = base.with_alpha(2.5);
  CHECK((moved.delta_hat - fresh.delta_hat).norm() < 1e-12);
  CHECK((moved.spectrum->values - fresh.spectrum->values).norm() < 1e-10 * fresh.spectrum->values.norm());
}

TEST_CASE("frobenius loss") {
  const int p = 2000;
  const auto white = config(p, 4 * p, 0.0, PopulationSpectrum::point_mass(1.0), 2);
  const auto id = CovarianceModel::from_spec(white.sigma, p);
  auto rng = replicate_engine(white.seed, 0);
  const auto s = sample_covariance_spectrum(id.sqrt_times(noise_matrix(rng, p, white.n, white.z_dist)), true);
  CHECK(empirical_frobenius_loss(s, ShrinkageFunction::constant(1.0), id) < 1e-2);
  CHECK(empirical_frobenius_loss(s, ShrinkageFunction::constant(1.0), id) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(empirical_frobenius_loss(s, ShrinkageFunction::constant(0.0), id) == doctest::Approx(1.0).epsilon(1e-12));

  const auto two = CovarianceModel::from_spec(two_atoms(), 200);
  auto rng2 = replicate_engine(3, 0);
  const auto s2 = sample_covariance_spectrum(two.sqrt_times(noise_matrix(rng2, 200, 100, NoiseDistribution::gaussian)), true);
  CHECK(empirical_frobenius_loss(s2, ShrinkageFunction::constant(0.0), two) == doctest::Approx(8.5).epsilon(1e-12));
}

TEST_CASE("trace sample matches dense algebra") {
  for (auto [p, n] : {std::pair{40, 70}, std::pair{70, 40}}) {
    const auto sigma = CovarianceModel::toeplitz_ar(0.6, p);
    auto rng = replicate_engine(12, 0);
    const auto s = sample_covariance_spectrum(sigma.sqrt_times(noise_matrix(rng, p, n, NoiseDistribution::rademacher)), true);
    const Eigen::MatrixXd sd = sigma.dense();
    const Eigen::MatrixXd proj = s.vectors * s.vectors.transpose();
    auto dense_h = [&](const ShrinkageFunction& h) {
      Eigen::VectorXd hv(s.rank());
      for (int i = 0; i < s.rank(); ++i) hv[i] = h(s.values[i]);
      Eigen::MatrixXd a = s.vectors * hv.asDiagonal() * s.vectors.transpose();
      if (p > n) a += h(0.0) * (Eigen::MatrixXd::Identity(p, p) - proj);
      return a;
    };
    const TraceSample traces(s, sigma);
    for (const auto& h : {ShrinkageFunction::ridge_inverse(0.5), ShrinkageFunction::exponential(1.0),
                          ShrinkageFunction::identity()}) {
      const Eigen::MatrixXd a = dense_h(h);
      CHECK(traces.m(h) == doctest::Approx((sd * a).trace() / p).epsilon(1e-10));
      CHECK(traces.t(h) == doctest::Approx((sd * a * sd * a).trace() / p).epsilon(1e-10));
      CHECK(empirical_frobenius_loss(s, h, sigma) == doctest::Approx((sd - a).squaredNorm() / p).epsilon(1e-10));
      const Eigen::VectorXd v = Eigen::VectorXd::LinSpaced(p, -1.0, 2.0);
      CHECK((apply_spectral(s, h, v) - a * v).norm() < 1e-10 * (a * v).norm());
    }
    // two resolvents through the dense inverses
    const std::complex<double> z1(1.0, 1.0), z2(2.0, 0.5);
    const Eigen::MatrixXcd sc = s.vectors * s.values.asDiagonal() * s.vectors.transpose();
    const Eigen::MatrixXcd eye = Eigen::MatrixXcd::Identity(p, p);
    const Eigen::MatrixXcd r1 = (sc - z1 * eye).inverse(), r2 = (sc - z2 * eye).inverse();
    const Eigen::MatrixXcd sdc = sd.cast<std::complex<double>>();
    const std::complex<double> direct = (sdc * r1 * sdc * r2).trace() / double(p);
    CHECK(std::abs(traces.two_resolvent(z1, z2) - direct) < 1e-10 * std::abs(direct));
  }
}

TEST_CASE("summaries") {
  const std::vector<double> v = {1.0, 2.0, 3.0, 4.0};
  const Summary s = summarize(v);
  CHECK(s.count == 4);
  CHECK(s.mean == 2.5);
  CHECK(s.se == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
  CHECK(summarize(std::vector<double>{7.0}).se == 0.0);
}

TEST_CASE("kernel estimate of the boundary values") {
  const double gamma = 0.5;
  const double err3000 = kde_error(3000, gamma, 0.8, 41);
  CHECK(err3000 < 5e-2);
  // consistency: the error shrinks with p
  const double err750 = kde_error(750, gamma, 0.8, 41);
  CHECK(err3000 < 0.75 * err750);

  const Eigen::VectorXd ev = nonzero_eigenvalues(config(3000, 6000, 0.0, PopulationSpectrum::point_mass(1.0), 41));
  const std::span<const double> eig(ev.data(), ev.size());
  const auto est = kernel_estimate_fg(eig, gamma);
  CHECK(est.x.size() == 512);
  CHECK(est.bandwidth > 0.0);
  for (double g : est.g_hat) CHECK(g >= 0.0);
  const double lo = oracle::mp_lower(gamma), hi = oracle::mp_upper(gamma);
  for (std::size_t k = 0; k < est.x.size(); ++k) {
    const double x = est.x[k];
    if (x < lo + 0.1 * (hi - lo) || x > hi - 0.1 * (hi - lo)) continue;
    CHECK(std::abs(x * (est.f_hat[k] * est.f_hat[k] + est.g_hat[k] * est.g_hat[k]) - 1.0) < 0.1);
  }

  CHECK_THROWS_AS(kernel_estimate_fg(eig.subspan(0, 50), gamma), ConfigError);
  CHECK_THROWS_AS(kernel_estimate_fg(eig, gamma, -1.0), ConfigError);
}

TEST_CASE("kernel estimate for a two-atom population") {
  const double gamma = 1.0 / 3.0;
  const auto s = build_limiting_spectrum(two_atoms(), AspectRatio(gamma));
  const Eigen::VectorXd ev = nonzero_eigenvalues(config(3000, 9000, 0.0, two_atoms(), 6));
  const std::span<const double> eig(ev.data(), ev.size());
  auto interior_error = [&](const EmpiricalSpectrumEstimate& est) {
    double err = 0.0;
    for (std::size_t j = 0; j < s.size(); ++j) {
      // stay away from the edges, where the kernel smooths the square root
      const auto& iv = s.support()[s.interval_index()[j]];
      const double w = iv.upper - iv.lower;
      if (s.x()[j] < iv.lower + 0.1 * w || s.x()[j] > iv.upper - 0.1 * w) continue;
      err = std::max(err, std::abs(est.g_hat[j] - s.g()[j]));
    }
    return err;
  };
  const double gmax = *std::max_element(s.g().begin(), s.g().end());
  // the interquartile default spans both bulks and oversmooths the narrow one;
  // a bandwidth on the scale of that bulk resolves it
  const auto tuned = kernel_estimate_fg(eig, gamma, s.x(), 0.1);
  CHECK(interior_error(tuned) < 5e-2 * gmax);
  const auto fallback = kernel_estimate_fg(eig, gamma, s.x());
  CHECK(fallback.bandwidth > 0.1);
  CHECK(interior_error(fallback) > interior_error(tuned));
}
