#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "shrinkage_lab/errors.hpp"
#include "shrinkage_lab/functionals.hpp"
#include "shrinkage_lab/linalg.hpp"
#include "shrinkage_lab/montecarlo.hpp"
#include "shrinkage_lab/spectrum.hpp"

using namespace shrinkage_lab;
using cd = std::complex<double>;

namespace {

PopulationSpectrum two_atoms() { return PopulationSpectrum({{1.0, 0.5}, {4.0, 0.5}}); }

std::vector<ShrinkageFunction> menu() {
  return {ShrinkageFunction::ridge_inverse(1.0), ShrinkageFunction::identity(),
          ShrinkageFunction::exponential(1.0), ShrinkageFunction::constant(2.0),
          ShrinkageFunction::polynomial({0.5, -0.2, 0.1}), ShrinkageFunction::ridge(0.5),
          ShrinkageFunction::gradient_flow(3.0, 0.1)};
}

// one simulated sample covariance with dense traces computed directly
struct DenseDraw {
  Eigen::VectorXd sigma;  // diagonal population
  SampleSpectrum spectrum;

  Eigen::MatrixXd apply(const ShrinkageFunction& h) const {
    const auto& u = spectrum.vectors;
    Eigen::VectorXd d(spectrum.rank());
    for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = h(spectrum.values(i));
    Eigen::MatrixXd out = u * d.asDiagonal() * u.transpose();
    if (spectrum.rank() < sigma.size()) {
      const double h0 = h(0.0);
      out += h0 * (Eigen::MatrixXd::Identity(sigma.size(), sigma.size()) - u * u.transpose());
    }
    return out;
  }
  double m(const ShrinkageFunction& h) const {
    return (sigma.asDiagonal() * apply(h)).trace() / sigma.size();
  }
  double t(const ShrinkageFunction& h) const {
    const Eigen::MatrixXd a = sigma.asDiagonal() * apply(h);
    return (a * a).trace() / sigma.size();
  }
  double frobenius(const ShrinkageFunction& h) const {
    const Eigen::MatrixXd diff = Eigen::MatrixXd(sigma.asDiagonal()) - apply(h);
    return diff.squaredNorm() / sigma.size();
  }
};

DenseDraw dense_draw(const PopulationSpectrum& h, int p, int n, std::uint64_t seed) {
  const auto cov = CovarianceModel::diagonal_from_atoms(h, p);
  auto rng = replicate_engine(seed, 0);
  const Eigen::MatrixXd z = noise_matrix(rng, p, n, NoiseDistribution::gaussian);
  return {cov.eigenvalues(), sample_covariance_spectrum(cov.sqrt_times(z), true)};
}

}  // namespace

TEST_CASE("M of a constant is the population mean") {
  const auto s = build_limiting_spectrum(two_atoms(), AspectRatio(1.0 / 3.0));
  CHECK(m_functional(s, ShrinkageFunction::constant(1.0)).value == doctest::Approx(2.5).epsilon(1e-4));
  const auto unit = build_limiting_spectrum(PopulationSpectrum::point_mass(1.0), AspectRatio(0.5));
  CHECK(m_functional(unit, ShrinkageFunction::identity()).value == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("identity population reduces M and T to moments of the limiting law") {
  for (double gamma : {0.5, 2.0}) {
    const auto s = build_limiting_spectrum(PopulationSpectrum::point_mass(1.0), AspectRatio(gamma));
    for (const auto& h : {ShrinkageFunction::exponential(1.0), ShrinkageFunction::polynomial({0.5, -0.2, 0.1}),
                          ShrinkageFunction::ridge(0.5)}) {
      const double m = oracle::mp_integral(gamma, [&](double x) { return h(x); });
      const double t = oracle::mp_integral(gamma, [&](double x) { return h(x) * h(x); });
      CHECK(m_functional(s, h).value == doctest::Approx(m).epsilon(1e-8));
      CHECK(t_functional(s, h).value == doctest::Approx(t).epsilon(1e-8));
    }
  }
  const auto s = build_limiting_spectrum(PopulationSpectrum::point_mass(1.0), AspectRatio(0.5));
  CHECK(t_functional(s, ShrinkageFunction::identity()).value == doctest::Approx(1.5).epsilon(5e-4));
  CHECK(t_functional(s, ShrinkageFunction::constant(0.0)).value == 0.0);
}

TEST_CASE("two-resolvent limit symmetries") {
  const auto s = build_limiting_spectrum(two_atoms(), AspectRatio(1.0 / 3.0));
  const cd z1(1.0, 1.0), z2(2.0, 0.5);
  const cd v = two_resolvent_limit(s, z1, z2);
  CHECK(std::abs(v - two_resolvent_limit(s, z2, z1)) < 1e-12 * std::abs(v));
  CHECK(std::abs(two_resolvent_limit(s, std::conj(z1), std::conj(z2)) - std::conj(v)) < 1e-12 * std::abs(v));
  // coincident arguments use the derivative form and stay continuous
  const cd near = two_resolvent_limit(s, z1, z1 + cd(1e-6, 0.0));
  CHECK(std::abs(two_resolvent_limit(s, z1, z1) - near) < 1e-5 * std::abs(near));
  CHECK_THROWS_AS(two_resolvent_limit(s, cd(1.0, 0.0), z2), DomainError);
}

TEST_CASE("two-resolvent limit matches a simulated trace") {
  const double gamma = 0.5;
  const auto s = build_limiting_spectrum(PopulationSpectrum::point_mass(1.0), AspectRatio(gamma));
  const cd z1(1.0, 1.0), z2(2.0, 1.0);
  const cd limit = two_resolvent_limit(s, z1, z2);
  cd mean = 0.0;
  const int draws = 4;
  for (int r = 0; r < draws; ++r) {
    auto rng = replicate_engine(7, r);
    const Eigen::MatrixXd z = noise_matrix(rng, 2000, 4000, NoiseDistribution::gaussian);
    const Eigen::VectorXd ev = sample_covariance_spectrum(z, false).values;
    cd acc = 0.0;
    for (Eigen::Index i = 0; i < ev.size(); ++i) acc += 1.0 / ((ev(i) - z1) * (ev(i) - z2));
    mean += acc / 2000.0;
  }
  mean /= static_cast<double>(draws);
  CHECK(std::abs(mean - limit) < 2e-2);
}

TEST_CASE("kernel is symmetric and continuous across the diagonal") {
  const auto s = build_limiting_spectrum(two_atoms(), AspectRatio(1.0 / 3.0));
  for (std::size_t a : {10u, 100u, 300u}) {
    for (std::size_t b : {20u, 250u, 400u}) {
      const double x = s.x()[a], y = s.x()[b];
      CHECK(kernel_K(s, x, y) == doctest::Approx(kernel_K(s, y, x)).epsilon(1e-12));
    }
    // the diagonal is the limit: the one-sided gap shrinks linearly and the
    // symmetric mean matches to second order
    const double x = s.x()[a];
    const double diag = kernel_K(s, x, x);
    const double gap = kernel_K(s, x, x + 1e-4) - diag;
    const double small_gap = kernel_K(s, x, x + 1e-5) - diag;
    CHECK(std::abs(small_gap) < 0.2 * std::abs(gap) + 1e-12);
    const double mean = 0.5 * (kernel_K(s, x, x + 1e-4) + kernel_K(s, x, x - 1e-4));
    CHECK(std::abs(mean - diag) <= 1e-4 * std::abs(diag));
  }
}

TEST_CASE("trace operator agrees with the free functions") {
  const auto s = build_limiting_spectrum(two_atoms(), AspectRatio(2.0));
  const TraceOperator op(s);
  CHECK(op.has_atom());
  CHECK(op.dimension() == static_cast<Eigen::Index>(s.size()) + 1);
  for (const auto& h : menu()) {
    CHECK(op.m(h.sample(s)).value == doctest::Approx(m_functional(s, h).value).epsilon(1e-12));
    CHECK(op.t(h.sample(s)).value == doctest::Approx(t_functional(s, h).value).epsilon(1e-12));
  }
}

TEST_CASE("functional properties") {
  for (double gamma : {1.0 / 3.0, 2.0}) {
    const auto s = build_limiting_spectrum(two_atoms(), AspectRatio(gamma));
    const TraceOperator op(s);
    const auto hs = menu();
    for (std::size_t i = 0; i < hs.size(); ++i) {
      const SampledFunction a = hs[i].sample(s);
      const auto m = op.m(a), t = op.t(a);
      CHECK(t.value >= m.value * m.value * (1.0 - 1e-12));
      CHECK_FALSE(m.flagged);
      CHECK_FALSE(t.flagged);
      CHECK(op.m(2.5 * a).value == doctest::Approx(2.5 * m.value).epsilon(1e-12));
      CHECK(op.t(2.5 * a).value == doctest::Approx(6.25 * t.value).epsilon(1e-12));
      const SampledFunction b = hs[(i + 1) % hs.size()].sample(s);
      CHECK(op.m(a + b).value == doctest::Approx(m.value + op.m(b).value).epsilon(1e-12));
      const double cross = op.t_bilinear(a, b);
      CHECK(op.t(a + b).value == doctest::Approx(t.value + op.t(b).value + 2.0 * cross).epsilon(1e-10));
      CHECK(cross == doctest::Approx(op.t_bilinear(b, a)).epsilon(1e-12));
    }
  }
}

TEST_CASE("functionals need h finite on the spectrum") {
  const auto over = build_limiting_spectrum(two_atoms(), AspectRatio(2.0));
  CHECK_THROWS_AS(m_functional(over, ShrinkageFunction::ridge_inverse(0.0)), EvaluationError);
  // 1 / x is fine when there is no mass at zero
  const auto under = build_limiting_spectrum(two_atoms(), AspectRatio(0.5));
  CHECK(std::isfinite(t_functional(under, ShrinkageFunction::ridge_inverse(0.0)).value));
}

TEST_CASE("covariance shrinker") {
  const auto unit = build_limiting_spectrum(PopulationSpectrum::point_mass(1.0), AspectRatio(0.5));
  const auto h = lp_covariance_shrinker(unit);
  for (double v : h.sample(unit).values) CHECK(v == doctest::Approx(1.0).epsilon(1e-6));

  const auto over = build_limiting_spectrum(PopulationSpectrum::point_mass(1.0), AspectRatio(2.0));
  CHECK(lp_covariance_shrinker(over).at_zero() == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("precision shrinker") {
  const auto unit = build_limiting_spectrum(PopulationSpectrum::point_mass(1.0), AspectRatio(0.5));
  const auto h = lp_precision_shrinker(unit);
  for (double v : h.sample(unit).values) {
    CHECK(std::isfinite(v));
    CHECK(v > 0.0);
  }
  // scaling the population by c scales the precision estimate by 1 / c
  const double c = 3.0;
  const auto scaled = build_limiting_spectrum(PopulationSpectrum::point_mass(c), AspectRatio(0.5));
  const auto hc = lp_precision_shrinker(scaled);
  for (double x : {0.2, 1.0, 2.5}) CHECK(hc(c * x) == doctest::Approx(h(x) / c).epsilon(1e-6));

  const auto over = build_limiting_spectrum(PopulationSpectrum::point_mass(1.0), AspectRatio(2.0));
  CHECK_THROWS_AS(lp_precision_shrinker(over), DomainError);
}

TEST_CASE("M, T and the Frobenius ranking match simulated traces") {
  const double gamma = 1.0 / 3.0;
  const auto s = build_limiting_spectrum(two_atoms(), AspectRatio(gamma));
  const auto resolvent = ShrinkageFunction::ridge_inverse(1.0);
  const auto shifted = ShrinkageFunction::ridge_inverse(0.5);
  const auto lp = lp_covariance_shrinker(s);
  const std::vector<ShrinkageFunction> rivals = {
      ShrinkageFunction::identity(), ShrinkageFunction::ridge_inverse(0.1),
      ShrinkageFunction::ridge_inverse(1.0), ShrinkageFunction::ridge_inverse(10.0)};

  const int draws = 2;
  double m = 0.0, t = 0.0, lp_loss = 0.0;
  std::vector<double> rival_loss(rivals.size(), 0.0);
  for (int r = 0; r < draws; ++r) {
    const DenseDraw d = dense_draw(two_atoms(), 2000, 6000, 100 + r);
    m += d.m(resolvent) / draws;
    t += d.t(shifted) / draws;
    lp_loss += d.frobenius(lp) / draws;
    for (std::size_t i = 0; i < rivals.size(); ++i) rival_loss[i] += d.frobenius(rivals[i]) / draws;
  }
  CHECK(std::abs(m - m_functional(s, resolvent).value) < 2e-2);
  CHECK(std::abs(t - t_functional(s, shifted).value) < 3e-2);
  for (double loss : rival_loss) CHECK(lp_loss < loss);
}
