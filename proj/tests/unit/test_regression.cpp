#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "oracles.hpp"
#include "shrinkage_lab/errors.hpp"
#include "shrinkage_lab/functionals.hpp"
#include "shrinkage_lab/regression.hpp"
#include "shrinkage_lab/spectrum.hpp"

using namespace shrinkage_lab;

namespace {

PopulationSpectrum two_atoms() { return PopulationSpectrum({{1.0, 0.5}, {4.0, 0.5}}); }

struct Setup {
  RegressionModel model;
  LimitingSpectrum spectrum;
};

Setup setup(double alpha, double gamma, PopulationSpectrum h) {
  auto s = build_limiting_spectrum(h, AspectRatio(gamma));
  return {RegressionModel{alpha, AspectRatio(gamma), std::move(h)}, std::move(s)};
}

}  // namespace

TEST_CASE("gradient flow shrinkage") {
  CHECK(gd_shrinkage(0.0, 0.3)(2.0) == 0.0);
  CHECK(gd_shrinkage(1e6, 1.0 / 3.0)(1.0) == doctest::Approx(0.75).epsilon(1e-6));
  CHECK(gd_shrinkage(1.0, 0.0)(1.0) == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-12));
  CHECK(gd_shrinkage(5.0, 0.0)(0.0) == 0.0);
  CHECK(std::isfinite(gd_shrinkage(5.0, 0.0)(1e-300)));
}

TEST_CASE("null estimator risk") {
  auto [model, s] = setup(0.5, 0.5, PopulationSpectrum::point_mass(1.0));
  CHECK(predicted_test_risk(model, s, ShrinkageFunction::constant(0.0)).risk ==
        doctest::Approx(1.25).epsilon(1e-6));
  auto [m2, s2] = setup(1.0, 2.0, two_atoms());
  CHECK(predicted_test_risk(m2, s2, ShrinkageFunction::constant(0.0)).risk ==
        doctest::Approx(3.5).epsilon(1e-6));
}

TEST_CASE("risk report decomposition") {
  for (double gamma : {1.0 / 3.0, 2.0}) {
    auto [model, s] = setup(1.0, gamma, two_atoms());
    for (const auto& h : {ShrinkageFunction::ridge(0.5), gd_shrinkage(2.0, 0.0), gd_shrinkage(0.5, 1.0),
                          ShrinkageFunction::pseudo_inverse()}) {
      const RiskReport r = predicted_test_risk(model, s, h);
      CHECK(r.risk == doctest::Approx(1.0 + r.bias + r.variance).epsilon(1e-12));
      CHECK(r.risk >= 1.0);
      if (gamma < 1.0) CHECK(r.atom == 0.0);
      else CHECK(r.atom > 0.0);
      CHECK_FALSE(r.flagged);
    }
  }
}

TEST_CASE("risk requires a matching spectrum") {
  auto [model, s] = setup(1.0, 0.5, two_atoms());
  const RegressionModel other_gamma{1.0, AspectRatio(0.25), two_atoms()};
  const RegressionModel other_h{1.0, AspectRatio(0.5), PopulationSpectrum::point_mass(1.0)};
  CHECK_THROWS_AS(predicted_test_risk(other_gamma, s, ShrinkageFunction::ridge(1.0)), ConfigError);
  CHECK_THROWS_AS(predicted_test_risk(other_h, s, ShrinkageFunction::ridge(1.0)), ConfigError);
}

TEST_CASE("optimal ridge beats every other menu entry") {
  for (auto [gamma, alpha] : {std::pair{1.0 / 3.0, 1.0}, std::pair{0.5, 0.5}, std::pair{2.0, 1.0}}) {
    auto [model, s] = setup(alpha, gamma, two_atoms());
    const double best = predicted_test_risk(model, s, ShrinkageFunction::ridge(model.optimal_lambda())).risk;
    for (double lambda : log_space(1e-2, 1e2, 15))
      CHECK(predicted_test_risk(model, s, ShrinkageFunction::ridge(lambda)).risk >= best - 1e-12);
    for (double t : log_space(1e-1, 1e3, 10))
      for (double lambda : {0.0, 0.1, 1.0})
        CHECK(predicted_test_risk(model, s, gd_shrinkage(t, lambda)).risk >= best - 1e-12);
  }
}

TEST_CASE("training error limits") {
  auto [model, s] = setup(1.0, 0.5, two_atoms());
  CHECK(predicted_train_error(model, s, 1e-8, 1e6) == doctest::Approx(0.5).epsilon(1e-3));
  // untrained: both errors are Var(y)
  const double var_y = 1.0 + 2.5;
  CHECK(predicted_train_error(model, s, 0.3, 0.0) == doctest::Approx(var_y).epsilon(1e-6));
  CHECK(predicted_test_risk(model, s, gd_shrinkage(0.0, 0.3)).risk == doctest::Approx(var_y).epsilon(1e-6));
}

TEST_CASE("learning curves") {
  const auto times = log_space(1e-2, 1e3, 30);
  for (double gamma : {0.5, 2.0}) {
    auto [model, s] = setup(1.0, gamma, two_atoms());
    for (double lambda : {0.0, 0.1, 2.0}) {
      const LearningCurve c = learning_curve(model, s, lambda, times);
      REQUIRE(c.test_risk.size() == times.size());
      for (std::size_t k = 1; k < times.size(); ++k)
        CHECK(c.train_error[k] <= c.train_error[k - 1] + 1e-12);
    }
    // long training converges to ridge
    const LearningCurve far = learning_curve(model, s, 0.4, {1e6});
    CHECK(far.test_risk[0] ==
          doctest::Approx(predicted_test_risk(model, s, ShrinkageFunction::ridge(0.4)).risk).epsilon(1e-6));
  }
  auto [model, s] = setup(1.0, 0.5, two_atoms());
  CHECK_THROWS_AS(learning_curve(model, s, 0.1, {1.0, 0.5}), ConfigError);
  CHECK_THROWS_AS(learning_curve(model, s, 0.1, {-1.0, 0.5}), ConfigError);
}

TEST_CASE("risk surface has its long-time minimum at the optimal lambda") {
  auto [model, s] = setup(0.5, 0.5, PopulationSpectrum::point_mass(1.0));
  CHECK(model.optimal_lambda() == 2.0);
  double best = 1e300, arg = 0.0;
  for (double lambda : log_space(0.25, 16.0, 25)) {
    const double r = learning_curve(model, s, lambda, {1e4}).test_risk[0];
    if (r < best) best = r, arg = lambda;
  }
  CHECK(arg == doctest::Approx(2.0));
}

TEST_CASE("closed-form identity curve") {
  const auto times = log_space(1e-2, 1e3, 25);
  CHECK(closed_form_identity_curve(0.5, AspectRatio(0.5), {0.0}).test_risk[0] ==
        doctest::Approx(1.25).epsilon(1e-10));
  for (double gamma : {0.5, 2.0}) {
    const auto closed = closed_form_identity_curve(0.5, AspectRatio(gamma), times);
    auto [model, s] = setup(0.5, gamma, PopulationSpectrum::point_mass(1.0));
    const auto solved = learning_curve(model, s, 0.0, times);
    for (std::size_t k = 0; k < times.size(); ++k)
      CHECK(closed.test_risk[k] == doctest::Approx(solved.test_risk[k]).epsilon(1e-4));
  }
  // gamma > 1, t -> inf: the zero atom adds alpha^2 (1 - 1/gamma) and the
  // variance part stays finite; compare with direct quadrature of the limit
  const double alpha = 0.5, gamma = 2.0, t = 1e6;
  const double direct = 1.0 + oracle::mp_integral(gamma, [&](double x) {
    if (x == 0.0) return alpha * alpha;
    const double e = std::exp(-t * x);
    return alpha * alpha * e * e + gamma * (1.0 - e) * (1.0 - e) / x;
  });
  CHECK(closed_form_identity_curve(alpha, AspectRatio(gamma), {t}).test_risk[0] ==
        doctest::Approx(direct).epsilon(1e-6));
}

TEST_CASE("overtraining starts earlier for larger gamma") {
  const auto times = log_space(1e-2, 1e3, 400);
  double previous = 1e300;
  for (double gamma : {0.25, 0.5, 0.75}) {
    const auto c = closed_form_identity_curve(0.5, AspectRatio(gamma), times);
    const auto it = std::min_element(c.test_risk.begin(), c.test_risk.end());
    const auto k = static_cast<std::size_t>(it - c.test_risk.begin());
    CHECK(k > 0);
    CHECK(k + 1 < times.size());
    CHECK(times[k] < previous);
    previous = times[k];
  }
}

TEST_CASE("over-regularized curves are monotone") {
  auto [model, s] = setup(0.5, 0.5, PopulationSpectrum::point_mass(1.0));
  const auto times = log_space(1e-2, 1e3, 60);
  const double star = model.optimal_lambda();
  CHECK(check_overregularized_monotone(model, s, star, times).monotone);
  CHECK(check_overregularized_monotone(model, s, 10.0 * star, times).monotone);
  CHECK_THROWS_AS(check_overregularized_monotone(model, s, 0.1 * star, times), DomainError);
  const auto diag = check_overregularized_monotone(model, s, 0.1 * star, times, true);
  CHECK_FALSE(diag.monotone);
  CHECK(diag.max_violation > 1e-8);
}

TEST_CASE("optimal stopping") {
  auto [model, s] = setup(0.5, 0.5, PopulationSpectrum::point_mass(1.0));
  const StoppingPoint stop = optimal_stopping_time(model, s, 0.0);
  for (double t : log_space(1e-2, 1e3, 50))
    CHECK(predicted_test_risk(model, s, gd_shrinkage(t, 0.0)).risk >= stop.risk - 1e-9);
  // with the optimal penalty, stopping early does not help
  const StoppingPoint ridge = optimal_stopping_time(model, s, model.optimal_lambda());
  CHECK(ridge.risk == doctest::Approx(predicted_test_risk(model, s, ShrinkageFunction::ridge(2.0)).risk).epsilon(1e-6));
}
