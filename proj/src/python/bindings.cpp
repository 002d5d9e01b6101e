#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "shrinkage_lab/errors.hpp"
#include "shrinkage_lab/functionals.hpp"
#include "shrinkage_lab/kernel_estimate.hpp"
#include "shrinkage_lab/lda.hpp"
#include "shrinkage_lab/linalg.hpp"
#include "shrinkage_lab/montecarlo.hpp"
#include "shrinkage_lab/parallel.hpp"
#include "shrinkage_lab/regression.hpp"
#include "shrinkage_lab/spectrum.hpp"

namespace py = pybind11;
using namespace shrinkage_lab;

namespace {

template <class Range>
py::array_t<double> to_array(const Range& r) {
  py::array_t<double> out(static_cast<py::ssize_t>(std::size(r)));
  auto m = out.mutable_unchecked<1>();
  py::ssize_t i = 0;
  for (double v : r) m(i++) = v;
  return out;
}

py::array_t<double> to_array(const Eigen::VectorXd& v) {
  py::array_t<double> out(v.size());
  std::copy(v.data(), v.data() + v.size(), out.mutable_data());
  return out;
}

RegressionModel regression_model(double alpha, const LimitingSpectrum& s) {
  return {alpha, s.aspect_ratio(), s.population()};
}

LdaModel lda_model(double alpha, const LimitingSpectrum& s) {
  return {alpha, s.aspect_ratio(), s.population()};
}

py::dict curve_dict(const LearningCurve& c) {
  py::dict d;
  d["lambda"] = c.lambda;
  d["times"] = to_array(c.times);
  d["test_risk"] = to_array(c.test_risk);
  d["train_error"] = to_array(c.train_error);
  return d;
}

py::dict qp_dict(const QpSolution& q) {
  py::dict d;
  d["h"] = q.h_opt;
  d["objective"] = q.objective;
  d["kkt_residual"] = q.kkt_residual;
  d["bound_active"] = q.bound_active;
  d["regularized"] = q.regularized;
  if (q.relaxation_fit) {
    d["a"] = q.relaxation_fit->a;
    d["b"] = q.relaxation_fit->b;
    d["residual"] = q.relaxation_fit->residual;
  }
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Limiting spectra, trace functionals and spectral shrinkage for regression and LDA";

  auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<EvaluationError>(m, "EvaluationError", base.ptr());
  py::register_exception<ConvergenceError>(m, "ConvergenceError", base.ptr());

  py::class_<PopulationSpectrum>(m, "PopulationSpectrum")
      .def(py::init([](const std::vector<std::pair<double, double>>& atoms) {
             std::vector<Atom> a;
             for (auto [t, w] : atoms) a.push_back({t, w});
             return PopulationSpectrum(std::move(a));
           }),
           py::arg("atoms"), "Atoms as (location, weight) pairs; weights sum to one.")
      .def_static("point_mass", &PopulationSpectrum::point_mass, py::arg("location"))
      .def_static("toeplitz_ar",
                  [](double rho, int p) { return CovarianceModel::toeplitz_ar(rho, p).population(); },
                  py::arg("rho"), py::arg("p"), "Eigenvalues of the p x p matrix rho^|i-j|.")
      .def_property_readonly("atoms",
                             [](const PopulationSpectrum& h) {
                               std::vector<std::pair<double, double>> out;
                               for (const auto& a : h.atoms()) out.emplace_back(a.location, a.weight);
                               return out;
                             })
      .def("moment", &PopulationSpectrum::moment, py::arg("k"));

  py::class_<LimitingSpectrum>(m, "LimitingSpectrum")
      .def_property_readonly("gamma", &LimitingSpectrum::gamma)
      .def_property_readonly("population", &LimitingSpectrum::population)
      .def_property_readonly("x", [](const LimitingSpectrum& s) { return to_array(s.x()); })
      .def_property_readonly("density", [](const LimitingSpectrum& s) { return to_array(s.density()); })
      .def_property_readonly("f", [](const LimitingSpectrum& s) { return to_array(s.f()); })
      .def_property_readonly("g", [](const LimitingSpectrum& s) { return to_array(s.g()); })
      .def_property_readonly("support",
                             [](const LimitingSpectrum& s) {
                               std::vector<std::pair<double, double>> out;
                               for (const auto& iv : s.support()) out.emplace_back(iv.lower, iv.upper);
                               return out;
                             })
      .def_property_readonly("atom0_mass", &LimitingSpectrum::atom0_mass)
      .def("total_mass", &LimitingSpectrum::total_mass)
      .def("first_moment", &LimitingSpectrum::first_moment)
      .def("companion", &LimitingSpectrum::companion, py::arg("z"))
      .def("__len__", &LimitingSpectrum::size);

  m.def(
      "build_spectrum",
      [](const PopulationSpectrum& h, double gamma, int grid_size) {
        return build_limiting_spectrum(h, AspectRatio(gamma), grid_size);
      },
      py::arg("population"), py::arg("gamma"), py::arg("grid_size") = 512,
      py::call_guard<py::gil_scoped_release>());

  py::class_<ShrinkageFunction>(m, "ShrinkageFunction")
      .def_static("ridge", &ShrinkageFunction::ridge, py::arg("lam"))
      .def_static("ridge_inverse", &ShrinkageFunction::ridge_inverse, py::arg("lam"))
      .def_static("gradient_flow", &ShrinkageFunction::gradient_flow, py::arg("t"), py::arg("lam"))
      .def_static("pseudo_inverse", &ShrinkageFunction::pseudo_inverse)
      .def_static("identity", &ShrinkageFunction::identity)
      .def_static("constant", &ShrinkageFunction::constant, py::arg("c"))
      .def_static("exponential", &ShrinkageFunction::exponential, py::arg("rate"))
      .def_static("polynomial", &ShrinkageFunction::polynomial, py::arg("coefficients"))
      .def("__call__", &ShrinkageFunction::operator(), py::arg("x"))
      .def("__call__", [](const ShrinkageFunction& h, py::array_t<double, py::array::c_style | py::array::forcecast> x) {
        py::array_t<double> out(x.request().shape);
        double* o = out.mutable_data();
        const double* d = x.data();
        for (py::ssize_t i = 0; i < x.size(); ++i) o[i] = h(d[i]);
        return out;
      })
      .def("scaled", &ShrinkageFunction::scaled, py::arg("c"))
      .def("values_on", [](const ShrinkageFunction& h, const LimitingSpectrum& s) {
        const auto v = h.sample(s);
        return py::make_tuple(to_array(v.values), v.at_zero);
      }, py::arg("spectrum"), "Values at the spectrum nodes and at zero.")
      .def_property_readonly("name", &ShrinkageFunction::name);

  m.def("m_functional", [](const LimitingSpectrum& s, const ShrinkageFunction& h) { return m_functional(s, h).value; },
        py::arg("spectrum"), py::arg("h"));
  m.def("t_functional", [](const LimitingSpectrum& s, const ShrinkageFunction& h) { return t_functional(s, h).value; },
        py::arg("spectrum"), py::arg("h"));
  m.def("two_resolvent_limit", &two_resolvent_limit, py::arg("spectrum"), py::arg("z1"), py::arg("z2"));
  m.def("lp_covariance_shrinker", &lp_covariance_shrinker, py::arg("spectrum"));
  m.def("lp_precision_shrinker", &lp_precision_shrinker, py::arg("spectrum"));

  m.def(
      "test_risk",
      [](double alpha, const LimitingSpectrum& s, const ShrinkageFunction& h) {
        const auto r = predicted_test_risk(regression_model(alpha, s), s, h);
        py::dict d;
        d["risk"] = r.risk;
        d["bias"] = r.bias;
        d["variance"] = r.variance;
        d["flagged"] = r.flagged;
        return d;
      },
      py::arg("alpha"), py::arg("spectrum"), py::arg("h"));
  m.def(
      "learning_curve",
      [](double alpha, const LimitingSpectrum& s, double lambda, const std::vector<double>& times) {
        return curve_dict(learning_curve(regression_model(alpha, s), s, lambda, times));
      },
      py::arg("alpha"), py::arg("spectrum"), py::arg("lam"), py::arg("times"));
  m.def(
      "identity_curve",
      [](double alpha, double gamma, const std::vector<double>& times) {
        return curve_dict(closed_form_identity_curve(alpha, AspectRatio(gamma), times));
      },
      py::arg("alpha"), py::arg("gamma"), py::arg("times"));
  m.def("gd_shrinkage", &gd_shrinkage, py::arg("t"), py::arg("lam"));

  m.def(
      "lda_error",
      [](double alpha, const LimitingSpectrum& s, const ShrinkageFunction& h) {
        const auto r = lda_theta(lda_model(alpha, s), s, h);
        py::dict d;
        d["theta"] = r.theta;
        d["error"] = r.error;
        d["degenerate"] = r.degenerate;
        return d;
      },
      py::arg("alpha"), py::arg("spectrum"), py::arg("h"));
  m.def(
      "optimal_shrinkage",
      [](double alpha, const LimitingSpectrum& s, int grid_size) {
        return qp_dict(optimal_shrinkage_qp(lda_model(alpha, s), s, grid_size));
      },
      py::arg("alpha"), py::arg("spectrum"), py::arg("grid_size") = 1024);
  m.def(
      "relaxed_optimum",
      [](double alpha, const LimitingSpectrum& s) { return qp_dict(relaxed_optimum(lda_model(alpha, s), s)); },
      py::arg("alpha"), py::arg("spectrum"));
  m.def(
      "mean_shrinker", [](double alpha, const LimitingSpectrum& s) { return mean_shrinker(lda_model(alpha, s), s); },
      py::arg("alpha"), py::arg("spectrum"));
  m.def(
      "compare_shrinkers",
      [](const LimitingSpectrum& s, const std::vector<double>& alphas, int grid_size) {
        py::list out;
        for (const auto& r : compare_shrinkers(s, alphas, grid_size)) {
          py::dict d;
          d["alpha"] = r.alpha;
          d["optimal"] = r.error_optimal;
          d["lp_cov"] = r.error_lp_cov;
          d["lp_prec"] = r.error_lp_prec;
          d["ridge_best"] = r.error_ridge_best;
          d["lambda_ridge_best"] = r.lambda_ridge_best;
          d["identity"] = r.error_identity;
          out.append(d);
        }
        return out;
      },
      py::arg("spectrum"), py::arg("alphas"), py::arg("grid_size") = 1024);
  m.def(
      "estimate_alpha2",
      [](double norm2, double trace, double n) { return estimate_alpha2(norm2, trace, n).value; },
      py::arg("delta_hat_norm2"), py::arg("trace_sample_cov"), py::arg("n"));

  m.def(
      "sample_eigenvalues",
      [](const PopulationSpectrum& h, int p, int n, std::uint64_t seed) {
        const auto sigma = CovarianceModel::diagonal_from_atoms(h, p);
        auto rng = replicate_engine(seed, 0);
        const auto s = sample_covariance_spectrum(
            sigma.sqrt_times(noise_matrix(rng, p, n, NoiseDistribution::gaussian)), false);
        return to_array(s.all_values());
      },
      py::arg("population"), py::arg("p"), py::arg("n"), py::arg("seed") = 0,
      "Eigenvalues (zeros included) of one sample covariance from a diagonal population.");
  m.def(
      "kernel_estimate",
      [](py::array_t<double, py::array::c_style | py::array::forcecast> eigenvalues, double gamma,
         std::optional<double> bandwidth) {
        const auto est = kernel_estimate_fg(
            std::span<const double>(eigenvalues.data(), static_cast<std::size_t>(eigenvalues.size())), gamma,
            bandwidth);
        py::dict d;
        d["x"] = to_array(est.x);
        d["f"] = to_array(est.f_hat);
        d["g"] = to_array(est.g_hat);
        d["bandwidth"] = est.bandwidth;
        return d;
      },
      py::arg("eigenvalues"), py::arg("gamma"), py::arg("bandwidth") = py::none());

  m.def("set_thread_count", &set_thread_count, py::arg("n"));
}
