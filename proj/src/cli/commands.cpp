#include <algorithm>
#include <cmath>
#include <memory>
#include <ostream>

#include "cli/cli.hpp"
#include "shrinkage_lab/errors.hpp"
#include "shrinkage_lab/functionals.hpp"
#include "shrinkage_lab/kernel_estimate.hpp"
#include "shrinkage_lab/lda.hpp"
#include "shrinkage_lab/linalg.hpp"
#include "shrinkage_lab/montecarlo.hpp"
#include "shrinkage_lab/parallel.hpp"
#include "shrinkage_lab/regression.hpp"
#include "shrinkage_lab/spectrum.hpp"

namespace shrinkage_lab::cli {

// ---------------------------------------------------------------- Params

Params::Params(Json given) : given_(std::move(given)) {
  if (!given_.is_object()) throw ConfigError("parameters must be a JSON object");
}

bool Params::has(const std::string& key) const { return given_.contains(key); }

const Json* Params::lookup(const std::string& key) {
  used_.insert(key);
  auto it = given_.find(key);
  return it == given_.end() ? nullptr : &*it;
}

namespace {

[[noreturn]] void missing(const std::string& key) {
  throw ConfigError("missing required parameter \"" + key + "\"");
}

[[noreturn]] void wrong_type(const std::string& key, const char* expected) {
  throw ConfigError("parameter \"" + key + "\" must be " + expected);
}

}  // namespace

double Params::real(const std::string& key, std::optional<double> fallback) {
  double v;
  if (const Json* j = lookup(key)) {
    if (!j->is_number()) wrong_type(key, "a number");
    v = j->get<double>();
  } else if (fallback) {
    v = *fallback;
  } else {
    missing(key);
  }
  if (!std::isfinite(v)) wrong_type(key, "finite");
  resolved_[key] = v;
  return v;
}

std::int64_t Params::integer(const std::string& key, std::optional<std::int64_t> fallback) {
  std::int64_t v;
  if (const Json* j = lookup(key)) {
    if (j->is_number_integer()) {
      v = j->get<std::int64_t>();
    } else if (j->is_number_float() && std::nearbyint(j->get<double>()) == j->get<double>() &&
               std::abs(j->get<double>()) < 9e15) {
      v = static_cast<std::int64_t>(j->get<double>());
    } else {
      wrong_type(key, "an integer");
    }
  } else if (fallback) {
    v = *fallback;
  } else {
    missing(key);
  }
  resolved_[key] = v;
  return v;
}

std::uint64_t Params::seed(const std::string& key, std::uint64_t fallback) {
  std::uint64_t v = fallback;
  if (const Json* j = lookup(key)) {
    if (j->is_number_unsigned())
      v = j->get<std::uint64_t>();
    else
      wrong_type(key, "a nonnegative integer");
  }
  resolved_[key] = v;
  return v;
}

bool Params::flag(const std::string& key, bool fallback) {
  bool v = fallback;
  if (const Json* j = lookup(key)) {
    if (!j->is_boolean()) wrong_type(key, "true or false");
    v = j->get<bool>();
  }
  resolved_[key] = v;
  return v;
}

std::string Params::text(const std::string& key, std::optional<std::string> fallback) {
  std::string v;
  if (const Json* j = lookup(key)) {
    if (!j->is_string()) wrong_type(key, "a string");
    v = j->get<std::string>();
  } else if (fallback) {
    v = *fallback;
  } else {
    missing(key);
  }
  resolved_[key] = v;
  return v;
}

std::vector<double> Params::reals(const std::string& key, std::optional<std::vector<double>> fallback) {
  std::vector<double> v;
  if (const Json* j = lookup(key)) {
    if (!j->is_array()) wrong_type(key, "an array of numbers");
    for (const auto& e : *j) {
      if (!e.is_number() || !std::isfinite(e.get<double>())) wrong_type(key, "an array of numbers");
      v.push_back(e.get<double>());
    }
  } else if (fallback) {
    v = *fallback;
  } else {
    missing(key);
  }
  resolved_[key] = v;
  return v;
}

Json Params::raw(const std::string& key, std::optional<Json> fallback) {
  Json v;
  if (const Json* j = lookup(key))
    v = *j;
  else if (fallback)
    v = *fallback;
  else
    missing(key);
  resolved_[key] = v;
  return v;
}

void Params::finish() const {
  for (const auto& [key, value] : given_.items())
    if (!used_.count(key)) throw ConfigError("unknown parameter \"" + key + "\"");
}

void Log::stage(const std::string& what) const {
  if (!quiet_) out_ << "shrinkage-lab: " << what << '\n' << std::flush;
}

// ---------------------------------------------------------------- helpers

namespace {

using Prepared = std::function<Artifact(const Log&)>;

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

double positive(Params& p, const std::string& key, std::optional<double> fallback = std::nullopt) {
  const double v = p.real(key, fallback);
  require(v > 0.0, "\"" + key + "\" must be positive");
  return v;
}

double nonnegative(Params& p, const std::string& key, std::optional<double> fallback = std::nullopt) {
  const double v = p.real(key, fallback);
  require(v >= 0.0, "\"" + key + "\" must be nonnegative");
  return v;
}

int count(Params& p, const std::string& key, std::optional<std::int64_t> fallback, std::int64_t lo,
          std::int64_t hi = 1'000'000) {
  const auto v = p.integer(key, fallback);
  require(v >= lo && v <= hi, "\"" + key + "\" must lie in [" + std::to_string(lo) + ", " +
                                  std::to_string(hi) + "]");
  return static_cast<int>(v);
}

AspectRatio aspect(double gamma) { return AspectRatio(gamma); }

/// "population": {"atoms": [...]} or {"toeplitz_rho": r, "dimension": p}.
/// Monte Carlo commands pass their p, which fills in a missing dimension.
struct PopulationInput {
  SigmaSpec sigma;
  PopulationSpectrum population;
};

PopulationInput population(Params& p, std::optional<int> dimension = std::nullopt) {
  Json j = p.raw("population");
  require(j.is_object(), "\"population\" must be an object");
  if (j.contains("atoms")) {
    require(j.size() == 1, "\"population\" with atoms takes no other keys");
    PopulationSpectrum h = population_from_json(j);
    return {h, h};
  }
  require(j.contains("toeplitz_rho") && j["toeplitz_rho"].is_number(),
          "\"population\" needs \"atoms\" or numeric \"toeplitz_rho\"");
  for (const auto& [key, value] : j.items())
    require(key == "toeplitz_rho" || key == "dimension",
            "unknown key \"" + key + "\" in \"population\"");
  const double rho = j["toeplitz_rho"].get<double>();
  require(rho > 0.0 && rho < 1.0, "\"toeplitz_rho\" must lie in (0, 1)");
  int dim = 0;
  if (j.contains("dimension")) {
    require(j["dimension"].is_number_integer() && j["dimension"].get<int>() >= 2,
            "\"dimension\" must be an integer >= 2");
    dim = j["dimension"].get<int>();
    require(!dimension || *dimension == dim, "population \"dimension\" must equal p");
  } else {
    require(dimension.has_value(), "a Toeplitz population needs \"dimension\"");
    dim = *dimension;
  }
  // record the dimension that was actually used
  p.record("population", {{"toeplitz_rho", rho}, {"dimension", dim}});
  return {ToeplitzAr{rho}, CovarianceModel::toeplitz_ar(rho, dim).population()};
}

std::vector<double> times(Params& p) {
  if (p.has("times")) {
    auto ts = p.reals("times");
    require(!ts.empty(), "\"times\" must not be empty");
    for (std::size_t i = 0; i < ts.size(); ++i)
      require(ts[i] >= 0.0 && (i == 0 || ts[i] > ts[i - 1]),
              "\"times\" must be nonnegative and strictly increasing");
    return ts;
  }
  const double lo = positive(p, "t_min", 1e-2);
  const double hi = positive(p, "t_max", 1e3);
  const int n = count(p, "t_count", 20, 2);
  require(hi > lo, "\"t_max\" must exceed \"t_min\"");
  return log_space(lo, hi, n);
}

NoiseDistribution noise(Params& p) {
  const std::string z = p.text("z_dist", "gaussian");
  if (z == "gaussian") return NoiseDistribution::gaussian;
  if (z == "rademacher") return NoiseDistribution::rademacher;
  throw ConfigError("\"z_dist\" must be \"gaussian\" or \"rademacher\"");
}

Table::Cell num(double v) { return v; }

Table::Cell label(std::string s) { return s; }

Json support_json(const LimitingSpectrum& s) {
  Json out = Json::array();
  for (const auto& iv : s.support()) out.push_back({iv.lower, iv.upper});
  return out;
}

// ---------------------------------------------------------------- spectrum

Prepared prepare_spectrum(Params& p) {
  const auto pop = population(p);
  const double gamma = p.real("gamma");
  const int grid = count(p, "grid_size", 512, 64, 20000);
  const AspectRatio ratio = aspect(gamma);
  return [=](const Log& log) {
    log.stage("solving the limiting spectrum");
    const auto s = build_limiting_spectrum(pop.population, ratio, grid);
    Artifact a{Table({"x", "density", "f", "g"})};
    for (std::size_t j = 0; j < s.size(); ++j)
      a.table.add_row({num(s.x()[j]), num(s.density()[j]), num(s.f()[j]), num(s.g()[j])});
    a.info = {{"support", support_json(s)},
              {"atom_at_zero", s.atom0_mass()},
              {"total_mass", s.total_mass()},
              {"first_moment", s.first_moment()}};
    if (ratio.overparameterized()) {
      a.info["companion_at_zero"] = s.m0();
      a.info["companion_slope_at_zero"] = s.m0_prime();
    }
    return a;
  };
}

// ---------------------------------------------------------------- regression

Prepared prepare_regression_curve(Params& p) {
  const int n_feat = count(p, "p", std::nullopt, 2, 8000);
  const int n_samp = count(p, "n", std::nullopt, 2, 8000);
  const auto pop = population(p, n_feat);
  const double alpha = nonnegative(p, "alpha");
  const double lambda = nonnegative(p, "lambda", 0.0);
  const auto ts = times(p);
  const int reps = count(p, "replicates", 50, 0, 100000);
  const std::uint64_t seed = p.seed("seed", 0);
  const NoiseDistribution z = noise(p);
  const int grid = count(p, "grid_size", 512, 64, 20000);
  const AspectRatio ratio = aspect(static_cast<double>(n_feat) / n_samp);
  ExperimentConfig cfg{n_feat, n_samp, alpha, pop.sigma, z, seed, std::max(reps, 1)};
  cfg.validate();
  return [=](const Log& log) {
    log.stage("solving the limiting spectrum");
    const auto s = build_limiting_spectrum(pop.population, ratio, grid);
    const RegressionModel model{alpha, ratio, pop.population};
    log.stage("evaluating the predicted learning curve");
    const LearningCurve curve = learning_curve(model, s, lambda, ts);
    std::vector<std::string> cols = {"t", "predicted_risk"};
    if (reps > 0) cols.insert(cols.end(), {"empirical_mean", "empirical_se"});
    cols.push_back("predicted_train");
    if (reps > 0) cols.insert(cols.end(), {"empirical_train_mean", "empirical_train_se"});
    Artifact a{Table(cols)};
    std::vector<std::vector<double>> risk(ts.size(), std::vector<double>(reps));
    std::vector<std::vector<double>> train = risk;
    if (reps > 0) {
      log.stage("simulating " + std::to_string(reps) + " replicates");
      const auto cov = CovarianceModel::from_spec(cfg.sigma, n_feat);
      parallel_for(reps, [&](std::size_t r) {
        const auto draw = generate_regression_draw(cfg, cov, static_cast<int>(r));
        for (std::size_t k = 0; k < ts.size(); ++k) {
          const auto out = empirical_regression_risk(draw, gd_shrinkage(ts[k], lambda), cov);
          risk[k][r] = out.test_risk;
          train[k][r] = out.train_error;
        }
      });
    }
    for (std::size_t k = 0; k < ts.size(); ++k) {
      std::vector<Table::Cell> row = {num(ts[k]), num(curve.test_risk[k])};
      if (reps > 0) {
        const Summary sm = summarize(risk[k]);
        row.insert(row.end(), {num(sm.mean), num(sm.se)});
      }
      row.push_back(num(curve.train_error[k]));
      if (reps > 0) {
        const Summary sm = summarize(train[k]);
        row.insert(row.end(), {num(sm.mean), num(sm.se)});
      }
      a.table.add_row(std::move(row));
    }
    a.info = {{"gamma", ratio.value()}, {"optimal_lambda", model.optimal_lambda()}};
    return a;
  };
}

std::vector<double> lambda_grid(Params& p) {
  if (p.has("lambdas")) {
    auto ls = p.reals("lambdas");
    require(!ls.empty(), "\"lambdas\" must not be empty");
    for (double l : ls) require(l >= 0.0, "\"lambdas\" must be nonnegative");
    return ls;
  }
  const double lo = positive(p, "lambda_min", 1e-2);
  const double hi = positive(p, "lambda_max", 1e2);
  const int n = count(p, "lambda_count", 20, 2);
  require(hi > lo, "\"lambda_max\" must exceed \"lambda_min\"");
  return log_space(lo, hi, n);
}

Prepared prepare_risk_surface(Params& p) {
  const auto pop = population(p);
  const AspectRatio ratio = aspect(p.real("gamma"));
  const double alpha = nonnegative(p, "alpha");
  const auto ls = lambda_grid(p);
  const auto ts = times(p);
  const int grid = count(p, "grid_size", 512, 64, 20000);
  return [=](const Log& log) {
    log.stage("solving the limiting spectrum");
    const auto s = build_limiting_spectrum(pop.population, ratio, grid);
    const RegressionModel model{alpha, ratio, pop.population};
    log.stage("evaluating " + std::to_string(ls.size() * ts.size()) + " surface points");
    std::vector<std::vector<double>> risk(ls.size(), std::vector<double>(ts.size()));
    parallel_for(ls.size(), [&](std::size_t i) {
      for (std::size_t k = 0; k < ts.size(); ++k)
        risk[i][k] = predicted_test_risk(model, s, gd_shrinkage(ts[k], ls[i])).risk;
    });
    Artifact a{Table({"t", "lambda", "risk"})};
    for (std::size_t i = 0; i < ls.size(); ++i)
      for (std::size_t k = 0; k < ts.size(); ++k)
        a.table.add_row({num(ts[k]), num(ls[i]), num(risk[i][k])});
    a.info = {{"optimal_lambda", model.optimal_lambda()}};
    return a;
  };
}

Prepared prepare_training_curve(Params& p) {
  const std::string mode = p.text("mode", "curve");
  require(mode == "curve" || mode == "closed-form" || mode == "early-stopping",
          "\"mode\" must be \"curve\", \"closed-form\" or \"early-stopping\"");
  const double gamma = p.real("gamma");
  const AspectRatio ratio = aspect(gamma);
  const double alpha = nonnegative(p, "alpha");
  if (mode == "closed-form") {
    // identity population, no ridge penalty
    const auto ts = times(p);
    return [=](const Log& log) {
      log.stage("evaluating the closed-form identity curve");
      const auto c = closed_form_identity_curve(alpha, ratio, ts);
      Artifact a{Table({"t", "test_risk"})};
      for (std::size_t k = 0; k < ts.size(); ++k) a.table.add_row({num(ts[k]), num(c.test_risk[k])});
      return a;
    };
  }
  const auto pop = population(p);
  const int grid = count(p, "grid_size", 512, 64, 20000);
  if (mode == "early-stopping") {
    const auto ls = lambda_grid(p);
    const double t_lo = positive(p, "t_min", 1e-2);
    const double t_hi = positive(p, "t_max", 1e3);
    require(t_hi > t_lo, "\"t_max\" must exceed \"t_min\"");
    return [=](const Log& log) {
      log.stage("solving the limiting spectrum");
      const auto s = build_limiting_spectrum(pop.population, ratio, grid);
      const RegressionModel model{alpha, ratio, pop.population};
      log.stage("searching stopping times");
      std::vector<StoppingPoint> stops(ls.size());
      std::vector<double> full(ls.size());
      parallel_for(ls.size(), [&](std::size_t i) {
        stops[i] = optimal_stopping_time(model, s, ls[i], t_lo, t_hi);
        full[i] = predicted_test_risk(model, s, ShrinkageFunction::ridge(ls[i])).risk;
      });
      Artifact a{Table({"lambda", "full_risk", "stopping_time", "stopped_risk"})};
      for (std::size_t i = 0; i < ls.size(); ++i)
        a.table.add_row({num(ls[i]), num(full[i]), num(stops[i].time), num(stops[i].risk)});
      a.info = {{"optimal_lambda", model.optimal_lambda()}};
      return a;
    };
  }
  const double lambda = nonnegative(p, "lambda", 0.0);
  const auto ts = times(p);
  return [=](const Log& log) {
    log.stage("solving the limiting spectrum");
    const auto s = build_limiting_spectrum(pop.population, ratio, grid);
    const RegressionModel model{alpha, ratio, pop.population};
    log.stage("evaluating the learning curve");
    const auto c = learning_curve(model, s, lambda, ts);
    Artifact a{Table({"t", "test_risk", "train_error"})};
    for (std::size_t k = 0; k < ts.size(); ++k)
      a.table.add_row({num(ts[k]), num(c.test_risk[k]), num(c.train_error[k])});
    a.info = {{"optimal_lambda", model.optimal_lambda()}};
    return a;
  };
}

// ---------------------------------------------------------------- lda

std::vector<double> alpha_grid(Params& p) {
  if (p.has("alphas")) {
    auto as = p.reals("alphas");
    require(!as.empty(), "\"alphas\" must not be empty");
    for (double a : as) require(a > 0.0, "\"alphas\" must be positive");
    return as;
  }
  const double lo = positive(p, "alpha_min", 0.5);
  const double hi = positive(p, "alpha_max", 4.0);
  const int n = count(p, "alpha_count", 8, 2);
  require(hi > lo, "\"alpha_max\" must exceed \"alpha_min\"");
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = lo + (hi - lo) * i / (n - 1);
  return out;
}

// a named rule or a JSON shrinkage function; the named ones depend on the
// spectrum (and "optimal" / "mean" on alpha too)
struct ShrinkerChoice {
  std::string keyword;
  Json function;
};

ShrinkerChoice shrinker(Params& p, const Json& fallback, bool allow_alpha_dependent) {
  const Json j = p.raw("shrinker", fallback);
  if (j.is_string()) {
    const std::string k = j.get<std::string>();
    const bool known = k == "lp_covariance" || k == "lp_precision" || k == "identity" ||
                       (allow_alpha_dependent && (k == "optimal" || k == "mean"));
    require(known, "unknown shrinker \"" + k + "\"");
    return {k, {}};
  }
  // parse once now so bad input is a config error before any work
  if (!(j.contains("grid") && !j.contains("x"))) shrinkage_from_json(j);
  return {"", j};
}

ShrinkageFunction resolve_shrinker(const ShrinkerChoice& c, const LimitingSpectrum& s,
                                   const LdaCalculator* calc, double alpha, int qp_grid) {
  if (c.keyword.empty()) return shrinkage_from_json(c.function, &s);
  if (c.keyword == "lp_covariance") return lp_covariance_precision(s);
  if (c.keyword == "lp_precision") return lp_precision_shrinker(s);
  if (c.keyword == "identity") return ShrinkageFunction::ridge_inverse(0.0);
  const LdaModel model{alpha, s.aspect_ratio(), s.population()};
  if (c.keyword == "mean") return mean_shrinker(model, s);
  return optimal_shrinkage_qp(model, *calc, qp_grid).h_opt;
}

Prepared prepare_lda_error(Params& p) {
  const bool simulate = p.has("p") || p.has("n");
  std::optional<int> n_feat, n_samp;
  if (simulate) {
    n_feat = count(p, "p", std::nullopt, 2, 8000);
    n_samp = count(p, "n", std::nullopt, 2, 8000);
    require(*n_samp % 2 == 0, "\"n\" must be even (two equal classes)");
  }
  const auto pop = population(p, n_feat);
  const double gamma = simulate ? static_cast<double>(*n_feat) / *n_samp : p.real("gamma");
  const AspectRatio ratio = aspect(gamma);
  const auto alphas = alpha_grid(p);
  const auto choice = shrinker(p, Json{{"family", "ridge_inverse"}, {"lambda", 1.0}}, true);
  const int grid = count(p, "grid_size", 512, 64, 20000);
  const int qp_grid = count(p, "qp_grid", 1024, 32, 20000);
  int reps = 0;
  ExperimentConfig cfg;
  if (simulate) {
    reps = count(p, "replicates", 50, 1, 100000);
    cfg = ExperimentConfig{*n_feat, *n_samp, alphas.front(), pop.sigma, NoiseDistribution::gaussian,
                           p.seed("seed", 0), reps};
    cfg.validate();
  }
  return [=](const Log& log) {
    log.stage("solving the limiting spectrum");
    const auto s = build_limiting_spectrum(pop.population, ratio, grid);
    log.stage("assembling trace functionals");
    const LdaCalculator calc(s);
    std::vector<ShrinkageFunction> hs;
    std::vector<LdaErrorReport> reports;
    for (double alpha : alphas) {
      hs.push_back(resolve_shrinker(choice, s, &calc, alpha, qp_grid));
      reports.push_back(calc.theta(alpha, hs.back()));
    }
    std::vector<std::string> cols = {"alpha", "theta", "error"};
    if (simulate) cols.insert(cols.end(), {"empirical_mean", "empirical_se"});
    Artifact a{Table(cols)};
    std::vector<std::vector<double>> err(alphas.size(), std::vector<double>(reps));
    if (simulate) {
      log.stage("simulating " + std::to_string(reps) + " replicates");
      const auto cov = CovarianceModel::from_spec(cfg.sigma, cfg.p);
      parallel_for(reps, [&](std::size_t r) {
        const auto draw = generate_lda_draw(cfg, cov, static_cast<int>(r));
        for (std::size_t i = 0; i < alphas.size(); ++i)
          err[i][r] = empirical_lda_error(draw.with_alpha(alphas[i]), hs[i], cov).error;
      });
    }
    for (std::size_t i = 0; i < alphas.size(); ++i) {
      std::vector<Table::Cell> row = {num(alphas[i]), num(reports[i].theta), num(reports[i].error)};
      if (simulate) {
        const Summary sm = summarize(err[i]);
        row.insert(row.end(), {num(sm.mean), num(sm.se)});
      }
      a.table.add_row(std::move(row));
    }
    return a;
  };
}

Prepared prepare_optimal_shrinkage(Params& p) {
  const auto pop = population(p);
  const double gamma = p.real("gamma");
  const AspectRatio ratio = aspect(gamma);
  const double alpha = positive(p, "alpha");
  const int grid = count(p, "grid_size", 512, 64, 20000);
  const int qp_grid = count(p, "qp_grid", 1024, 32, 20000);
  const bool relaxed = p.flag("relaxed", false);
  require(!relaxed || gamma < 1.0, "the relaxed optimum needs gamma < 1");
  return [=](const Log& log) {
    log.stage("solving the limiting spectrum");
    const auto s = build_limiting_spectrum(pop.population, ratio, grid);
    const LdaCalculator calc(s);
    const LdaModel model{alpha, ratio, pop.population};
    log.stage("solving the shrinkage program");
    const QpSolution opt = optimal_shrinkage_qp(model, calc, qp_grid);
    std::optional<QpSolution> rel;
    if (relaxed) {
      log.stage("solving the relaxation");
      rel = relaxed_optimum(model, s);
    }
    std::vector<std::string> cols = {"x", "h_opt"};
    if (rel) cols.push_back("h_relaxed");
    Artifact a{Table(cols)};
    for (std::size_t j = 0; j < s.size(); ++j) {
      const double x = s.x()[j];
      std::vector<Table::Cell> row = {num(x), num(opt.h_opt(x))};
      if (rel) row.push_back(num(rel->h_opt(x)));
      a.table.add_row(std::move(row));
    }
    const auto report = calc.theta(alpha, opt.h_opt);
    a.info = {{"objective", opt.objective},     {"kkt_residual", opt.kkt_residual},
              {"bound_active", opt.bound_active}, {"regularized", opt.regularized},
              {"theta", report.theta},          {"error", report.error}};
    if (ratio.overparameterized()) a.info["h_opt_at_zero"] = opt.h_opt.at_zero();
    if (rel && rel->relaxation_fit)
      a.info["relaxation"] = {{"A", rel->relaxation_fit->a},
                              {"B", rel->relaxation_fit->b},
                              {"residual", rel->relaxation_fit->residual}};
    return a;
  };
}

Prepared prepare_compare_shrinkers(Params& p) {
  const auto pop = population(p);
  const double gamma = p.real("gamma");
  require(gamma < 1.0, "the shrinker comparison needs gamma < 1");
  const AspectRatio ratio = aspect(gamma);
  const auto alphas = alpha_grid(p);
  const int grid = count(p, "grid_size", 512, 64, 20000);
  const int qp_grid = count(p, "qp_grid", 1024, 32, 20000);
  return [=](const Log& log) {
    log.stage("solving the limiting spectrum");
    const auto s = build_limiting_spectrum(pop.population, ratio, grid);
    log.stage("comparing shrinkers over " + std::to_string(alphas.size()) + " alphas");
    const auto rows = compare_shrinkers(s, alphas, qp_grid);
    Artifact a{Table({"alpha", "error_optimal", "error_lp_cov", "error_lp_prec", "error_ridge_best",
                      "error_identity", "lambda_ridge_best"})};
    for (const auto& r : rows)
      a.table.add_row({num(r.alpha), num(r.error_optimal), num(r.error_lp_cov),
                       num(r.error_lp_prec), num(r.error_ridge_best), num(r.error_identity),
                       num(r.lambda_ridge_best)});
    return a;
  };
}

// ---------------------------------------------------------------- montecarlo

// p^{-1} ||Sigma - h(S)||_F^2 in the limit: \int t^2 dH - 2 M(h) + \int h^2 dF
double frobenius_limit(const LimitingSpectrum& s, const ShrinkageFunction& h) {
  const SampledFunction v = h.sample(s);
  const auto w = s.measure_weights();
  double sq = s.atom0_mass() * v.at_zero * v.at_zero;
  for (std::size_t j = 0; j < v.values.size(); ++j) sq += w[j] * v.values[j] * v.values[j];
  return s.population().moment(2) - 2.0 * m_functional(s, h).value + sq;
}

Prepared prepare_simulate(Params& p) {
  const int n_feat = count(p, "p", std::nullopt, 2, 8000);
  const int n_samp = count(p, "n", std::nullopt, 2, 8000);
  const auto pop = population(p, n_feat);
  const Json fallback = Json::array({Json{{"family", "ridge_inverse"}, {"lambda", 1.0}},
                                     Json{{"family", "identity"}},
                                     Json{{"family", "exponential"}, {"rate", 1.0}}});
  const Json list = p.raw("shrinkers", fallback);
  require(list.is_array() && !list.empty(), "\"shrinkers\" must be a non-empty array");
  std::vector<ShrinkageFunction> hs;
  std::vector<std::string> names;
  for (const auto& j : list) {
    hs.push_back(shrinkage_from_json(j));
    names.push_back(j.is_object() && j.contains("family") ? j["family"].get<std::string>() : "grid");
    if (j.contains("lambda")) names.back() += "(" + format_double(j["lambda"].get<double>()) + ")";
    if (j.contains("rate")) names.back() += "(" + format_double(j["rate"].get<double>()) + ")";
    if (j.contains("c")) names.back() += "(" + format_double(j["c"].get<double>()) + ")";
  }
  const int reps = count(p, "replicates", 20, 1, 100000);
  ExperimentConfig cfg{n_feat, n_samp, 0.0, pop.sigma, noise(p), p.seed("seed", 0), reps};
  cfg.validate();
  const bool limit = p.flag("limit", true);
  const int grid = count(p, "grid_size", 512, 64, 20000);
  const AspectRatio ratio = aspect(cfg.gamma());
  return [=](const Log& log) {
    const auto cov = CovarianceModel::from_spec(cfg.sigma, n_feat);
    const std::size_t k = hs.size();
    std::vector<double> m(reps * k), t(reps * k), fro(reps * k);
    log.stage("simulating " + std::to_string(reps) + " replicates");
    parallel_for(reps, [&](std::size_t r) {
      auto rng = replicate_engine(cfg.seed, static_cast<int>(r));
      const Eigen::MatrixXd z = noise_matrix(rng, n_feat, n_samp, cfg.z_dist);
      const auto spec = sample_covariance_spectrum(cov.sqrt_times(z), true);
      const TraceSample traces(spec, cov);
      for (std::size_t i = 0; i < k; ++i) {
        m[r * k + i] = traces.m(hs[i]);
        t[r * k + i] = traces.t(hs[i]);
        fro[r * k + i] = empirical_frobenius_loss(spec, hs[i], cov);
      }
    });
    Artifact a{Table({"row", "shrinker", "m_trace", "t_trace", "frobenius_loss"})};
    for (int r = 0; r < reps; ++r)
      for (std::size_t i = 0; i < k; ++i)
        a.table.add_row({label(std::to_string(r)), label(names[i]), num(m[r * k + i]),
                         num(t[r * k + i]), num(fro[r * k + i])});
    auto column = [&](const std::vector<double>& all, std::size_t i) {
      std::vector<double> v(reps);
      for (int r = 0; r < reps; ++r) v[r] = all[r * k + i];
      return summarize(v);
    };
    for (std::size_t i = 0; i < k; ++i) {
      const Summary sm = column(m, i), st = column(t, i), sf = column(fro, i);
      a.table.add_row({label("mean"), label(names[i]), num(sm.mean), num(st.mean), num(sf.mean)});
      a.table.add_row({label("se"), label(names[i]), num(sm.se), num(st.se), num(sf.se)});
    }
    if (limit) {
      log.stage("evaluating the limiting functionals");
      const auto s = build_limiting_spectrum(pop.population, ratio, grid);
      for (std::size_t i = 0; i < k; ++i)
        a.table.add_row({label("limit"), label(names[i]), num(m_functional(s, hs[i]).value),
                         num(t_functional(s, hs[i]).value), num(frobenius_limit(s, hs[i]))});
    }
    return a;
  };
}

Prepared prepare_estimate_spectrum(Params& p) {
  std::vector<double> eig;
  double gamma;
  std::optional<PopulationInput> pop;
  ExperimentConfig cfg;
  if (p.has("eigenvalues")) {
    eig = p.reals("eigenvalues");
    gamma = positive(p, "gamma");
  } else {
    const int n_feat = count(p, "p", std::nullopt, 2, 8000);
    const int n_samp = count(p, "n", std::nullopt, 2, 8000);
    pop = population(p, n_feat);
    cfg = ExperimentConfig{n_feat, n_samp, 0.0, pop->sigma, noise(p), p.seed("seed", 0), 1};
    cfg.validate();
    gamma = cfg.gamma();
  }
  std::optional<double> bw;
  if (p.has("bandwidth")) bw = positive(p, "bandwidth");
  const int points = count(p, "points", 512, 2, 100000);
  return [=](const Log& log) {
    std::vector<double> values = eig;
    if (pop) {
      log.stage("drawing one sample covariance");
      const auto cov = CovarianceModel::from_spec(cfg.sigma, cfg.p);
      auto rng = replicate_engine(cfg.seed, 0);
      const Eigen::MatrixXd z = noise_matrix(rng, cfg.p, cfg.n, cfg.z_dist);
      const Eigen::VectorXd all = sample_covariance_spectrum(cov.sqrt_times(z), false).all_values();
      values.assign(all.data(), all.data() + all.size());
    }
    log.stage("kernel estimation");
    std::vector<double> nonzero;
    for (double v : values)
      if (v > 0.0) nonzero.push_back(v);
    if (nonzero.empty()) throw ConfigError("no positive eigenvalues");
    const auto [lo, hi] = std::minmax_element(nonzero.begin(), nonzero.end());
    std::vector<double> xs(points);
    for (int i = 0; i < points; ++i) xs[i] = *lo + (*hi - *lo) * (i + 0.5) / points;
    const auto est = kernel_estimate_fg(values, gamma, xs, bw);
    Artifact a{Table({"x", "f_hat", "g_hat", "density_hat"})};
    const double pi = std::acos(-1.0);
    for (std::size_t i = 0; i < est.x.size(); ++i)
      a.table.add_row({num(est.x[i]), num(est.f_hat[i]), num(est.g_hat[i]),
                       num(est.g_hat[i] / (gamma * pi))});
    a.info = {{"bandwidth", est.bandwidth}, {"gamma", gamma}};
    return a;
  };
}

}  // namespace

const std::vector<Command>& commands() {
  static const std::vector<Command> all = {
      {"spectrum", "limiting sample spectrum: density, f and g on the quadrature grid",
       prepare_spectrum},
      {"regression-curve", "predicted vs simulated gradient-flow learning curve",
       prepare_regression_curve},
      {"risk-surface", "predicted risk over a (t, lambda) grid", prepare_risk_surface},
      {"training-curve", "predicted test risk and training error over t (also closed-form and early-stopping modes)",
       prepare_training_curve},
      {"lda-error", "asymptotic (and optionally simulated) LDA error of one shrinker over alpha",
       prepare_lda_error},
      {"optimal-shrinkage", "optimal LDA shrinker from the quadratic program", prepare_optimal_shrinkage},
      {"compare-shrinkers", "LDA error of the optimal, covariance, precision, ridge and identity rules",
       prepare_compare_shrinkers},
      {"simulate", "Monte Carlo trace functionals and Frobenius losses", prepare_simulate},
      {"estimate-spectrum", "kernel estimate of f and g from sample eigenvalues",
       prepare_estimate_spectrum},
  };
  return all;
}

}  // namespace shrinkage_lab::cli
