#include "shrinkage_lab/quadratic_program.hpp"

#include <cmath>
#include <vector>

#include "shrinkage_lab/errors.hpp"

namespace shrinkage_lab {

namespace {

// minimizer of y' P_FF y subject to c_F' y = 1, and its multiplier 2 / (c' P^{-1} c)
struct Subproblem {
  Eigen::VectorXd y;
  double mu;
};

Subproblem solve_free(const Eigen::MatrixXd& p, const Eigen::VectorXd& c,
                      const std::vector<Eigen::Index>& free) {
  const Eigen::Index k = static_cast<Eigen::Index>(free.size());
  Eigen::MatrixXd pf(k, k);
  Eigen::VectorXd cf(k);
  for (Eigen::Index a = 0; a < k; ++a) {
    cf[a] = c[free[a]];
    for (Eigen::Index b = 0; b < k; ++b) pf(a, b) = p(free[a], free[b]);
  }
  Eigen::LLT<Eigen::MatrixXd> llt(pf);
  if (llt.info() != Eigen::Success) {
    const double jitter = 1e-13 * pf.diagonal().cwiseAbs().maxCoeff();
    pf.diagonal().array() += jitter;
    llt.compute(pf);
    if (llt.info() != Eigen::Success) throw DomainError("QP matrix is not positive definite");
  }
  const Eigen::VectorXd z = llt.solve(cf);
  const double denom = cf.dot(z);
  return {z / denom, 2.0 / denom};
}

}  // namespace

SimplexQpResult solve_simplex_qp(const Eigen::MatrixXd& p, const Eigen::VectorXd& c) {
  const Eigen::Index n = c.size();
  if (n == 0 || p.rows() != n || p.cols() != n) throw ConfigError("QP dimensions do not match");
  if ((c.array() <= 0.0).any()) throw ConfigError("QP constraint weights must be positive");

  std::vector<bool> fixed(static_cast<std::size_t>(n), false);
  Eigen::VectorXd v = Eigen::VectorXd::Constant(n, 1.0 / c.sum());
  double mu = 0.0;
  SimplexQpResult out;
  const int max_iter = 10 * static_cast<int>(n) + 50;
  bool done = false;
  for (int it = 0; it < max_iter && !done; ++it) {
    out.iterations = it + 1;
    std::vector<Eigen::Index> free;
    for (Eigen::Index i = 0; i < n; ++i)
      if (!fixed[i]) free.push_back(i);
    const Subproblem sub = solve_free(p, c, free);

    double step = 1.0;
    Eigen::Index blocking = -1;
    for (std::size_t a = 0; a < free.size(); ++a) {
      const Eigen::Index i = free[a];
      if (sub.y[a] < 0.0) {
        const double s = v[i] / (v[i] - sub.y[a]);
        if (s < step) {
          step = s;
          blocking = i;
        }
      }
    }
    for (std::size_t a = 0; a < free.size(); ++a) {
      const Eigen::Index i = free[a];
      v[i] += step * (sub.y[a] - v[i]);
    }
    if (blocking >= 0) {
      v[blocking] = 0.0;
      fixed[blocking] = true;
      continue;
    }
    mu = sub.mu;
    // release the bound with the most negative multiplier, if any
    const Eigen::VectorXd grad = 2.0 * (p * v) - mu * c;
    const double tol = 1e-12 * (std::abs(mu) * c.maxCoeff());
    Eigen::Index release = -1;
    double worst = -tol;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (fixed[i] && grad[i] < worst) {
        worst = grad[i];
        release = i;
      }
    }
    if (release < 0) {
      done = true;
    } else {
      fixed[release] = false;
    }
  }
  if (!done) throw ConvergenceError("active-set QP did not settle", 0.0);

  const Eigen::VectorXd pv = p * v;
  const Eigen::VectorXd grad = 2.0 * pv - mu * c;
  double viol = std::abs(c.dot(v) - 1.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    viol = std::max(viol, std::max(-v[i], 0.0));
    viol = std::max(viol, fixed[i] ? std::max(-grad[i], 0.0) : std::abs(grad[i]));
    if (fixed[i]) out.bound_active = true;
  }
  const double scale = std::max(2.0 * pv.cwiseAbs().maxCoeff(), std::abs(mu) * c.maxCoeff());
  out.solution = v;
  out.objective = v.dot(pv);
  out.multiplier = mu;
  out.kkt_residual = scale > 0.0 ? viol / scale : viol;
  return out;
}

bool floor_psd(Eigen::MatrixXd& q) {
  q = 0.5 * (q + q.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(q);
  if (es.info() != Eigen::Success) throw DomainError("eigen-decomposition of the QP matrix failed");
  const Eigen::VectorXd ev = es.eigenvalues();
  const double norm = ev.cwiseAbs().maxCoeff();
  if (ev.minCoeff() >= 0.0) return false;
  if (ev.minCoeff() < -1e-8 * norm)
    throw DomainError("quadratic form is indefinite beyond quadrature tolerance");
  q = es.eigenvectors() * ev.cwiseMax(0.0).asDiagonal() * es.eigenvectors().transpose();
  q = 0.5 * (q + q.transpose()).eval();
  return true;
}

}  // namespace shrinkage_lab
