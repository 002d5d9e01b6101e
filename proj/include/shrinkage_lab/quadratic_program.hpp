#pragma once

#include <Eigen/Dense>

namespace shrinkage_lab {

struct SimplexQpResult {
  Eigen::VectorXd solution;
  double objective = 0.0;
  /// Multiplier of the equality constraint.
  double multiplier = 0.0;
  /// Max KKT violation relative to the gradient scale.
  double kkt_residual = 0.0;
  /// Some bound v_i >= 0 holds with equality at the solution.
  bool bound_active = false;
  int iterations = 0;
};

/// Minimizes v' P v subject to c' v = 1 and v >= 0, for symmetric positive
/// definite P and strictly positive c, by a primal active-set method.
/// Throws ConfigError on bad input and ConvergenceError if the active set
/// does not settle.
SimplexQpResult solve_simplex_qp(const Eigen::MatrixXd& p, const Eigen::VectorXd& c);

/// Symmetrizes q and raises eigenvalues in (-1e-8 ||q||, 0) to zero.
/// Returns true if any eigenvalue was raised; throws DomainError when q is
/// indefinite beyond that tolerance.
bool floor_psd(Eigen::MatrixXd& q);

}  // namespace shrinkage_lab
