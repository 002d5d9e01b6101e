#include "shrinkage_lab/linalg.hpp"

#include <cblas.h>
#include <lapacke.h>

#include <vector>

#include "shrinkage_lab/errors.hpp"

namespace shrinkage_lab {

EigenSystem symmetric_eigen(const Eigen::MatrixXd& a, bool with_vectors) {
  const lapack_int n = static_cast<lapack_int>(a.rows());
  if (a.cols() != a.rows()) throw ConfigError("symmetric_eigen needs a square matrix");
  EigenSystem out;
  out.values.resize(n);
  if (n == 0) return out;
  Eigen::MatrixXd work = a;
  if (with_vectors) out.vectors.resize(n, n);
  std::vector<lapack_int> support(2 * static_cast<std::size_t>(n));
  lapack_int found = 0;
  const lapack_int info = LAPACKE_dsyevr(
      LAPACK_COL_MAJOR, with_vectors ? 'V' : 'N', 'A', 'L', n, work.data(), n, 0.0, 0.0, 0, 0,
      0.0, &found, out.values.data(), with_vectors ? out.vectors.data() : nullptr, n, support.data());
  if (info != 0 || found != n) throw ConvergenceError("dsyevr failed", static_cast<double>(info));
  return out;
}

Eigen::MatrixXd gram_rows(const Eigen::MatrixXd& a, double scale) {
  const int p = static_cast<int>(a.rows()), n = static_cast<int>(a.cols());
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(p, p);
  cblas_dsyrk(CblasColMajor, CblasLower, CblasNoTrans, p, n, 1.0 / scale, a.data(), p, 0.0,
              s.data(), p);
  s.triangularView<Eigen::StrictlyUpper>() = s.transpose();
  return s;
}

Eigen::MatrixXd gram_cols(const Eigen::MatrixXd& a, double scale) {
  const int p = static_cast<int>(a.rows()), n = static_cast<int>(a.cols());
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, n);
  cblas_dsyrk(CblasColMajor, CblasLower, CblasTrans, n, p, 1.0 / scale, a.data(), p, 0.0,
              s.data(), n);
  s.triangularView<Eigen::StrictlyUpper>() = s.transpose();
  return s;
}

Eigen::VectorXd SampleSpectrum::all_values() const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(p);
  out.tail(rank()) = values;
  return out;
}

SampleSpectrum sample_covariance_spectrum(const Eigen::MatrixXd& x, bool with_vectors) {
  SampleSpectrum out;
  out.p = static_cast<int>(x.rows());
  out.n = static_cast<int>(x.cols());
  const double n = out.n;
  const bool thin = out.p > out.n;
  EigenSystem es = symmetric_eigen(thin ? gram_cols(x, n) : gram_rows(x, n), with_vectors);
  const Eigen::Index size = es.values.size();
  const double cutoff = 1e-12 * std::max(es.values[size - 1], 0.0);
  Eigen::Index first = 0;
  while (first < size && es.values[first] <= cutoff) ++first;
  const Eigen::Index rank = size - first;
  out.values = es.values.tail(rank);
  if (with_vectors) {
    if (thin) {
      // u_i = X v_i / sqrt(n lambda_i)
      out.vectors = x * es.vectors.rightCols(rank);
      for (Eigen::Index i = 0; i < rank; ++i) out.vectors.col(i) /= std::sqrt(n * out.values[i]);
    } else {
      out.vectors = es.vectors.rightCols(rank);
    }
  }
  return out;
}

}  // namespace shrinkage_lab
