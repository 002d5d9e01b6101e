#pragma once

#include <optional>
#include <span>
#include <vector>

namespace shrinkage_lab {

/// Kernel estimates of the boundary values f, g from sample eigenvalues.
struct EmpiricalSpectrumEstimate {
  std::vector<double> x;
  std::vector<double> f_hat;
  std::vector<double> g_hat;
  double bandwidth = 0.0;
};

/// Epanechnikov density estimate of the nonzero eigenvalues (each carrying
/// mass 1/p, p = eigenvalues.size()) gives g_hat = gamma pi density; f_hat is
/// the real part of the companion transform, with the principal-value
/// integral of the kernel estimate taken in closed form and the zero
/// eigenvalues contributing their atom.
///
/// The default bandwidth is IQR * N^{-1/3} over the N nonzero eigenvalues.
/// Throws ConfigError for fewer than 100 nonzero eigenvalues or a
/// non-positive bandwidth.
EmpiricalSpectrumEstimate kernel_estimate_fg(std::span<const double> eigenvalues, double gamma,
                                             std::span<const double> grid,
                                             std::optional<double> bandwidth = std::nullopt);

/// Same on 512 equispaced points spanning the nonzero eigenvalues.
EmpiricalSpectrumEstimate kernel_estimate_fg(std::span<const double> eigenvalues, double gamma,
                                             std::optional<double> bandwidth = std::nullopt);

}  // namespace shrinkage_lab
