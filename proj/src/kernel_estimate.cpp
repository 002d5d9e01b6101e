#include "shrinkage_lab/kernel_estimate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "shrinkage_lab/errors.hpp"

namespace shrinkage_lab {

namespace {

std::vector<double> positive_sorted(std::span<const double> eigenvalues) {
  double top = 0.0;
  for (double v : eigenvalues) top = std::max(top, v);
  std::vector<double> out;
  for (double v : eigenvalues)
    if (v > 1e-12 * top) out.push_back(v);
  std::sort(out.begin(), out.end());
  return out;
}

double quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * (sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - lo) * (sorted[hi] - sorted[lo]);
}

// PV \int K(u) / (u - v) du for the Epanechnikov kernel on [-1, 1]
double epanechnikov_hilbert(double v) {
  const double a = std::abs(1.0 - v), b = std::abs(1.0 + v);
  const double log_term = (a == 0.0 || b == 0.0) ? 0.0 : (1.0 - v * v) * std::log(a / b);
  return 0.75 * (log_term - 2.0 * v);
}

}  // namespace

EmpiricalSpectrumEstimate kernel_estimate_fg(std::span<const double> eigenvalues, double gamma,
                                             std::span<const double> grid,
                                             std::optional<double> bandwidth) {
  const std::vector<double> lam = positive_sorted(eigenvalues);
  if (lam.size() < 100) throw ConfigError("kernel estimation needs at least 100 nonzero eigenvalues");
  if (!(gamma > 0.0)) throw ConfigError("gamma must be positive");
  const double p = static_cast<double>(eigenvalues.size());
  const double count = static_cast<double>(lam.size());
  const double h = bandwidth ? *bandwidth
                             : (quantile(lam, 0.75) - quantile(lam, 0.25)) * std::pow(count, -1.0 / 3.0);
  if (!(h > 0.0)) throw ConfigError("bandwidth must be positive");

  EmpiricalSpectrumEstimate out;
  out.bandwidth = h;
  out.x.assign(grid.begin(), grid.end());
  out.f_hat.resize(grid.size());
  out.g_hat.resize(grid.size());
  const double zero_mass = (p - count) / p;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double x = grid[k];
    double density = 0.0, pv = 0.0;
    for (double l : lam) {
      const double v = (x - l) / h;
      if (std::abs(v) < 1.0) density += 0.75 * (1.0 - v * v);
      pv += epanechnikov_hilbert(v);
    }
    density /= p * h;
    pv /= p * h;
    out.g_hat[k] = gamma * std::numbers::pi * density;
    // Re m(x) = PV \int dF(l) / (l - x), with the zero eigenvalues at l = 0
    const double re_m = pv - zero_mass / x;
    out.f_hat[k] = -(1.0 - gamma) / x + gamma * re_m;
  }
  return out;
}

EmpiricalSpectrumEstimate kernel_estimate_fg(std::span<const double> eigenvalues, double gamma,
                                             std::optional<double> bandwidth) {
  const std::vector<double> lam = positive_sorted(eigenvalues);
  if (lam.size() < 100) throw ConfigError("kernel estimation needs at least 100 nonzero eigenvalues");
  std::vector<double> grid(512);
  for (std::size_t k = 0; k < grid.size(); ++k)
    grid[k] = lam.front() + (lam.back() - lam.front()) * k / (grid.size() - 1);
  return kernel_estimate_fg(eigenvalues, gamma, grid, bandwidth);
}

}  // namespace shrinkage_lab
