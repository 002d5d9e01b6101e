#pragma once

#include <string>
#include <vector>

namespace shrinkage_lab {

class LimitingSpectrum;

/// Values of a shrinkage function on a spectrum's quadrature grid plus its
/// value at zero. This is what every functional actually integrates.
struct SampledFunction {
  std::vector<double> values;
  double at_zero = 0.0;

  SampledFunction& operator+=(const SampledFunction& other);
  SampledFunction& operator-=(const SampledFunction& other);
  SampledFunction& operator*=(double c);
};

SampledFunction operator+(SampledFunction a, const SampledFunction& b);
SampledFunction operator-(SampledFunction a, const SampledFunction& b);
SampledFunction operator*(double c, SampledFunction a);

/// Scalar map h applied to eigenvalues (or squared singular values) of a
/// sample covariance.
///
/// Closed-form families are evaluable anywhere on [0, inf). Grid-sampled
/// functions hold values on a spectrum grid and interpolate linearly
/// between nodes of the same support interval; outside the grid they take
/// the value of the nearest node.
class ShrinkageFunction {
 public:
  enum class Family {
    ridge,           ///< sqrt(x) / (x + lambda): ridge regression on singular values
    ridge_inverse,   ///< 1 / (x + lambda): regularized inverse covariance
    gradient_flow,   ///< (1 - exp(-t (x + lambda))) sqrt(x) / (x + lambda)
    pseudo_inverse,  ///< 1 / sqrt(x), zero at x = 0
    identity,        ///< x
    constant,        ///< c
    exponential,     ///< exp(-rate x)
    polynomial,      ///< sum_k c_k x^k
    grid,            ///< sampled on a spectrum grid
  };

  static ShrinkageFunction ridge(double lambda);
  static ShrinkageFunction ridge_inverse(double lambda);
  static ShrinkageFunction gradient_flow(double t, double lambda);
  static ShrinkageFunction pseudo_inverse();
  static ShrinkageFunction identity();
  static ShrinkageFunction constant(double c);
  static ShrinkageFunction exponential(double rate);
  static ShrinkageFunction polynomial(std::vector<double> coefficients);
  /// abscissae must be strictly increasing within each support interval
  /// and match `interval` (one entry per node).
  static ShrinkageFunction grid(std::vector<double> abscissae, std::vector<int> interval,
                                std::vector<double> values, double at_zero, std::string label);
  /// Grid function on the nodes of `spectrum`.
  static ShrinkageFunction on_grid(const LimitingSpectrum& spectrum, std::vector<double> values,
                                   double at_zero, std::string label);

  double operator()(double x) const;
  double at_zero() const { return (*this)(0.0); }

  Family family() const noexcept { return family_; }
  /// Family name, or the label of a grid function ("lp_covariance", ...).
  const std::string& name() const noexcept { return name_; }
  const std::vector<double>& parameters() const noexcept { return params_; }

  const std::vector<double>& grid_abscissae() const noexcept { return abscissae_; }
  const std::vector<double>& grid_values() const noexcept { return values_; }
  const std::vector<int>& grid_intervals() const noexcept { return interval_; }
  /// Multiplier applied by scaled(); 1 for a freshly built function.
  double scale() const noexcept { return scale_; }

  /// Values on the grid of `spectrum`. Grid functions defined on that same
  /// grid are copied without interpolation. Throws EvaluationError on a
  /// non-finite value. h(0) is evaluated only when gamma > 1 (otherwise the
  /// spectrum has no atom at zero and at_zero is set to 0).
  SampledFunction sample(const LimitingSpectrum& spectrum) const;

  ShrinkageFunction scaled(double c) const;

 private:
  ShrinkageFunction(Family family, std::string name, std::vector<double> params);

  Family family_;
  std::string name_;
  std::vector<double> params_;
  std::vector<double> abscissae_;
  std::vector<int> interval_;
  std::vector<double> values_;
  double scale_ = 1.0;
};

}  // namespace shrinkage_lab
