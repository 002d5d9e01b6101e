#pragma once

#include <span>
#include <vector>

namespace shrinkage_lab {

/// One point mass of a population spectral measure.
struct Atom {
  double location;
  double weight;

  bool operator==(const Atom&) const = default;
};

/// Limiting eigenvalue distribution H of the population covariance,
/// stored as a finite list of atoms sorted by location.
///
/// Continuous limits (e.g. the AR(1) Toeplitz family) are represented by
/// the equally weighted eigenvalues of a finite-dimensional instance.
class PopulationSpectrum {
 public:
  /// Validates, sorts and merges atoms at identical locations.
  /// Throws ConfigError on negative locations, non-positive weights or
  /// weights that do not sum to one within 1e-12.
  explicit PopulationSpectrum(std::vector<Atom> atoms);

  static PopulationSpectrum point_mass(double location);
  /// Equal weights 1/k on each of the k given locations.
  static PopulationSpectrum from_eigenvalues(std::span<const double> eigenvalues);

  const std::vector<Atom>& atoms() const noexcept { return atoms_; }
  std::size_t size() const noexcept { return atoms_.size(); }

  /// \int t^k dH(t)
  double moment(int k) const;
  double min_location() const noexcept { return atoms_.front().location; }
  double max_location() const noexcept { return atoms_.back().location; }

  /// Pushforward under t -> c t.
  PopulationSpectrum scaled(double c) const;

  bool operator==(const PopulationSpectrum&) const = default;

 private:
  PopulationSpectrum() = default;
  std::vector<Atom> atoms_;
};

/// Ratio p/n of feature count to sample count. The value 1 is excluded.
class AspectRatio {
 public:
  /// Throws ConfigError unless gamma > 0 and |gamma - 1| >= 1e-3.
  explicit AspectRatio(double gamma);

  double value() const noexcept { return gamma_; }
  /// True when p > n, i.e. the sample covariance is singular.
  bool overparameterized() const noexcept { return gamma_ > 1.0; }
  /// Mass of the limiting spectrum at zero, max(1 - 1/gamma, 0).
  double atom_at_zero() const noexcept;

 private:
  double gamma_;
};

}  // namespace shrinkage_lab
