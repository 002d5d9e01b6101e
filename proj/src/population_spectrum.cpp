#include "shrinkage_lab/population_spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "shrinkage_lab/errors.hpp"

namespace shrinkage_lab {

PopulationSpectrum::PopulationSpectrum(std::vector<Atom> atoms) {
  if (atoms.empty()) throw ConfigError("population spectrum needs at least one atom");
  double total = 0.0;
  for (const auto& a : atoms) {
    if (!std::isfinite(a.location) || a.location < 0.0)
      throw ConfigError("atom location must be finite and nonnegative, got " +
                        std::to_string(a.location));
    if (!std::isfinite(a.weight) || a.weight <= 0.0)
      throw ConfigError("atom weight must be positive, got " + std::to_string(a.weight));
    total += a.weight;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw ConfigError("atom weights must sum to 1, got " + std::to_string(total));

  std::sort(atoms.begin(), atoms.end(),
            [](const Atom& a, const Atom& b) { return a.location < b.location; });
  for (const auto& a : atoms) {
    if (!atoms_.empty() && atoms_.back().location == a.location)
      atoms_.back().weight += a.weight;
    else
      atoms_.push_back(a);
  }
}

PopulationSpectrum PopulationSpectrum::point_mass(double location) {
  return PopulationSpectrum({{location, 1.0}});
}

PopulationSpectrum PopulationSpectrum::from_eigenvalues(std::span<const double> eigenvalues) {
  if (eigenvalues.empty()) throw ConfigError("no eigenvalues given");
  std::vector<double> sorted(eigenvalues.begin(), eigenvalues.end());
  std::sort(sorted.begin(), sorted.end());
  const double w = 1.0 / static_cast<double>(sorted.size());
  PopulationSpectrum h;
  for (double t : sorted) {
    if (!std::isfinite(t) || t < 0.0)
      throw ConfigError("eigenvalue must be finite and nonnegative, got " + std::to_string(t));
    if (!h.atoms_.empty() && h.atoms_.back().location == t)
      h.atoms_.back().weight += w;
    else
      h.atoms_.push_back({t, w});
  }
  return h;
}

double PopulationSpectrum::moment(int k) const {
  double s = 0.0;
  for (const auto& a : atoms_) s += a.weight * std::pow(a.location, k);
  return s;
}

PopulationSpectrum PopulationSpectrum::scaled(double c) const {
  if (!(c > 0.0)) throw ConfigError("scale factor must be positive");
  PopulationSpectrum h = *this;
  for (auto& a : h.atoms_) a.location *= c;
  return h;
}

AspectRatio::AspectRatio(double gamma) : gamma_(gamma) {
  if (!std::isfinite(gamma) || gamma <= 0.0)
    throw ConfigError("aspect ratio gamma must be positive, got " + std::to_string(gamma));
  if (std::abs(gamma - 1.0) < 1e-3)
    throw ConfigError("aspect ratio gamma = 1 is not supported (|gamma - 1| must be >= 1e-3)");
}

double AspectRatio::atom_at_zero() const noexcept {
  return std::max(1.0 - 1.0 / gamma_, 0.0);
}

}  // namespace shrinkage_lab
