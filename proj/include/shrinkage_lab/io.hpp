#pragma once

#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#ifdef SHRINKAGE_LAB_VENDORED_JSON
#include <json.hpp>
#else
#include <nlohmann/json.hpp>
#endif

#include "shrinkage_lab/population_spectrum.hpp"
#include "shrinkage_lab/shrinkage_function.hpp"
#include "shrinkage_lab/spectrum.hpp"

namespace shrinkage_lab {

using Json = nlohmann::ordered_json;

/// Shortest decimal that reads back to the same double; '.' separator
/// regardless of locale.
std::string format_double(double v);

/// Column table written as CSV (comma separated, header row) or JSON.
class Table {
 public:
  using Cell = std::variant<double, std::string>;

  explicit Table(std::vector<std::string> columns);

  void add_row(std::vector<Cell> row);
  const std::vector<std::string>& columns() const noexcept { return columns_; }
  const std::vector<std::vector<Cell>>& rows() const noexcept { return rows_; }

  void write_csv(std::ostream& out) const;
  /// {"columns": [...], "rows": [[...], ...]}
  Json to_json() const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<Cell>> rows_;
};

/// {"atoms":[{"t":1.0,"w":0.5},...]}
Json to_json(const PopulationSpectrum& h);
PopulationSpectrum population_from_json(const Json& j);

/// {"family":"ridge","lambda":0.33} or {"grid":[...],"at_zero":v,"x":[...]}.
Json to_json(const ShrinkageFunction& h);
/// A grid without "x" is placed on the nodes of `spectrum` (which must then
/// be non-null and match in length). Throws ConfigError.
ShrinkageFunction shrinkage_from_json(const Json& j, const LimitingSpectrum* spectrum = nullptr);

}  // namespace shrinkage_lab
