#include "shrinkage_lab/io.hpp"

#include <charconv>
#include <cmath>
#include <ostream>

#include "shrinkage_lab/errors.hpp"

namespace shrinkage_lab {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

Table::Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

void Table::add_row(std::vector<Cell> row) {
  if (row.size() != columns_.size()) throw Error("table row does not match the header");
  rows_.push_back(std::move(row));
}

void Table::write_csv(std::ostream& out) const {
  for (std::size_t c = 0; c < columns_.size(); ++c) out << (c ? "," : "") << columns_[c];
  out << '\n';
  for (const auto& row : rows_) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out << ',';
      if (const auto* d = std::get_if<double>(&row[c]))
        out << format_double(*d);
      else
        out << std::get<std::string>(row[c]);
    }
    out << '\n';
  }
}

Json Table::to_json() const {
  Json rows = Json::array();
  for (const auto& row : rows_) {
    Json r = Json::array();
    for (const auto& cell : row) {
      if (const auto* d = std::get_if<double>(&cell)) {
        if (std::isfinite(*d))
          r.push_back(*d);
        else
          r.push_back(format_double(*d));
      } else {
        r.push_back(std::get<std::string>(cell));
      }
    }
    rows.push_back(std::move(r));
  }
  return Json{{"columns", columns_}, {"rows", std::move(rows)}};
}

Json to_json(const PopulationSpectrum& h) {
  Json atoms = Json::array();
  for (const Atom& a : h.atoms()) atoms.push_back(Json{{"t", a.location}, {"w", a.weight}});
  return Json{{"atoms", std::move(atoms)}};
}

PopulationSpectrum population_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("atoms") || !j["atoms"].is_array())
    throw ConfigError("population spectrum must be an object with an \"atoms\" array");
  std::vector<Atom> atoms;
  for (const auto& a : j["atoms"]) {
    if (!a.is_object() || !a.contains("t") || !a.contains("w") || !a["t"].is_number() ||
        !a["w"].is_number())
      throw ConfigError("each atom needs numeric \"t\" and \"w\"");
    atoms.push_back({a["t"].get<double>(), a["w"].get<double>()});
  }
  if (atoms.empty()) throw ConfigError("population spectrum needs at least one atom");
  return PopulationSpectrum(std::move(atoms));
}

namespace {

Json closed_form_json(const ShrinkageFunction& h) {
  using F = ShrinkageFunction::Family;
  const auto& p = h.parameters();
  switch (h.family()) {
    case F::ridge:
      return {{"family", "ridge"}, {"lambda", p[0]}};
    case F::ridge_inverse:
      return {{"family", "ridge_inverse"}, {"lambda", p[0]}};
    case F::gradient_flow:
      return {{"family", "gradient_flow"}, {"t", p[0]}, {"lambda", p[1]}};
    case F::pseudo_inverse:
      return {{"family", "pseudo_inverse"}};
    case F::identity:
      return {{"family", "identity"}};
    case F::constant:
      return {{"family", "constant"}, {"c", p[0]}};
    case F::exponential:
      return {{"family", "exponential"}, {"rate", p[0]}};
    case F::polynomial:
      return {{"family", "polynomial"}, {"coefficients", p}};
    case F::grid:
      break;
  }
  throw Error("unknown shrinkage family");
}

}  // namespace

Json to_json(const ShrinkageFunction& h) {
  if (h.family() == ShrinkageFunction::Family::grid) {
    // the scale is folded into the values
    std::vector<double> values;
    for (double x : h.grid_abscissae()) values.push_back(h(x));
    return {{"grid", values},          {"at_zero", h.at_zero()}, {"x", h.grid_abscissae()},
            {"interval", h.grid_intervals()}, {"label", h.name()}};
  }
  Json j = closed_form_json(h);
  if (h.scale() != 1.0) j["scale"] = h.scale();
  return j;
}

namespace {

double number(const Json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number())
    throw ConfigError(std::string("shrinkage function needs numeric \"") + key + "\"");
  return j[key].get<double>();
}

std::vector<double> numbers(const Json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_array())
    throw ConfigError(std::string("\"") + key + "\" must be an array of numbers");
  std::vector<double> out;
  for (const auto& v : j[key]) {
    if (!v.is_number()) throw ConfigError(std::string("\"") + key + "\" must hold numbers only");
    out.push_back(v.get<double>());
  }
  return out;
}

ShrinkageFunction grid_from_json(const Json& j, const LimitingSpectrum* spectrum) {
  std::vector<double> values = numbers(j, "grid");
  const double at_zero = number(j, "at_zero");
  const std::string label = j.value("label", std::string("grid"));
  if (j.contains("x")) {
    std::vector<double> xs = numbers(j, "x");
    if (xs.size() != values.size()) throw ConfigError("\"x\" and \"grid\" differ in length");
    // one support piece unless told otherwise
    std::vector<int> interval(xs.size(), 0);
    if (j.contains("interval")) {
      if (!j["interval"].is_array() || j["interval"].size() != xs.size())
        throw ConfigError("\"interval\" must match \"x\" in length");
      for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!j["interval"][i].is_number_integer()) throw ConfigError("\"interval\" must hold integers");
        interval[i] = j["interval"][i].get<int>();
      }
    }
    return ShrinkageFunction::grid(std::move(xs), std::move(interval), std::move(values), at_zero,
                                   label);
  }
  if (!spectrum) throw ConfigError("a grid without \"x\" needs a spectrum grid to attach to");
  if (spectrum->size() != values.size())
    throw ConfigError("grid length " + std::to_string(values.size()) +
                      " does not match the spectrum grid (" + std::to_string(spectrum->size()) + ")");
  return ShrinkageFunction::on_grid(*spectrum, std::move(values), at_zero, label);
}

ShrinkageFunction closed_form_from_json(const Json& j) {
  const std::string family = j["family"].get<std::string>();
  if (family == "ridge") return ShrinkageFunction::ridge(number(j, "lambda"));
  if (family == "ridge_inverse") return ShrinkageFunction::ridge_inverse(number(j, "lambda"));
  if (family == "gradient_flow")
    return ShrinkageFunction::gradient_flow(number(j, "t"), number(j, "lambda"));
  if (family == "pseudo_inverse") return ShrinkageFunction::pseudo_inverse();
  if (family == "identity") return ShrinkageFunction::identity();
  if (family == "constant") return ShrinkageFunction::constant(number(j, "c"));
  if (family == "exponential") return ShrinkageFunction::exponential(number(j, "rate"));
  if (family == "polynomial") return ShrinkageFunction::polynomial(numbers(j, "coefficients"));
  throw ConfigError("unknown shrinkage family \"" + family + "\"");
}

}  // namespace

ShrinkageFunction shrinkage_from_json(const Json& j, const LimitingSpectrum* spectrum) {
  if (!j.is_object()) throw ConfigError("shrinkage function must be a JSON object");
  if (j.contains("grid")) return grid_from_json(j, spectrum);
  if (!j.contains("family") || !j["family"].is_string())
    throw ConfigError("shrinkage function needs \"family\" or \"grid\"");
  ShrinkageFunction h = closed_form_from_json(j);
  if (j.contains("scale")) h = h.scaled(number(j, "scale"));
  return h;
}

}  // namespace shrinkage_lab
