#pragma once

// Scenario configuration: a JSON document describing two atoms, the field,
// the non-resonant mode, the separation geometry, tolerances and output.
// See scenarios/SCHEMA.md for the full schema.

#include <cstddef>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "dispersion/atomic_model.hpp"
#include "dispersion/field_spectrum.hpp"
#include "dispersion/potentials.hpp"

namespace dispersion {

/// Raised for malformed or inconsistent configuration. The message names the
/// line (syntax errors) or the field path (semantic errors).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Spacing { Log, Linear };
enum class OutputFormat { Csv, Json };

struct GridSpec {
  double r_min = 0.0;
  double r_max = 0.0;
  int points = 1;
  Spacing spacing = Spacing::Log;
};

struct Geometry {
  std::optional<double> single;
  std::optional<GridSpec> grid;

  std::vector<double> separations() const {
    if (!grid) return {*single};
    const GridSpec& g = *grid;
    std::vector<double> out(static_cast<std::size_t>(g.points));
    for (int i = 0; i < g.points; ++i) {
      const double t = g.points == 1 ? 0.0 : static_cast<double>(i) / (g.points - 1);
      out[i] = g.spacing == Spacing::Log ? g.r_min * std::pow(g.r_max / g.r_min, t)
                                         : g.r_min + t * (g.r_max - g.r_min);
    }
    return out;
  }
};

struct Tolerances {
  double quadrature = 1e-10;
  double degeneracy = 1e-9;
  double darkness = 1e-6;
};

struct OutputSpec {
  OutputFormat format = OutputFormat::Csv;
  std::string path;
};

struct ScenarioConfig {
  ValidatedAtom atom_a;
  ValidatedAtom atom_b;
  FieldOccupation field;
  ModeSpec mode;
  Geometry geometry;
  Tolerances tolerances;
  OutputSpec output;

  PotentialOptions potential_options(bool strict) const {
    PotentialOptions o;
    o.quad_rel_tol = tolerances.quadrature;
    o.degeneracy_tol = tolerances.degeneracy;
    o.darkness_epsilon = tolerances.darkness;
    o.strict = strict;
    return o;
  }
};

namespace detail {

using json = nlohmann::json;

class Reader {
 public:
  Reader(const json& node, std::string path) : node_(node), path_(std::move(path)) {}

  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError("field '" + path_ + "': " + what);
  }

  bool has(const char* key) const { return node_.is_object() && node_.contains(key); }

  Reader at(const char* key) const {
    if (!node_.is_object()) fail("expected an object");
    if (!node_.contains(key)) {
      throw ConfigError("field '" + child_path(key) + "': missing");
    }
    return {node_.at(key), child_path(key)};
  }

  Reader at(std::size_t i) const { return {node_.at(i), path_ + "[" + std::to_string(i) + "]"}; }

  double number() const {
    if (!node_.is_number()) fail("expected a number");
    return node_.get<double>();
  }
  double number(const char* key, double fallback) const { return has(key) ? at(key).number() : fallback; }

  std::size_t index() const {
    if (!node_.is_number_integer() || node_.get<long long>() < 0) fail("expected a level index");
    return node_.get<std::size_t>();
  }

  std::string string() const {
    if (!node_.is_string()) fail("expected a string");
    return node_.get<std::string>();
  }

  std::size_t size() const {
    if (!node_.is_array()) fail("expected an array");
    return node_.size();
  }

  const json& raw() const { return node_; }
  const std::string& path() const { return path_; }

 private:
  std::string child_path(const char* key) const {
    return path_.empty() ? std::string(key) : path_ + "." + key;
  }

  const json& node_;
  std::string path_;
};

inline ValidatedAtom parse_atom(const Reader& r) {
  AtomSpec spec;
  const Reader levels = r.at("levels");
  for (std::size_t i = 0; i < levels.size(); ++i) spec.levels.push_back(levels.at(i).number());

  const Reader transitions = r.at("transitions");
  for (std::size_t i = 0; i < transitions.size(); ++i) {
    const Reader t = transitions.at(i);
    Transition tr;
    tr.from_state = t.at("from").index();
    tr.to_state = t.at("to").index();
    tr.dipole_sq = t.at("dipole_sq").number();
    if (t.has("omega")) tr.omega = t.at("omega").number();
    spec.transitions.push_back(tr);
  }

  std::optional<double> boltzmann;
  if (r.has("populations")) {
    const Reader pops = r.at("populations");
    if (pops.raw().is_array()) {
      for (std::size_t i = 0; i < pops.size(); ++i) spec.populations[i] = pops.at(i).number();
    } else if (pops.raw().is_object() && pops.has("boltzmann")) {
      boltzmann = pops.at("boltzmann").number();
    } else if (pops.raw().is_object()) {
      for (const auto& [key, value] : pops.raw().items()) {
        std::size_t idx = 0;
        try {
          std::size_t used = 0;
          idx = std::stoul(key, &used);
          if (used != key.size()) throw std::invalid_argument(key);
        } catch (const std::exception&) {
          pops.fail("key '" + key + "' is not a level index");
        }
        spec.populations[idx] = Reader(value, pops.path() + "." + key).number();
      }
    } else {
      pops.fail("expected an array, an index->probability object, or {\"boltzmann\": T}");
    }
  } else {
    spec.populations[0] = 1.0;
  }

  try {
    if (boltzmann) {
      const auto p = boltzmann_populations(spec.levels, *boltzmann);
      for (std::size_t i = 0; i < p.size(); ++i) spec.populations[i] = p[i];
    }
    return validate_atom(spec);
  } catch (const Error& e) {
    r.fail(e.what());
  }
}

inline ImagAxisRule parse_imag_rule(const Reader& r) {
  const std::string kind = r.at("kind").string();
  try {
    if (kind == "constant") return constant_rule(r.at("value").number());
    if (kind == "exponential") {
      return exponential_rule(r.at("amplitude").number(), r.at("rate").number());
    }
  } catch (const Error& e) {
    r.fail(e.what());
  }
  r.fail("unknown imaginary-axis rule '" + kind + "' (constant | exponential)");
}

inline FieldOccupation parse_field(const Reader& r) {
  const std::string kind = r.at("kind").string();
  FieldOccupation field;
  try {
    if (kind == "vacuum") {
      field = FieldOccupation::vacuum();
    } else if (kind == "thermal") {
      field = FieldOccupation::thermal(r.at("temperature").number());
    } else if (kind == "narrowband") {
      field = FieldOccupation::narrowband(r.at("center").number(), r.at("half_width").number(),
                                          r.at("height").number());
    } else if (kind == "tabulated") {
      const Reader knots = r.at("knots");
      std::vector<std::pair<double, double>> k;
      for (std::size_t i = 0; i < knots.size(); ++i) {
        const Reader knot = knots.at(i);
        if (knot.size() != 2) knot.fail("expected [omega, N]");
        k.emplace_back(knot.at(std::size_t{0}).number(), knot.at(std::size_t{1}).number());
      }
      field = FieldOccupation::tabulated(std::move(k));
    } else {
      r.at("kind").fail("unknown field kind '" + kind +
                        "' (vacuum | thermal | narrowband | tabulated)");
    }
  } catch (const Error& e) {
    r.fail(e.what());
  }
  if (r.has("imag_axis_rule")) field.imag_axis_rule = parse_imag_rule(r.at("imag_axis_rule"));
  return field;
}

inline ModeSpec parse_mode(const Reader& r) {
  std::string kind;
  if (r.raw().is_string()) {
    kind = r.string();
  } else {
    kind = r.at("kind").string();
  }
  if (kind == "vacuum") return ModeSpec::vacuum();
  if (kind == "literal-field") return ModeSpec::literal_field();
  if (kind == "thermal") {
    if (!r.raw().is_object()) r.fail("thermal mode needs {\"kind\": \"thermal\", \"temperature\": T}");
    const double t = r.at("temperature").number();
    if (!(t > 0.0)) r.at("temperature").fail("thermal mode requires T > 0");
    return ModeSpec::thermal(t);
  }
  r.fail("unknown mode '" + kind + "' (vacuum | thermal | literal-field)");
}

inline Geometry parse_geometry(const Reader& r) {
  Geometry g;
  if (r.has("R")) {
    const double R = r.at("R").number();
    if (!(R > 0.0)) r.at("R").fail("separation must be > 0");
    g.single = R;
  }
  if (r.has("r_min") || r.has("r_max") || r.has("points")) {
    GridSpec grid;
    grid.r_min = r.at("r_min").number();
    grid.r_max = r.at("r_max").number();
    const double pts = r.at("points").number();
    if (!(grid.r_min > 0.0)) r.at("r_min").fail("must be > 0");
    if (!(grid.r_max >= grid.r_min)) r.at("r_max").fail("must be >= r_min");
    if (!(pts >= 1.0) || pts != std::floor(pts)) r.at("points").fail("must be an integer >= 1");
    grid.points = static_cast<int>(pts);
    if (r.has("spacing")) {
      const std::string s = r.at("spacing").string();
      if (s == "log") {
        grid.spacing = Spacing::Log;
      } else if (s == "linear") {
        grid.spacing = Spacing::Linear;
      } else {
        r.at("spacing").fail("expected 'log' or 'linear'");
      }
    }
    g.grid = grid;
  }
  if (!g.single && !g.grid) r.fail("give either R or {r_min, r_max, points}");
  if (g.single && g.grid) r.fail("give either R or a grid, not both");
  return g;
}

inline std::pair<std::size_t, std::size_t> line_and_column(const std::string& text,
                                                           std::size_t byte) {
  std::size_t line = 1, column = 1;
  for (std::size_t i = 0; i < text.size() && i + 1 < byte; ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

}  // namespace detail

inline ScenarioConfig parse_scenario(const std::string& text, const std::string& source = "config") {
  using detail::json;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, column] = detail::line_and_column(text, e.byte);
    throw ConfigError(source + ":" + std::to_string(line) + ":" + std::to_string(column) +
                      ": syntax error: " + e.what());
  }
  const detail::Reader root(doc, "");
  if (!doc.is_object()) root.fail("top level must be an object");

  ScenarioConfig cfg{detail::parse_atom(root.at("atom_a")), detail::parse_atom(root.at("atom_b")),
                     FieldOccupation::vacuum(), ModeSpec::vacuum(), {}, {}, {}};
  if (root.has("field")) cfg.field = detail::parse_field(root.at("field"));
  if (root.has("mode")) cfg.mode = detail::parse_mode(root.at("mode"));
  cfg.geometry = detail::parse_geometry(root.at("geometry"));

  if (root.has("tolerances")) {
    const detail::Reader t = root.at("tolerances");
    cfg.tolerances.quadrature = t.number("quadrature", cfg.tolerances.quadrature);
    cfg.tolerances.degeneracy = t.number("degeneracy", cfg.tolerances.degeneracy);
    cfg.tolerances.darkness = t.number("darkness", cfg.tolerances.darkness);
    for (const char* key : {"quadrature", "degeneracy", "darkness"}) {
      if (t.has(key) && !(t.at(key).number() > 0.0)) t.at(key).fail("tolerance must be > 0");
    }
  }
  if (root.has("output")) {
    const detail::Reader o = root.at("output");
    if (o.has("format")) {
      const std::string f = o.at("format").string();
      if (f == "csv") {
        cfg.output.format = OutputFormat::Csv;
      } else if (f == "json") {
        cfg.output.format = OutputFormat::Json;
      } else {
        o.at("format").fail("expected 'csv' or 'json'");
      }
    }
    if (o.has("path")) cfg.output.path = o.at("path").string();
  }

  if (cfg.mode.kind == NonresonantMode::LiteralField && !cfg.field.imag_axis_rule) {
    root.at("field").fail("literal-field mode requires field.imag_axis_rule");
  }
  return cfg;
}

inline ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path);
}

}  // namespace dispersion
