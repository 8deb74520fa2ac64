#pragma once

// Isotropic, unpolarized photon occupation N(w): the number of photons per
// mode depends only on |k| = w.

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "dispersion/atomic_model.hpp"
#include "dispersion/error.hpp"

namespace dispersion {

struct Vacuum {};

struct Thermal {
  double temperature = 0.0;
};

/// Top-hat band: N = height for |w - center| <= half_width, zero elsewhere.
struct Narrowband {
  double center = 0.0;
  double half_width = 0.0;
  double height = 0.0;
};

/// Piecewise-linear occupation through (omega, N) knots, zero outside.
struct Tabulated {
  std::vector<std::pair<double, double>> knots;
};

using Spectrum = std::variant<Vacuum, Thermal, Narrowband, Tabulated>;

/// User-declared continuation N~(u) of the occupation onto the imaginary
/// axis. Only the literal-field non-resonant route consumes it.
struct ImagAxisRule {
  std::function<double(double)> value;
  std::string description;

  double operator()(double u) const { return value(u); }
};

inline ImagAxisRule constant_rule(double c) {
  if (!(c >= 0.0)) throw Error(ErrorCode::InvalidField, "imaginary-axis occupation must be >= 0");
  return {[c](double) { return c; }, "constant(" + std::to_string(c) + ")"};
}

/// N~(u) = amplitude * exp(-rate * u).
inline ImagAxisRule exponential_rule(double amplitude, double rate) {
  if (!(amplitude >= 0.0) || !(rate >= 0.0)) {
    throw Error(ErrorCode::InvalidField, "exponential rule needs amplitude >= 0 and rate >= 0");
  }
  return {[amplitude, rate](double u) { return amplitude * std::exp(-rate * u); },
          "exponential(" + std::to_string(amplitude) + "," + std::to_string(rate) + ")"};
}

struct FieldOccupation {
  Spectrum spectrum = Vacuum{};
  std::optional<ImagAxisRule> imag_axis_rule;

  static FieldOccupation vacuum() { return {}; }
  static FieldOccupation thermal(double temperature);
  static FieldOccupation narrowband(double center, double half_width, double height);
  static FieldOccupation tabulated(std::vector<std::pair<double, double>> knots);

  FieldOccupation with_imag_axis_rule(ImagAxisRule rule) const {
    FieldOccupation copy = *this;
    copy.imag_axis_rule = std::move(rule);
    return copy;
  }

  bool is_vacuum() const noexcept { return std::holds_alternative<Vacuum>(spectrum); }
};

inline FieldOccupation FieldOccupation::thermal(double temperature) {
  if (!(temperature > 0.0)) {
    throw Error(ErrorCode::NonPositiveTemperature, "thermal field needs T > 0");
  }
  return {Thermal{temperature}, std::nullopt};
}

inline FieldOccupation FieldOccupation::narrowband(double center, double half_width,
                                                   double height) {
  if (!(center > 0.0) || !(half_width >= 0.0) || !(height >= 0.0)) {
    throw Error(ErrorCode::InvalidField,
                "narrowband needs center > 0, half_width >= 0 and height >= 0");
  }
  return {Narrowband{center, half_width, height}, std::nullopt};
}

inline FieldOccupation FieldOccupation::tabulated(std::vector<std::pair<double, double>> knots) {
  if (knots.empty()) throw Error(ErrorCode::InvalidField, "tabulated field has no knots");
  for (std::size_t i = 0; i < knots.size(); ++i) {
    if (!(knots[i].second >= 0.0) || !std::isfinite(knots[i].second)) {
      throw Error(ErrorCode::InvalidField, "tabulated occupation must be finite and >= 0");
    }
    if (i > 0 && !(knots[i].first > knots[i - 1].first)) {
      throw Error(ErrorCode::InvalidField, "tabulated knots must be strictly increasing");
    }
  }
  return {Tabulated{std::move(knots)}, std::nullopt};
}

/// Bose occupation 1/(exp(w/T) - 1).
inline double bose_occupation(double omega, double temperature) {
  return 1.0 / std::expm1(omega / temperature);
}

inline double occupation(const FieldOccupation& field, double omega) {
  if (!(omega > 0.0)) {
    throw Error(ErrorCode::NonPositiveFrequency, "occupation is defined for omega > 0");
  }
  struct Visitor {
    double omega;
    double operator()(const Vacuum&) const { return 0.0; }
    double operator()(const Thermal& t) const { return bose_occupation(omega, t.temperature); }
    double operator()(const Narrowband& b) const {
      return std::abs(omega - b.center) <= b.half_width ? b.height : 0.0;
    }
    double operator()(const Tabulated& t) const {
      const auto& k = t.knots;
      if (omega < k.front().first || omega > k.back().first) return 0.0;
      auto hi = std::lower_bound(k.begin(), k.end(), omega,
                                 [](const auto& knot, double w) { return knot.first < w; });
      if (hi->first == omega) return hi->second;
      auto lo = hi - 1;
      const double frac = (omega - lo->first) / (hi->first - lo->first);
      return lo->second + frac * (hi->second - lo->second);
    }
  };
  return std::visit(Visitor{omega}, field.spectrum);
}

struct DarkViolation {
  double omega = 0.0;
  double occupation = 0.0;
};

/// Upward transitions of `atom` where N(w) exceeds epsilon. An empty result
/// means the atom can be treated as staying in its initial state.
inline std::vector<DarkViolation> check_atom_dark(const FieldOccupation& field,
                                                  const ValidatedAtom& atom,
                                                  double epsilon = 1e-6) {
  if (!(epsilon >= 0.0)) throw Error(ErrorCode::InvalidArgument, "epsilon must be >= 0");
  std::vector<DarkViolation> out;
  for (const UpwardTransition& t : atom.transitions()) {
    const double n = occupation(field, t.omega);
    if (n > epsilon) out.push_back({t.omega, n});
  }
  return out;
}

}  // namespace dispersion
