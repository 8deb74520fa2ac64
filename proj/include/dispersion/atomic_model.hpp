#pragma once

// Multi-level isotropic atoms and their scalar dipole polarizability.
//
// Units are natural (hbar = c = 1): a frequency and an energy share one unit,
// which is also the inverse of the length unit used for separations.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dispersion/error.hpp"

namespace dispersion {

/// Dipole-coupled pair of levels. `omega` is optional on input; when present
/// it must match the level energy difference `E[to] - E[from]`.
struct Transition {
  std::size_t from_state = 0;
  std::size_t to_state = 0;
  std::optional<double> omega;
  double dipole_sq = 0.0;
};

struct AtomSpec {
  std::vector<double> levels;
  std::vector<Transition> transitions;
  /// Level index -> occupation probability. Missing levels are empty.
  std::map<std::size_t, double> populations;
};

/// A transition after validation, always stored upward (omega > 0).
struct UpwardTransition {
  std::size_t lower = 0;
  std::size_t upper = 0;
  double omega = 0.0;
  double dipole_sq = 0.0;
};

struct Polarizability {
  double value = 0.0;
  std::complex<double> at;
};

inline constexpr double kDefaultResonanceTolerance = 1e-9;

class ValidatedAtom;
ValidatedAtom validate_atom(const AtomSpec& spec);

/// Immutable atom whose invariants have been checked by validate_atom.
class ValidatedAtom {
 public:
  const std::vector<double>& levels() const noexcept { return levels_; }
  /// Sorted by ascending frequency; ties broken by (lower, upper).
  const std::vector<UpwardTransition>& transitions() const noexcept { return transitions_; }
  /// Dense population vector, one entry per level, summing to 1.
  const std::vector<double>& populations() const noexcept { return populations_; }
  std::size_t level_count() const noexcept { return levels_.size(); }

  /// Index of the lowest-energy level (first one on ties).
  std::size_t ground_state() const noexcept {
    return static_cast<std::size_t>(std::min_element(levels_.begin(), levels_.end()) -
                                    levels_.begin());
  }

  /// True when all population sits in a single level.
  std::optional<std::size_t> pure_state() const noexcept {
    for (std::size_t i = 0; i < populations_.size(); ++i) {
      if (populations_[i] == 1.0) return i;
    }
    return std::nullopt;
  }

  /// Same atom with populations replaced; the new populations are validated.
  ValidatedAtom with_populations(const std::vector<double>& populations) const;

 private:
  friend ValidatedAtom validate_atom(const AtomSpec& spec);
  ValidatedAtom() = default;

  std::vector<double> levels_;
  std::vector<UpwardTransition> transitions_;
  std::vector<double> populations_;
};

namespace detail {

inline std::vector<double> normalized_populations(std::vector<double> p) {
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw Error(ErrorCode::PopulationNotNormalized, "population must be finite and >= 0");
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw Error(ErrorCode::PopulationNotNormalized,
                "populations sum to " + std::to_string(sum) + ", expected 1");
  }
  for (double& v : p) v /= sum;
  return p;
}

}  // namespace detail

inline ValidatedAtom validate_atom(const AtomSpec& spec) {
  if (spec.levels.empty()) {
    throw Error(ErrorCode::InvalidLevelIndex, "atom has no levels");
  }
  for (double e : spec.levels) {
    if (!std::isfinite(e)) throw Error(ErrorCode::InvalidArgument, "level energy is not finite");
  }

  ValidatedAtom atom;
  atom.levels_ = spec.levels;
  const std::size_t n = spec.levels.size();

  for (const Transition& t : spec.transitions) {
    if (t.from_state >= n || t.to_state >= n || t.from_state == t.to_state) {
      throw Error(ErrorCode::InvalidLevelIndex,
                  "transition " + std::to_string(t.from_state) + "->" +
                      std::to_string(t.to_state) + " does not join two distinct levels");
    }
    if (!(t.dipole_sq > 0.0) || !std::isfinite(t.dipole_sq)) {
      throw Error(ErrorCode::NonPositiveDipole, "squared dipole must be > 0");
    }
    const double gap = spec.levels[t.to_state] - spec.levels[t.from_state];
    if (t.omega && std::abs(*t.omega - gap) > 1e-12 * std::max(1.0, std::abs(gap))) {
      throw Error(ErrorCode::InconsistentTransitionEnergy,
                  "transition omega differs from level energy difference");
    }
    if (gap == 0.0) {
      throw Error(ErrorCode::InconsistentTransitionEnergy,
                  "transition between degenerate levels has zero frequency");
    }
    UpwardTransition up;
    up.lower = gap > 0.0 ? t.from_state : t.to_state;
    up.upper = gap > 0.0 ? t.to_state : t.from_state;
    // The level difference is the stored frequency, so detailed-balance
    // identities hold to rounding.
    up.omega = spec.levels[up.upper] - spec.levels[up.lower];
    up.dipole_sq = t.dipole_sq;
    atom.transitions_.push_back(up);
  }

  std::sort(atom.transitions_.begin(), atom.transitions_.end(),
            [](const UpwardTransition& a, const UpwardTransition& b) {
              if (a.omega != b.omega) return a.omega < b.omega;
              if (a.lower != b.lower) return a.lower < b.lower;
              return a.upper < b.upper;
            });
  for (std::size_t i = 1; i < atom.transitions_.size(); ++i) {
    const auto& a = atom.transitions_[i - 1];
    const auto& b = atom.transitions_[i];
    if (a.lower == b.lower && a.upper == b.upper) {
      throw Error(ErrorCode::DuplicateTransition,
                  "levels " + std::to_string(a.lower) + " and " + std::to_string(a.upper) +
                      " are joined by more than one transition; merge them");
    }
  }

  std::vector<double> p(n, 0.0);
  for (const auto& [index, value] : spec.populations) {
    if (index >= n) {
      throw Error(ErrorCode::InvalidLevelIndex,
                  "population given for missing level " + std::to_string(index));
    }
    p[index] = value;
  }
  atom.populations_ = detail::normalized_populations(std::move(p));
  return atom;
}

inline ValidatedAtom ValidatedAtom::with_populations(const std::vector<double>& populations) const {
  if (populations.size() != levels_.size()) {
    throw Error(ErrorCode::InvalidLevelIndex, "population vector length differs from level count");
  }
  ValidatedAtom copy = *this;
  copy.populations_ = detail::normalized_populations(populations);
  return copy;
}

/// Scalar polarizability of `state` at a real frequency, evaluated off the
/// poles: alpha(w) = (2/3) sum_j |d_kj|^2 w_jk / (w_jk^2 - w^2).
inline Polarizability polarizability_real(const ValidatedAtom& atom, std::size_t state,
                                          double omega,
                                          double resonance_tol = kDefaultResonanceTolerance) {
  if (state >= atom.level_count()) {
    throw Error(ErrorCode::InvalidLevelIndex, "state " + std::to_string(state) + " out of range");
  }
  const double w2 = omega * omega;
  double sum = 0.0;
  for (const UpwardTransition& t : atom.transitions()) {
    double w_jk;
    if (t.lower == state) {
      w_jk = t.omega;
    } else if (t.upper == state) {
      w_jk = -t.omega;
    } else {
      continue;
    }
    const double detuning = w_jk * w_jk - w2;
    if (std::abs(detuning) <= resonance_tol * w_jk * w_jk) {
      throw Error(ErrorCode::OnResonance, "frequency " + std::to_string(omega) +
                                              " sits on the transition at " +
                                              std::to_string(t.omega));
    }
    sum += t.dipole_sq * w_jk / detuning;
  }
  return {2.0 / 3.0 * sum, {omega, 0.0}};
}

/// alpha(iu) = (2/3) sum_j |d_kj|^2 w_jk / (w_jk^2 + u^2). Positive and
/// non-increasing in u for the ground state.
inline Polarizability polarizability_imag_axis(const ValidatedAtom& atom, std::size_t state,
                                               double u) {
  if (state >= atom.level_count()) {
    throw Error(ErrorCode::InvalidLevelIndex, "state " + std::to_string(state) + " out of range");
  }
  if (!(u >= 0.0)) throw Error(ErrorCode::InvalidArgument, "imaginary frequency must be >= 0");
  const double u2 = u * u;
  double sum = 0.0;
  for (const UpwardTransition& t : atom.transitions()) {
    if (t.lower == state) {
      sum += t.dipole_sq * t.omega / (t.omega * t.omega + u2);
    } else if (t.upper == state) {
      sum -= t.dipole_sq * t.omega / (t.omega * t.omega + u2);
    }
  }
  return {2.0 / 3.0 * sum, {0.0, u}};
}

/// Population-weighted polarizability on the imaginary axis. Each transition
/// contributes with weight p_lower - p_upper.
inline double mixed_polarizability_imag_axis(const ValidatedAtom& atom, double u) {
  const auto& p = atom.populations();
  const double u2 = u * u;
  double sum = 0.0;
  for (const UpwardTransition& t : atom.transitions()) {
    const double weight = p[t.lower] - p[t.upper];
    if (weight != 0.0) sum += weight * t.dipole_sq * t.omega / (t.omega * t.omega + u2);
  }
  return 2.0 / 3.0 * sum;
}

inline std::vector<double> boltzmann_populations(const std::vector<double>& levels,
                                                 double temperature) {
  if (!(temperature > 0.0)) {
    throw Error(ErrorCode::NonPositiveTemperature, "temperature must be > 0");
  }
  if (levels.empty()) return {};
  const double e_min = *std::min_element(levels.begin(), levels.end());
  std::vector<double> p(levels.size());
  double z = 0.0;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    p[i] = std::exp(-(levels[i] - e_min) / temperature);
    z += p[i];
  }
  for (double& v : p) v /= z;
  return p;
}

}  // namespace dispersion
