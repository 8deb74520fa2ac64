#pragma once

// Two-atom dispersion potential in an external isotropic field.
//
// Atom A sits in a single internal state k and is assumed dark (no photons at
// its transition frequencies). Atom B may be in any mixed state. The potential
// splits into
//   - a non-resonant part from elastic scattering of virtual and real
//     photons, an imaginary-axis integral (vacuum / literal field) or a
//     Matsubara sum (thermal equilibrium), and
//   - a resonant part from real absorption (weight p_n N) and stimulated plus
//     spontaneous emission (weight p_n (N + 1)) by atom B.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <numbers>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "dispersion/atomic_model.hpp"
#include "dispersion/error.hpp"
#include "dispersion/field_spectrum.hpp"
#include "dispersion/green_tensor.hpp"
#include "dispersion/quadrature.hpp"

namespace dispersion {

struct PotentialOptions {
  double quad_rel_tol = 1e-10;
  /// Absolute quadrature floor, as a fraction of peak integrand times width.
  double quad_abs_scale = 1e-15;
  double matsubara_rel_tol = 1e-13;
  /// Relative guard on |w_A^2 - w_B^2| in resonant denominators.
  double degeneracy_tol = 1e-9;
  double darkness_epsilon = 1e-6;
  /// Escalate dark-atom violations from flags to errors.
  bool strict = false;
};

/// Value of a non-resonant potential with its numerical diagnostics, all in
/// energy units.
struct NonresonantResult {
  double value = 0.0;
  double quad_abs_err = 0.0;
  double matsubara_tail_bound = 0.0;
  std::size_t evaluations = 0;
};

enum class Channel { Absorption, Emission };

inline const char* to_string(Channel c) {
  return c == Channel::Absorption ? "absorption" : "emission";
}

struct ResonantTerm {
  /// Transition of A from its state k to level j.
  std::size_t a_state = 0;
  std::size_t a_level = 0;
  /// Transition of B from initial level n to final level m.
  std::size_t b_initial = 0;
  std::size_t b_final = 0;
  double omega_b = 0.0;
  double value = 0.0;
  Channel channel = Channel::Absorption;
};

struct ResonantResult {
  double value = 0.0;
  std::vector<ResonantTerm> terms;

  double subtotal(Channel c) const {
    CompensatedSum s;
    for (const auto& t : terms)
      if (t.channel == c) s.add(t.value);
    return s.value();
  }
};

namespace detail {

inline void require_separation(double R) {
  if (!(R > 0.0) || !std::isfinite(R)) {
    throw Error(ErrorCode::ZeroSeparation, "separation must be finite and > 0");
  }
}

inline std::size_t pure_state_of(const ValidatedAtom& atom, const char* which) {
  const auto k = atom.pure_state();
  if (!k) {
    throw Error(ErrorCode::InvalidArgument,
                std::string(which) + " must be prepared in a single internal state");
  }
  return *k;
}

/// alpha_A(iu) alpha_B(iu) (uR)^4 g(uR) e^{-2uR} -- the imaginary-axis
/// integrand without its R^-6 prefactor.
struct ImagAxisIntegrand {
  const ValidatedAtom* a;
  const ValidatedAtom* b;
  double R;

  double operator()(double u) const {
    const double x = u * R;
    return mixed_polarizability_imag_axis(*a, u) * mixed_polarizability_imag_axis(*b, u) *
           kernel_g_scaled(x) * std::exp(-2.0 * x);
  }
};

template <class F>
NonresonantResult integrate_nonresonant(F&& integrand, double R, const PotentialOptions& opts) {
  const double decay = 2.0 * R;
  QuadratureOptions q;
  q.rel_tol = opts.quad_rel_tol;
  q.abs_tol = opts.quad_abs_scale * std::abs(integrand(0.0)) / decay;
  if (!(q.abs_tol > 0.0) && !(q.rel_tol > 0.0)) q.abs_tol = 1e-300;
  const QuadratureResult r = integrate_semi_infinite(integrand, decay, q);
  const double prefactor = -1.0 / (std::numbers::pi * std::pow(R, 6));
  NonresonantResult out;
  out.value = prefactor * r.value;
  out.quad_abs_err = std::abs(prefactor) * r.abs_error_estimate;
  out.evaluations = r.evaluations;
  return out;
}

}  // namespace detail

/// U = -(1/(pi R^2)) int_0^inf alpha_A(iu) alpha_B(iu) u^4 g(uR) e^{-2uR} du.
/// Both polarizabilities are population-weighted.
inline NonresonantResult nonresonant_vacuum(const ValidatedAtom& atom_a,
                                            const ValidatedAtom& atom_b, double R,
                                            const PotentialOptions& opts = {}) {
  detail::require_separation(R);
  return detail::integrate_nonresonant(detail::ImagAxisIntegrand{&atom_a, &atom_b, R}, R, opts);
}

/// Vacuum integrand weighted by (2 N~(u) + 1), with N~ the field's declared
/// imaginary-axis rule.
inline NonresonantResult nonresonant_literal_field(const ValidatedAtom& atom_a,
                                                   const ValidatedAtom& atom_b,
                                                   const FieldOccupation& field, double R,
                                                   const PotentialOptions& opts = {}) {
  detail::require_separation(R);
  if (!field.imag_axis_rule) {
    throw Error(ErrorCode::MissingImaginaryAxisRule,
                "literal-field mode needs an imaginary-axis occupation rule");
  }
  const ImagAxisRule& rule = *field.imag_axis_rule;
  const detail::ImagAxisIntegrand base{&atom_a, &atom_b, R};
  auto integrand = [&](double u) {
    const double n = rule(u);
    if (!(n >= 0.0)) {
      throw Error(ErrorCode::InvalidField, "imaginary-axis occupation is negative");
    }
    return base(u) * (2.0 * n + 1.0);
  };
  return detail::integrate_nonresonant(integrand, R, opts);
}

/// Thermal-equilibrium non-resonant potential as a Matsubara sum:
///   U = -(2T/R^2) sum_m (1 - delta_m0/2) xi^4 g(xi R) e^{-2 xi R} alpha_A alpha_B
/// at xi_m = 2 pi m T. The m = 0 term takes the limit xi^4 g(xi R) -> 3/R^4,
/// so it equals -3 T alpha_A(0) alpha_B(0) / R^6.
inline NonresonantResult nonresonant_thermal_matsubara(const ValidatedAtom& atom_a,
                                                       const ValidatedAtom& atom_b,
                                                       double temperature, double R,
                                                       const PotentialOptions& opts = {}) {
  detail::require_separation(R);
  const MatsubaraGrid grid(temperature);
  const detail::ImagAxisIntegrand integrand{&atom_a, &atom_b, R};

  // Beyond m*, (1 + 1/m)^4 e^{-4 pi T R} <= e^{-2 pi T R}; the polynomial part of
  // xi^4 g grows no faster than (1 + 1/m)^4 per step.
  const double TR = temperature * R;
  const double ratio = std::exp(-2.0 * std::numbers::pi * TR);
  long ratio_from = static_cast<long>(std::ceil(1.0 / std::expm1(std::numbers::pi * TR / 2.0)));

  // Population inversion can make |alpha(iu)| non-monotone at small u; wait
  // until u is well above every transition frequency.
  auto inverted = [](const ValidatedAtom& atom) {
    for (const auto& t : atom.transitions())
      if (atom.populations()[t.lower] < atom.populations()[t.upper]) return true;
    return false;
  };
  if (inverted(atom_a) || inverted(atom_b)) {
    double w_max = 0.0;
    for (const auto& t : atom_a.transitions()) w_max = std::max(w_max, t.omega);
    for (const auto& t : atom_b.transitions()) w_max = std::max(w_max, t.omega);
    ratio_from = std::max(ratio_from, static_cast<long>(std::ceil(10.0 * w_max / grid.frequency(1))));
  }

  MatsubaraOptions m;
  m.rel_tol = opts.matsubara_rel_tol;
  m.first = 0;
  m.ratio_from = std::max(1L, ratio_from);
  const SummationResult s =
      matsubara_sum([&](long k) { return integrand(grid.frequency(k)); }, grid, ratio, m);

  const double prefactor = -2.0 * temperature / std::pow(R, 6);
  NonresonantResult out;
  out.value = prefactor * s.value;
  out.matsubara_tail_bound = std::abs(prefactor) * s.tail_bound;
  out.evaluations = static_cast<std::size_t>(s.terms);
  return out;
}

/// Resonant potential, closed form
///   U = (4/(9R^2)) sum |d_A|^2 |d_B|^2 w_A w_B^4 / (w_A^2 - w_B^2) h(w_B R) [brackets]
/// with brackets p_n N(w_B) on upward B transitions and -p_n (N(w_B) + 1) on
/// downward ones. A term is listed when its bracket is nonzero.
inline ResonantResult resonant(const ValidatedAtom& atom_a, const ValidatedAtom& atom_b,
                               const FieldOccupation& field, double R,
                               const PotentialOptions& opts = {}) {
  detail::require_separation(R);
  const std::size_t k = detail::pure_state_of(atom_a, "atom A");
  const auto& pb = atom_b.populations();
  const double R2 = R * R;

  ResonantResult out;
  CompensatedSum total;
  for (const UpwardTransition& tb : atom_b.transitions()) {
    const double wb = tb.omega;
    const double n_occ = occupation(field, wb);
    const double absorption = pb[tb.lower] * n_occ;
    const double emission = pb[tb.upper] * (n_occ + 1.0);
    if (absorption == 0.0 && emission == 0.0) continue;
    const double wb2 = wb * wb;
    const double radial = wb2 * wb2 * kernel_h(wb * R);

    for (const UpwardTransition& ta : atom_a.transitions()) {
      double wa;
      std::size_t j;
      if (ta.lower == k) {
        wa = ta.omega;
        j = ta.upper;
      } else if (ta.upper == k) {
        wa = -ta.omega;
        j = ta.lower;
      } else {
        continue;
      }
      const double wa2 = wa * wa;
      if (std::abs(wa2 - wb2) <= opts.degeneracy_tol * std::max(wa2, wb2)) {
        throw Error(ErrorCode::DegenerateResonance,
                    "A transition at " + std::to_string(ta.omega) + " and B transition at " +
                        std::to_string(wb) + " coincide");
      }
      const double base =
          4.0 / (9.0 * R2) * ta.dipole_sq * tb.dipole_sq * wa * radial / (wa2 - wb2);
      if (absorption != 0.0) {
        const double v = base * absorption;
        out.terms.push_back({k, j, tb.lower, tb.upper, wb, v, Channel::Absorption});
        total.add(v);
      }
      if (emission != 0.0) {
        const double v = -base * emission;
        out.terms.push_back({k, j, tb.upper, tb.lower, wb, v, Channel::Emission});
        total.add(v);
      }
    }
  }
  out.value = total.value();
  return out;
}

/// Same resonant potential through the tensor route:
///   (1/3) sum |d_B|^2 alpha_A(w_B) sum_ij |D_ij(w_B, R)|^2 [brackets].
/// Independent of kernel_h and of the closed-form prefactor.
inline double resonant_via_green_tensor(const ValidatedAtom& atom_a, const ValidatedAtom& atom_b,
                                        const FieldOccupation& field,
                                        const SeparationGeometry& geom,
                                        const PotentialOptions& opts = {}) {
  const std::size_t k = detail::pure_state_of(atom_a, "atom A");
  const auto& pb = atom_b.populations();
  CompensatedSum total;
  for (const UpwardTransition& tb : atom_b.transitions()) {
    const double n_occ = occupation(field, tb.omega);
    const double bracket = pb[tb.lower] * n_occ - pb[tb.upper] * (n_occ + 1.0);
    if (bracket == 0.0) continue;
    const double alpha_a =
        polarizability_real(atom_a, k, tb.omega, opts.degeneracy_tol).value;
    const double d2 = abs_contraction(retarded_green_tensor(cdouble(tb.omega, 0.0), geom));
    total.add(tb.dipole_sq * alpha_a * d2 * bracket / 3.0);
  }
  return total.value();
}

/// Vacuum resonant potential for B prepared in the excited level `excited`:
/// only the emission channel survives, with weight 1.
inline double resonant_excited_vacuum(const ValidatedAtom& atom_a, const ValidatedAtom& atom_b,
                                      std::size_t excited, double R,
                                      const PotentialOptions& opts = {}) {
  std::vector<double> p(atom_b.level_count(), 0.0);
  if (excited >= p.size()) throw Error(ErrorCode::InvalidLevelIndex, "excited level out of range");
  p[excited] = 1.0;
  return resonant(atom_a, atom_b.with_populations(p), FieldOccupation::vacuum(), R, opts).value;
}

/// Both atoms in their ground states: only absorption of field photons by B
/// contributes. The h(w_B R) factor is kept, so this is exact at all R and
/// falls off as R^-2 in the retarded regime.
inline double resonant_ground_ground(const ValidatedAtom& atom_a, const ValidatedAtom& atom_b,
                                     const FieldOccupation& field, double R,
                                     const PotentialOptions& opts = {}) {
  const auto kb = atom_b.pure_state();
  if (!kb || *kb != atom_b.ground_state()) {
    throw Error(ErrorCode::InvalidArgument, "atom B must be in its ground state");
  }
  const auto ka = atom_a.pure_state();
  if (!ka || *ka != atom_a.ground_state()) {
    throw Error(ErrorCode::InvalidArgument, "atom A must be in its ground state");
  }
  return resonant(atom_a, atom_b, field, R, opts).subtotal(Channel::Absorption);
}

struct EquilibriumResidual {
  double total = 0.0;
  double max_term_magnitude = 0.0;
  /// Absorption + emission for each (A transition, B transition) pair.
  std::vector<double> pair_residuals;
  std::vector<double> pair_scales;
};

/// Resonant potential with B in Boltzmann populations at T and a thermal
/// field at the same T. Absorption and emission cancel pair by pair.
inline EquilibriumResidual equilibrium_residual(const ValidatedAtom& atom_a,
                                                const ValidatedAtom& atom_b, double temperature,
                                                double R, const PotentialOptions& opts = {}) {
  const ValidatedAtom thermal_b =
      atom_b.with_populations(boltzmann_populations(atom_b.levels(), temperature));
  const ResonantResult r =
      resonant(atom_a, thermal_b, FieldOccupation::thermal(temperature), R, opts);

  EquilibriumResidual out;
  out.total = r.value;
  for (const auto& t : r.terms) out.max_term_magnitude = std::max(out.max_term_magnitude, std::abs(t.value));
  for (std::size_t i = 0; i < r.terms.size(); ++i) {
    const ResonantTerm& up = r.terms[i];
    if (up.channel != Channel::Absorption) continue;
    double partner = 0.0;
    for (const ResonantTerm& down : r.terms) {
      if (down.channel == Channel::Emission && down.a_level == up.a_level &&
          down.b_initial == up.b_final && down.b_final == up.b_initial) {
        partner = down.value;
        break;
      }
    }
    out.pair_residuals.push_back(up.value + partner);
    out.pair_scales.push_back(std::max(std::abs(up.value), std::abs(partner)));
  }
  return out;
}

enum class NonresonantMode { Vacuum, Thermal, LiteralField };

inline const char* to_string(NonresonantMode m) {
  switch (m) {
    case NonresonantMode::Vacuum: return "vacuum";
    case NonresonantMode::Thermal: return "thermal";
    case NonresonantMode::LiteralField: return "literal-field";
  }
  return "unknown";
}

struct ModeSpec {
  NonresonantMode kind = NonresonantMode::Vacuum;
  double temperature = 0.0;

  static ModeSpec vacuum() { return {}; }
  static ModeSpec thermal(double t) {
    if (!(t > 0.0)) throw Error(ErrorCode::NonPositiveTemperature, "thermal mode needs T > 0");
    return {NonresonantMode::Thermal, t};
  }
  static ModeSpec literal_field() { return {NonresonantMode::LiteralField, 0.0}; }
};

struct Diagnostics {
  double quad_abs_err = 0.0;
  double matsubara_tail_bound = 0.0;
  std::vector<std::string> flags;
};

struct PotentialBreakdown {
  double separation = 0.0;
  double nonresonant = 0.0;
  double resonant = 0.0;
  std::vector<ResonantTerm> resonant_terms;
  double total = 0.0;
  Diagnostics diagnostics;
};

inline PotentialBreakdown total_potential(const ValidatedAtom& atom_a, const ValidatedAtom& atom_b,
                                          const FieldOccupation& field, const ModeSpec& mode,
                                          double R, const PotentialOptions& opts = {}) {
  detail::require_separation(R);
  PotentialBreakdown out;
  out.separation = R;

  for (const DarkViolation& v : check_atom_dark(field, atom_a, opts.darkness_epsilon)) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "dark_violation(omega=%.6g,N=%.6g)", v.omega, v.occupation);
    if (opts.strict) {
      throw Error(ErrorCode::DarkAssumptionViolated,
                  std::string("field populates atom A transition: ") + buf);
    }
    out.diagnostics.flags.emplace_back(buf);
  }

  NonresonantResult nr;
  switch (mode.kind) {
    case NonresonantMode::Vacuum:
      nr = nonresonant_vacuum(atom_a, atom_b, R, opts);
      break;
    case NonresonantMode::Thermal: {
      nr = nonresonant_thermal_matsubara(atom_a, atom_b, mode.temperature, R, opts);
      const auto* t = std::get_if<Thermal>(&field.spectrum);
      if (!t || t->temperature != mode.temperature) {
        out.diagnostics.flags.emplace_back("field_not_thermal_at_mode_T");
      }
      break;
    }
    case NonresonantMode::LiteralField:
      nr = nonresonant_literal_field(atom_a, atom_b, field, R, opts);
      break;
  }

  ResonantResult res = resonant(atom_a, atom_b, field, R, opts);
  out.nonresonant = nr.value;
  out.resonant = res.value;
  out.resonant_terms = std::move(res.terms);
  out.total = out.nonresonant + out.resonant;
  out.diagnostics.quad_abs_err = nr.quad_abs_err;
  out.diagnostics.matsubara_tail_bound = nr.matsubara_tail_bound;
  return out;
}

}  // namespace dispersion
