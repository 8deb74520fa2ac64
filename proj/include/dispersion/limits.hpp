#pragma once

// Built-in limit checks run by `dispersion check-limits`: the vacuum
// Casimir-Polder asymptote, distance scaling, detailed balance, the (N+1)
// enhancement of the excited-atom potential, the Green-tensor contraction
// identities, closed form vs tensor route, and Matsubara consistency.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "dispersion/potentials.hpp"

namespace dispersion {

struct CheckResult {
  std::string name;
  bool passed = false;
  double measured = 0.0;
  double threshold = 0.0;
  std::string detail;
};

struct CheckOptions {
  /// Multiplies every threshold; values below 1 tighten the suite.
  double tolerance_scale = 1.0;
};

inline double relative_difference(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  // Values below the normal range carry no relative precision.
  if (scale < 1e-290) return 0.0;
  return std::abs(a - b) / scale;
}

inline ValidatedAtom two_level_atom(double omega, double dipole_sq, bool excited = false) {
  AtomSpec spec;
  spec.levels = {0.0, omega};
  spec.transitions = {{0, 1, std::nullopt, dipole_sq}};
  spec.populations = {{excited ? 1u : 0u, 1.0}};
  return validate_atom(spec);
}

inline std::vector<double> log_grid(double lo, double hi, int points) {
  std::vector<double> out(points);
  for (int i = 0; i < points; ++i) {
    const double t = points == 1 ? 0.0 : static_cast<double>(i) / (points - 1);
    out[i] = lo * std::pow(hi / lo, t);
  }
  return out;
}

/// Deterministic pseudo-random unit vectors.
inline std::vector<Vec3> random_directions(int count, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::vector<Vec3> out;
  while (static_cast<int>(out.size()) < count) {
    Vec3 v{normal(rng), normal(rng), normal(rng)};
    const double n = std::hypot(v[0], v[1], v[2]);
    if (n < 1e-3) continue;
    out.push_back({v[0] / n, v[1] / n, v[2] / n});
  }
  return out;
}

namespace detail {

inline CheckResult make_check(std::string name, double measured, double threshold,
                              const CheckOptions& opts, std::string detail = {}) {
  CheckResult r;
  r.name = std::move(name);
  r.measured = measured;
  r.threshold = threshold * opts.tolerance_scale;
  r.passed = std::isfinite(measured) && measured <= r.threshold;
  r.detail = std::move(detail);
  return r;
}

inline double fitted_exponent(const std::vector<double>& rs, auto&& potential) {
  std::vector<std::pair<double, double>> pts;
  for (double r : rs) pts.emplace_back(r, potential(r));
  return fit_power_law(pts).exponent;
}

}  // namespace detail

inline std::vector<CheckResult> check_casimir_polder_asymptote(const CheckOptions& opts) {
  const ValidatedAtom atom = two_level_atom(1.0, 1.0);
  const double alpha0 = polarizability_imag_axis(atom, 0, 0.0).value;
  std::vector<CheckResult> out;
  for (auto [R, tol] : {std::pair{100.0, 0.02}, std::pair{1000.0, 0.002}}) {
    const double u = nonresonant_vacuum(atom, atom, R).value;
    const double asymptote = -23.0 * alpha0 * alpha0 / (4.0 * std::numbers::pi * std::pow(R, 7));
    char name[64];
    std::snprintf(name, sizeof name, "cp_asymptote_R%g", R);
    out.push_back(detail::make_check(name, relative_difference(u, asymptote), tol, opts));
  }
  return out;
}

inline std::vector<CheckResult> check_scaling_exponents(const CheckOptions& opts) {
  const ValidatedAtom a = two_level_atom(1.0, 1.0);
  const ValidatedAtom b_ground = two_level_atom(0.8, 1.0);
  const FieldOccupation band = FieldOccupation::narrowband(0.8, 0.05, 1.0);
  std::vector<CheckResult> out;

  const double far = detail::fitted_exponent(
      log_grid(30.0, 300.0, 9), [&](double r) { return nonresonant_vacuum(a, a, r).value; });
  out.push_back(detail::make_check("scaling_nonresonant_retarded", std::abs(far + 7.0), 0.1, opts));

  const double near = detail::fitted_exponent(
      log_grid(1e-3, 1e-2, 9), [&](double r) { return nonresonant_vacuum(a, a, r).value; });
  out.push_back(detail::make_check("scaling_nonresonant_london", std::abs(near + 6.0), 0.05, opts));

  const double res = detail::fitted_exponent(log_grid(30.0, 300.0, 9), [&](double r) {
    return resonant_ground_ground(a, b_ground, band, r);
  });
  out.push_back(detail::make_check("scaling_resonant_retarded", std::abs(res + 2.0), 0.01, opts));
  return out;
}

inline ValidatedAtom three_level_atom(const std::vector<double>& levels) {
  AtomSpec spec;
  spec.levels = levels;
  spec.transitions = {{0, 1, std::nullopt, 1.0}, {1, 2, std::nullopt, 0.7}, {0, 2, std::nullopt, 0.4}};
  spec.populations = {{0, 1.0}};
  return validate_atom(spec);
}

inline std::vector<CheckResult> check_detailed_balance(const CheckOptions& opts) {
  const ValidatedAtom a = two_level_atom(1.0, 1.0);
  const ValidatedAtom b = three_level_atom({0.0, 0.45, 1.3});
  double worst_total = 0.0;
  double worst_pair = 0.0;
  for (double T : {0.2, 0.5, 2.0}) {
    for (double R : {0.5, 10.0, 200.0}) {
      const EquilibriumResidual r = equilibrium_residual(a, b, T, R);
      worst_total = std::max(worst_total, std::abs(r.total) / r.max_term_magnitude);
      for (std::size_t i = 0; i < r.pair_residuals.size(); ++i) {
        worst_pair = std::max(worst_pair, std::abs(r.pair_residuals[i]) / r.pair_scales[i]);
      }
    }
  }
  return {detail::make_check("detailed_balance_total", worst_total, 1e-12, opts),
          detail::make_check("detailed_balance_pairwise", worst_pair, 1e-12, opts)};
}

inline std::vector<CheckResult> check_enhancement_factor(const CheckOptions& opts) {
  const ValidatedAtom a = two_level_atom(1.0, 1.0);
  const ValidatedAtom b = two_level_atom(0.8, 1.0, /*excited=*/true);
  const double R = 50.0;
  const double vacuum = resonant(a, b, FieldOccupation::vacuum(), R).value;
  double worst = 0.0;
  for (double n0 : {0.5, 1.0, 2.0, 10.0}) {
    const double driven = resonant(a, b, FieldOccupation::narrowband(0.8, 0.05, n0), R).value;
    worst = std::max(worst, relative_difference(driven, (n0 + 1.0) * vacuum));
  }
  return {detail::make_check("enhancement_factor", worst, 1e-14, opts)};
}

inline std::vector<CheckResult> check_contraction_identities(const CheckOptions& opts) {
  double worst_imag = 0.0;
  double worst_real = 0.0;
  const double R = 2.0;
  for (const Vec3& s : random_directions(10, 20240611u)) {
    const SeparationGeometry geom = SeparationGeometry::along(R, s);
    for (double x : log_grid(1e-3, 1e3, 50)) {
      const double w = x / R;
      const double lhs_i = contraction_squared(retarded_green_tensor(cdouble(0.0, w), geom)).real();
      const double rhs_i = 2.0 * std::pow(w, 4) * kernel_g(x) * std::exp(-2.0 * x) / (R * R);
      worst_imag = std::max(worst_imag, relative_difference(lhs_i, rhs_i));
      const double lhs_r = abs_contraction(retarded_green_tensor(cdouble(w, 0.0), geom));
      const double rhs_r = 2.0 * std::pow(w, 4) * kernel_h(x) / (R * R);
      worst_real = std::max(worst_real, relative_difference(lhs_r, rhs_r));
    }
  }
  return {detail::make_check("contraction_identity_imaginary", worst_imag, 1e-12, opts),
          detail::make_check("contraction_identity_real", worst_real, 1e-12, opts)};
}

/// Random atom pair, field and separation for route-equivalence checks.
struct RandomScenario {
  ValidatedAtom atom_a;
  ValidatedAtom atom_b;
  FieldOccupation field;
  double R;
};

inline RandomScenario random_scenario(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  auto draw_levels = [&](int n, double lo, double hi) {
    std::vector<double> levels{0.0};
    for (int i = 1; i < n; ++i) levels.push_back(lo + (hi - lo) * uni(rng));
    std::sort(levels.begin(), levels.end());
    return levels;
  };
  auto all_pairs = [&](std::size_t n) {
    std::vector<Transition> t;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) t.push_back({i, j, std::nullopt, 0.2 + uni(rng)});
    return t;
  };

  while (true) {
    AtomSpec a;
    a.levels = draw_levels(2 + static_cast<int>(uni(rng) * 2), 1.0, 3.0);
    a.transitions = all_pairs(a.levels.size());
    a.populations = {{0, 1.0}};

    AtomSpec b;
    b.levels = draw_levels(2 + static_cast<int>(uni(rng) * 3), 0.1, 2.5);
    b.transitions = all_pairs(b.levels.size());
    double z = 0.0;
    std::vector<double> p(b.levels.size());
    for (double& v : p) z += (v = uni(rng));
    for (std::size_t i = 0; i < p.size(); ++i) b.populations[i] = p[i] / z;

    std::vector<std::pair<double, double>> knots;
    for (int i = 0; i <= 10; ++i) knots.emplace_back(0.05 + 0.3 * i, 3.0 * uni(rng));
    FieldOccupation field = FieldOccupation::tabulated(std::move(knots));

    ValidatedAtom va = validate_atom(a);
    ValidatedAtom vb = validate_atom(b);
    // Keep detunings well away from zero.
    bool separated = true;
    for (const auto& ta : va.transitions())
      for (const auto& tb : vb.transitions())
        if (std::abs(ta.omega - tb.omega) < 0.02) separated = false;
    if (!separated) continue;
    const double R = std::pow(10.0, -1.0 + 4.0 * uni(rng));
    return {std::move(va), std::move(vb), std::move(field), R};
  }
}

inline std::vector<CheckResult> check_route_equivalence(const CheckOptions& opts) {
  std::mt19937_64 rng(7);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const RandomScenario sc = random_scenario(rng);
    const double closed = resonant(sc.atom_a, sc.atom_b, sc.field, sc.R).value;
    const double tensor =
        resonant_via_green_tensor(sc.atom_a, sc.atom_b, sc.field, SeparationGeometry::along(sc.R));
    worst = std::max(worst, relative_difference(closed, tensor));
  }
  return {detail::make_check("route_equivalence", worst, 1e-12, opts)};
}

inline std::vector<CheckResult> check_matsubara_limits(const CheckOptions& opts) {
  const ValidatedAtom atom = two_level_atom(1.0, 1.0);
  const double cold = nonresonant_thermal_matsubara(atom, atom, 1e-4, 1.0).value;
  const double vac = nonresonant_vacuum(atom, atom, 1.0).value;

  const double alpha0 = polarizability_imag_axis(atom, 0, 0.0).value;
  const double hot = nonresonant_thermal_matsubara(atom, atom, 10.0, 5.0).value;
  const double zero_term = -3.0 * 10.0 * alpha0 * alpha0 / std::pow(5.0, 6);
  return {detail::make_check("matsubara_low_temperature", relative_difference(cold, vac), 1e-3, opts),
          detail::make_check("matsubara_high_temperature", relative_difference(hot, zero_term),
                             1e-12, opts)};
}

inline std::vector<CheckResult> run_limit_checks(const CheckOptions& opts = {}) {
  std::vector<CheckResult> all;
  auto append = [&](std::vector<CheckResult> part) {
    for (auto& c : part) all.push_back(std::move(c));
  };
  append(check_casimir_polder_asymptote(opts));
  append(check_scaling_exponents(opts));
  append(check_detailed_balance(opts));
  append(check_enhancement_factor(opts));
  append(check_contraction_identities(opts));
  append(check_route_equivalence(opts));
  append(check_matsubara_limits(opts));
  return all;
}

}  // namespace dispersion
