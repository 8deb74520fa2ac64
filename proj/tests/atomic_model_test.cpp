#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "dispersion/atomic_model.hpp"

using namespace dispersion;

namespace {

AtomSpec two_level(double omega = 1.0, double d2 = 1.0) {
  AtomSpec s;
  s.levels = {0.0, omega};
  s.transitions = {{0, 1, std::nullopt, d2}};
  s.populations = {{0, 1.0}};
  return s;
}

void expect_code(ErrorCode code, auto&& fn) {
  try {
    fn();
    FAIL() << "expected " << to_string(code);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

}  // namespace

TEST(ValidateAtom, MinimalTwoLevel) {
  const ValidatedAtom atom = validate_atom(two_level());
  ASSERT_EQ(atom.transitions().size(), 1u);
  EXPECT_DOUBLE_EQ(atom.transitions()[0].omega, 1.0);
  EXPECT_EQ(atom.transitions()[0].lower, 0u);
  EXPECT_EQ(atom.transitions()[0].upper, 1u);
  EXPECT_EQ(atom.pure_state(), 0u);
  EXPECT_EQ(atom.ground_state(), 0u);
}

TEST(ValidateAtom, Errors) {
  AtomSpec bad_pop = two_level();
  bad_pop.populations = {{0, 0.5}, {1, 0.6}};
  expect_code(ErrorCode::PopulationNotNormalized, [&] { validate_atom(bad_pop); });

  AtomSpec zero_dipole = two_level(1.0, 0.0);
  expect_code(ErrorCode::NonPositiveDipole, [&] { validate_atom(zero_dipole); });

  AtomSpec wrong_omega = two_level();
  wrong_omega.transitions[0].omega = 1.1;
  expect_code(ErrorCode::InconsistentTransitionEnergy, [&] { validate_atom(wrong_omega); });

  AtomSpec degenerate;
  degenerate.levels = {0.0, 0.0};
  degenerate.transitions = {{0, 1, std::nullopt, 1.0}};
  degenerate.populations = {{0, 1.0}};
  expect_code(ErrorCode::InconsistentTransitionEnergy, [&] { validate_atom(degenerate); });

  AtomSpec dup = two_level();
  dup.transitions.push_back({1, 0, std::nullopt, 2.0});
  expect_code(ErrorCode::DuplicateTransition, [&] { validate_atom(dup); });

  AtomSpec out_of_range = two_level();
  out_of_range.transitions[0].to_state = 5;
  expect_code(ErrorCode::InvalidLevelIndex, [&] { validate_atom(out_of_range); });
}

TEST(ValidateAtom, NormalizesAndOrients) {
  AtomSpec s;
  s.levels = {0.0, 2.0, 0.5};
  s.transitions = {{1, 0, -2.0, 1.0}, {0, 2, 0.5, 0.3}, {2, 1, std::nullopt, 0.2}};
  s.populations = {{0, 0.5}, {2, 0.5 + 5e-10}};
  const ValidatedAtom atom = validate_atom(s);
  const auto& t = atom.transitions();
  ASSERT_EQ(t.size(), 3u);
  EXPECT_DOUBLE_EQ(t[0].omega, 0.5);
  EXPECT_DOUBLE_EQ(t[1].omega, 1.5);
  EXPECT_DOUBLE_EQ(t[2].omega, 2.0);
  for (const auto& tr : t) EXPECT_GT(tr.omega, 0.0);
  EXPECT_EQ(t[2].lower, 0u);
  EXPECT_EQ(t[2].upper, 1u);
  double sum = 0.0;
  for (double p : atom.populations()) sum += p;
  EXPECT_NEAR(sum, 1.0, 1e-12);
  EXPECT_FALSE(atom.pure_state().has_value());
}

TEST(ValidateAtom, SharedFrequenciesStaySeparate) {
  AtomSpec s;
  s.levels = {0.0, 1.0, 2.0};
  s.transitions = {{0, 1, std::nullopt, 1.0}, {1, 2, std::nullopt, 0.5}};
  s.populations = {{0, 1.0}};
  const ValidatedAtom atom = validate_atom(s);
  EXPECT_EQ(atom.transitions().size(), 2u);
  EXPECT_EQ(atom.transitions()[0].omega, atom.transitions()[1].omega);
}

TEST(PolarizabilityReal, StaticAndOffResonance) {
  const ValidatedAtom atom = validate_atom(two_level());
  EXPECT_DOUBLE_EQ(polarizability_real(atom, 0, 0.0).value, 2.0 / 3.0);
  // (2/3) / (1 - 0.64)
  EXPECT_NEAR(polarizability_real(atom, 0, 0.8).value, 1.8518518518518519, 1e-15);
}

TEST(PolarizabilityReal, OnResonanceIsRefused) {
  const ValidatedAtom atom = validate_atom(two_level());
  expect_code(ErrorCode::OnResonance, [&] { polarizability_real(atom, 0, 1.0); });
  expect_code(ErrorCode::OnResonance, [&] { polarizability_real(atom, 0, 1.0 + 1e-12); });
  EXPECT_NO_THROW(polarizability_real(atom, 0, 1.0 + 1e-6));
}

TEST(PolarizabilityReal, EvenInFrequency) {
  AtomSpec s;
  s.levels = {0.0, 0.7, 1.9};
  s.transitions = {{0, 1, std::nullopt, 1.0}, {0, 2, std::nullopt, 0.4}, {1, 2, std::nullopt, 0.3}};
  s.populations = {{1, 1.0}};
  const ValidatedAtom atom = validate_atom(s);
  for (std::size_t k = 0; k < 3; ++k) {
    for (double w : {0.1, 0.5, 1.0, 3.0}) {
      EXPECT_EQ(polarizability_real(atom, k, w).value, polarizability_real(atom, k, -w).value);
    }
  }
}

TEST(PolarizabilityImagAxis, Values) {
  const ValidatedAtom atom = validate_atom(two_level());
  EXPECT_DOUBLE_EQ(polarizability_imag_axis(atom, 0, 0.0).value, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(polarizability_imag_axis(atom, 0, 1.0).value, 1.0 / 3.0);
  EXPECT_LT(polarizability_imag_axis(atom, 0, 1e8).value, 1e-15);
}

TEST(PolarizabilityImagAxis, MatchesRealAxisAtZero) {
  AtomSpec s;
  s.levels = {0.0, 0.3, 1.1, 2.5};
  s.transitions = {{0, 1, std::nullopt, 0.4}, {0, 3, std::nullopt, 2.0}, {1, 2, std::nullopt, 1.0}};
  s.populations = {{0, 1.0}};
  const ValidatedAtom atom = validate_atom(s);
  for (std::size_t k = 0; k < 4; ++k) {
    EXPECT_EQ(polarizability_imag_axis(atom, k, 0.0).value, polarizability_real(atom, k, 0.0).value);
  }
}

TEST(PolarizabilityImagAxis, GroundStateIsPositiveAndNonIncreasing) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> uni(0.05, 3.0);
  for (int trial = 0; trial < 25; ++trial) {
    AtomSpec s;
    s.levels = {0.0, uni(rng), uni(rng) + 3.0, uni(rng) + 6.0};
    s.transitions = {{0, 1, std::nullopt, uni(rng)}, {0, 2, std::nullopt, uni(rng)},
                     {0, 3, std::nullopt, uni(rng)}, {1, 2, std::nullopt, uni(rng)}};
    s.populations = {{0, 1.0}};
    const ValidatedAtom atom = validate_atom(s);
    double previous = polarizability_imag_axis(atom, 0, 0.0).value;
    for (double u = 1e-3; u < 1e4; u *= 1.2) {
      const double a = polarizability_imag_axis(atom, 0, u).value;
      EXPECT_GT(a, 0.0);
      EXPECT_LE(a, previous);
      previous = a;
    }
  }
}

TEST(MixedPolarizability, PureStateAgrees) {
  AtomSpec s = two_level(0.9, 1.3);
  const ValidatedAtom atom = validate_atom(s);
  for (double u : {0.0, 0.2, 5.0}) {
    EXPECT_DOUBLE_EQ(mixed_polarizability_imag_axis(atom, u),
                     polarizability_imag_axis(atom, 0, u).value);
  }
  const ValidatedAtom excited = atom.with_populations({0.0, 1.0});
  EXPECT_DOUBLE_EQ(mixed_polarizability_imag_axis(excited, 0.3),
                   polarizability_imag_axis(excited, 1, 0.3).value);
  EXPECT_LT(mixed_polarizability_imag_axis(excited, 0.3), 0.0);
}

TEST(Boltzmann, Limits) {
  const auto cold = boltzmann_populations({0.0, 1.0}, 1e-4);
  EXPECT_EQ(cold[0], 1.0);
  EXPECT_EQ(cold[1], 0.0);

  const auto flat = boltzmann_populations({0.0, 0.0}, 3.0);
  EXPECT_EQ(flat[0], 0.5);
  EXPECT_EQ(flat[1], 0.5);

  const auto unit = boltzmann_populations({0.0, 1.0}, 1.0);
  EXPECT_NEAR(unit[1] / unit[0], 0.36787944117144233, 1e-15);

  EXPECT_THROW(boltzmann_populations({0.0, 1.0}, 0.0), Error);
}

TEST(Boltzmann, PairRatios) {
  const std::vector<double> levels = {0.3, -0.2, 1.7, 0.9, 2.4};
  for (double T : {0.1, 0.7, 4.0}) {
    const auto p = boltzmann_populations(levels, T);
    double sum = 0.0;
    for (double v : p) sum += v;
    EXPECT_NEAR(sum, 1.0, 1e-14);
    for (std::size_t m = 0; m < levels.size(); ++m) {
      for (std::size_t n = 0; n < levels.size(); ++n) {
        const double expected = std::exp(-(levels[m] - levels[n]) / T);
        EXPECT_NEAR(p[m] / p[n], expected, 1e-12 * expected);
      }
    }
  }
}
