// Acceptance suite: one PASS/FAIL line per criterion. Expected values are
// computed here (closed forms, fixed-grid and brute-force references, an
// independent least-squares fit) and never taken from the library.

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dispersion/dispersion.hpp"
#include "dispersion/limits.hpp"
#include "oracles.hpp"

using namespace dispersion;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool passed;
  std::string detail;
};

double rel(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale < 1e-290 ? 0.0 : std::abs(a - b) / scale;
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

ValidatedAtom two_level(double omega, bool excited = false) {
  AtomSpec s;
  s.levels = {0.0, omega};
  s.transitions = {{0, 1, std::nullopt, 1.0}};
  s.populations = {{excited ? std::size_t{1} : std::size_t{0}, 1.0}};
  return validate_atom(s);
}

std::vector<double> geometric(double lo, double hi, int n) {
  std::vector<double> out;
  for (int i = 0; i < n; ++i) out.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1)));
  return out;
}

// Ordinary least-squares slope of log|y| against log x.
double slope(const std::vector<double>& xs, const std::function<double(double)>& f) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(xs.size());
  for (double x : xs) {
    const double lx = std::log(x), ly = std::log(std::abs(f(x)));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// alpha(0) of a unit two-level atom
constexpr double kAlpha0 = 2.0 / 3.0;

Outcome casimir_polder() {
  const ValidatedAtom a = two_level(1.0);
  std::string detail;
  bool ok = true;
  for (auto [R, tol] : {std::pair{100.0, 0.02}, std::pair{1000.0, 0.002}}) {
    // -(alpha^2/(pi R^7)) * 23/4
    const double asymptote = -23.0 * kAlpha0 * kAlpha0 / (4.0 * kPi * std::pow(R, 7));
    const double d = rel(nonresonant_vacuum(a, a, R).value, asymptote);
    ok = ok && d <= tol;
    detail += fmt("R=%g rel=%.2e ", R, d);
  }
  return {ok, detail};
}

Outcome scaling() {
  const ValidatedAtom a = two_level(1.0);
  const ValidatedAtom b = two_level(0.8);
  const ValidatedAtom b_exc = two_level(0.8, true);
  const double retarded = slope(geometric(30, 300, 9), [&](double R) { return nonresonant_vacuum(a, a, R).value; });
  const double london = slope(geometric(1e-3, 1e-2, 9), [&](double R) { return nonresonant_vacuum(a, a, R).value; });
  const auto band = FieldOccupation::narrowband(0.8, 0.05, 1.0);
  // resonant kernels are in omega_B R
  const auto grid_b = geometric(30 / 0.8, 300 / 0.8, 9);
  const double absorb = slope(grid_b, [&](double R) { return resonant(a, b, band, R).value; });
  const double emit = slope(grid_b, [&](double R) { return resonant(a, b_exc, FieldOccupation::vacuum(), R).value; });
  const bool ok = std::abs(retarded + 7) <= 0.1 && std::abs(london + 6) <= 0.05 && std::abs(absorb + 2) <= 0.01 &&
                  std::abs(emit + 2) <= 0.01;
  return {ok, fmt("retarded=%.4f london=%.4f", retarded, london) + fmt(" resonant=%.4f/%.4f", absorb, emit)};
}

Outcome detailed_balance() {
  AtomSpec s;
  s.levels = {0.0, 0.35, 1.1};
  s.transitions = {{0, 1, std::nullopt, 1.0}, {1, 2, std::nullopt, 0.5}, {0, 2, std::nullopt, 0.25}};
  s.populations = {{0, 1.0}};
  const ValidatedAtom b0 = validate_atom(s);
  const ValidatedAtom a = two_level(1.0);
  double worst_total = 0, worst_pair = 0;
  for (double T : {0.1, 0.6, 3.0}) {
    std::vector<double> p(3);
    double z = 0;
    for (int i = 0; i < 3; ++i) z += (p[i] = std::exp(-s.levels[i] / T));
    for (double& v : p) v /= z;
    const ValidatedAtom b = b0.with_populations(p);
    for (double R : {0.3, 7.0, 150.0}) {
      const ResonantResult r = resonant(a, b, FieldOccupation::thermal(T), R);
      double biggest = 0;
      std::map<std::pair<std::size_t, std::size_t>, std::pair<double, double>> pairs;
      for (const auto& t : r.terms) {
        biggest = std::max(biggest, std::abs(t.value));
        auto& slot = pairs[{std::min(t.b_initial, t.b_final), std::max(t.b_initial, t.b_final)}];
        slot.first += t.value;
        slot.second = std::max(slot.second, std::abs(t.value));
      }
      if (biggest == 0 || pairs.size() != 3) return {false, "missing terms"};
      worst_total = std::max(worst_total, std::abs(r.value) / biggest);
      for (const auto& [key, v] : pairs) worst_pair = std::max(worst_pair, std::abs(v.first) / v.second);
    }
  }
  return {worst_total <= 1e-12 && worst_pair <= 1e-12, fmt("total=%.2e pair=%.2e", worst_total, worst_pair)};
}

Outcome enhancement() {
  const ValidatedAtom a = two_level(1.0);
  const ValidatedAtom b = two_level(0.8, true);
  const double R = 12.0;
  const double vac = resonant(a, b, FieldOccupation::vacuum(), R).value;
  double worst = 0;
  for (double n0 : {0.5, 1.0, 2.0, 10.0}) {
    const double driven = resonant(a, b, FieldOccupation::narrowband(0.8, 0.02, n0), R).value;
    worst = std::max(worst, rel(driven, (n0 + 1) * vac));
  }
  return {worst <= 1e-14, fmt("rel=%.2e", worst)};
}

Outcome contractions() {
  std::mt19937_64 rng(314159);
  std::normal_distribution<double> normal;
  double worst_i = 0, worst_r = 0;
  const double R = 0.6;
  for (int k = 0; k < 10; ++k) {
    Vec3 s{normal(rng), normal(rng), normal(rng)};
    const double n = std::hypot(s[0], s[1], s[2]);
    for (double& v : s) v /= n;
    const auto geom = SeparationGeometry::along(R, s);
    for (double x : geometric(1e-3, 1e3, 50)) {
      const double w = x / R;
      const double g = 1 + 2 / x + 5 / (x * x) + 6 / std::pow(x, 3) + 3 / std::pow(x, 4);
      const double h = 1 + 1 / (x * x) + 3 / std::pow(x, 4);
      worst_i = std::max(worst_i, rel(contraction_squared(retarded_green_tensor(cdouble(0, w), geom)).real(),
                                      2 * std::pow(w, 4) * g * std::exp(-2 * x) / (R * R)));
      worst_r = std::max(worst_r, rel(abs_contraction(retarded_green_tensor(cdouble(w, 0), geom)),
                                      2 * std::pow(w, 4) * h / (R * R)));
    }
  }
  return {worst_i <= 1e-12 && worst_r <= 1e-12, fmt("imag=%.2e real=%.2e", worst_i, worst_r)};
}

Outcome route_equivalence() {
  std::mt19937_64 rng(8675309);
  double worst = 0;
  for (int i = 0; i < 20; ++i) {
    const RandomScenario sc = random_scenario(rng);
    const double closed = resonant(sc.atom_a, sc.atom_b, sc.field, sc.R).value;
    const double tensor = resonant_via_green_tensor(sc.atom_a, sc.atom_b, sc.field, SeparationGeometry::along(sc.R));
    worst = std::max(worst, rel(closed, tensor));
  }
  return {worst <= 1e-12, fmt("rel=%.2e", worst)};
}

Outcome matsubara() {
  const ValidatedAtom a = two_level(1.0);
  const double cold = rel(nonresonant_thermal_matsubara(a, a, 1e-4, 1.0).value, nonresonant_vacuum(a, a, 1.0).value);
  const double hot =
      rel(nonresonant_thermal_matsubara(a, a, 10.0, 5.0).value, -3.0 * 10.0 * kAlpha0 * kAlpha0 / std::pow(5.0, 6));
  return {cold <= 1e-3 && hot <= 1e-12, fmt("T=1e-4 rel=%.2e T=10 rel=%.2e", cold, hot)};
}

Outcome oracles() {
  double worst = 0;
  // Adaptive integral vs Simpson on 10^6 panels.
  for (auto [R, wb, u_max] : {std::tuple{0.1, 1.0, 400.0}, std::tuple{2.0, 0.5, 25.0}, std::tuple{40.0, 1.0, 1.0}}) {
    const double ref = oracle::simpson([&](double u) { return oracle::cp_integrand(u, R, 1, 1, wb, 1); }, 0, u_max,
                                       1'000'000);
    worst = std::max(worst, rel(nonresonant_vacuum(two_level(1.0), two_level(wb), R).value, ref));
  }
  {
    auto f = [](double u) { return std::exp(-u) * u / (1 + u * u * u); };
    const double ref = oracle::simpson(f, 0, 60, 1'000'000);
    worst = std::max(worst, rel(integrate_semi_infinite(f, 1.0, QuadratureOptions{}).value, ref));
  }
  // Matsubara sum vs the first 10^4 terms added directly.
  for (auto [T, R] : {std::pair{0.05, 3.0}, std::pair{0.4, 1.0}}) {
    const double brute = oracle::brute_sum(
        [&](long m) {
          const double xi = 2 * kPi * m * T;
          const double w = m == 0 ? 0.5 : 1.0;
          const double u4g = m == 0 ? 3 / std::pow(R, 4) : std::pow(xi, 4) * (1 + 2 / (xi * R) + 5 / std::pow(xi * R, 2) + 6 / std::pow(xi * R, 3) + 3 / std::pow(xi * R, 4));
          const double al = oracle::two_level_alpha_imag(1, 1, xi);
          return -2 * T / (R * R) * w * al * al * u4g * std::exp(-2 * xi * R);
        },
        0, 10'000);
    worst = std::max(worst, rel(nonresonant_thermal_matsubara(two_level(1.0), two_level(1.0), T, R).value, brute));
  }
  return {worst <= 1e-9, fmt("rel=%.2e", worst)};
}

int exit_status(const std::string& cmd) {
  const int raw = std::system(cmd.c_str());
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome cli_determinism() {
  const std::string cli = CLI_PATH;
  const std::string cfg = std::string(SCENARIO_DIR) + "/thermal_lifshitz.json";
  const std::string tmp = std::filesystem::temp_directory_path().string() + "/";
  const std::string first = tmp + "acceptance_scan_1.csv", second = tmp + "acceptance_scan_2.csv";
  const int s1 = exit_status(cli + " scan --config " + cfg + " --output " + first);
  const int s2 = exit_status(cli + " scan --config " + cfg + " --output " + second);
  const std::string a = slurp(first), b = slurp(second);
  const bool same = s1 == 0 && s2 == 0 && !a.empty() && a == b;
  const int good = exit_status(cli + " check-limits --output " + tmp + "acceptance_checks.txt");
  const int tight = exit_status(cli + " check-limits --tolerance-scale 1e-30 --output " + tmp + "acceptance_checks_tight.txt");
  std::remove(first.c_str());
  std::remove(second.c_str());
  return {same && good == 0 && tight == 3,
          std::string(same ? "identical" : "DIFFERENT") + " scans, check-limits exit " + std::to_string(good) +
              " / violated " + std::to_string(tight)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, Outcome (*)()>> criteria = {
      {"1 casimir-polder asymptote", casimir_polder},
      {"2 scaling exponents", scaling},
      {"3 detailed-balance cancellation", detailed_balance},
      {"4 enhancement factor", enhancement},
      {"5 contraction identities", contractions},
      {"6 closed form vs tensor route", route_equivalence},
      {"7 matsubara consistency", matsubara},
      {"8 quadrature and summation oracles", oracles},
      {"9 cli determinism and exit codes", cli_determinism},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    std::printf("%s  %-36s %s\n", o.passed ? "PASS" : "FAIL", name, o.detail.c_str());
    failed += !o.passed;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
