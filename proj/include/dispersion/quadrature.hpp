#pragma once

// Numerical backbone: adaptive semi-infinite quadrature for exponentially
// decaying integrands, Matsubara summation with a geometric tail bound, and
// least-squares power-law fitting on log-log axes.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dispersion/error.hpp"

namespace dispersion {

struct QuadratureOptions {
  double abs_tol = 0.0;
  double rel_tol = 1e-10;
  std::size_t max_evaluations = 4'000'000;
  /// Polynomial degree p in the assumed envelope |f(v)| <= |f(V)| (v/V)^p e^{-(v-V)}
  /// beyond the truncation point V (in the scaled variable v = u * decay_scale).
  int envelope_degree = 4;
};

struct QuadratureResult {
  double value = 0.0;
  double abs_error_estimate = 0.0;
  std::size_t evaluations = 0;
  double tail_bound = 0.0;
  /// Truncation point in the original variable u.
  double upper_limit = 0.0;
};

/// Compensated (Neumaier) running sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

namespace detail {

// 15-point Kronrod extension of the 7-point Gauss rule on [-1, 1].
inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a = 0.0;
  double b = 0.0;
  double value = 0.0;
  double error = 0.0;
};

template <class F>
Panel gauss_kronrod_15(F& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod = fc * kKronrodWeights[7];
  double gauss = fc * kGaussWeights[3];
  for (int i = 0; i < 7; ++i) {
    const double dx = half * kKronrodNodes[i];
    const double pair = f(center - dx) + f(center + dx);
    kronrod += kKronrodWeights[i] * pair;
    if (i % 2 == 1) gauss += kGaussWeights[i / 2] * pair;
  }
  return {a, b, kronrod * half, std::abs((kronrod - gauss) * half)};
}

}  // namespace detail

/// Integral of f over [0, inf) for f continuous on (0, inf) whose magnitude
/// decays like e^{-u * decay_scale} times a polynomial of degree at most
/// `envelope_degree`. Internally the problem is rescaled to v = u * decay_scale
/// and refined adaptively on [0, V]; V grows until the analytic envelope bound
/// on the tail drops below a tenth of the target error.
template <class F>
QuadratureResult integrate_semi_infinite(F&& f, double decay_scale,
                                         const QuadratureOptions& opts) {
  if (!(decay_scale > 0.0) || !std::isfinite(decay_scale)) {
    throw Error(ErrorCode::InvalidArgument, "decay_scale must be finite and > 0");
  }
  if (!(opts.abs_tol > 0.0) && !(opts.rel_tol > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "at least one tolerance must be > 0");
  }

  std::size_t evaluations = 0;
  auto scaled = [&](double v) {
    ++evaluations;
    const double y = f(v / decay_scale) / decay_scale;
    if (!std::isfinite(y)) {
      throw Error(ErrorCode::QuadratureFailure,
                  "integrand is not finite at u = " + std::to_string(v / decay_scale));
    }
    return y;
  };

  const double p = static_cast<double>(std::max(opts.envelope_degree, 0));
  auto tail_bound = [&](double V) {
    ++evaluations;
    return std::abs(f(V / decay_scale) / decay_scale) / (1.0 - p / V);
  };

  // Graded initial partition so features near the origin are seen early.
  std::vector<detail::Panel> panels;
  double upper = std::max(4.0 * p + 8.0, 16.0);
  {
    double lo = 0.0;
    for (double hi = 1.0 / 64.0; hi < upper; hi *= 2.0) {
      panels.push_back(detail::gauss_kronrod_15(scaled, lo, hi));
      lo = hi;
    }
    panels.push_back(detail::gauss_kronrod_15(scaled, lo, upper));
  }

  auto by_error = [](const detail::Panel& x, const detail::Panel& y) { return x.error < y.error; };
  std::make_heap(panels.begin(), panels.end(), by_error);

  constexpr double kEps = std::numeric_limits<double>::epsilon();
  while (true) {
    CompensatedSum total;
    CompensatedSum total_err;
    for (const auto& panel : panels) {
      total.add(panel.value);
      total_err.add(panel.error);
    }
    const double value = total.value();
    const double target = std::max(opts.abs_tol, opts.rel_tol * std::abs(value));
    const double tail = tail_bound(upper);

    if (tail > 0.1 * target) {
      const double next = 2.0 * upper;
      detail::Panel extension = detail::gauss_kronrod_15(scaled, upper, next);
      panels.push_back(extension);
      std::push_heap(panels.begin(), panels.end(), by_error);
      upper = next;
    } else if (total_err.value() + tail <= target) {
      QuadratureResult result;
      result.value = value;
      result.abs_error_estimate = total_err.value() + tail;
      result.evaluations = evaluations;
      result.tail_bound = tail;
      result.upper_limit = upper / decay_scale;
      return result;
    } else {
      std::pop_heap(panels.begin(), panels.end(), by_error);
      const detail::Panel worst = panels.back();
      const double mid = 0.5 * (worst.a + worst.b);
      if (worst.b - worst.a <= 16.0 * kEps * std::max(std::abs(mid), 1e-300) ||
          worst.error <= 64.0 * kEps * std::abs(worst.value)) {
        throw Error(ErrorCode::QuadratureFailure,
                    "tolerance below attainable precision near u = " +
                        std::to_string(mid / decay_scale));
      }
      panels.back() = detail::gauss_kronrod_15(scaled, worst.a, mid);
      std::push_heap(panels.begin(), panels.end(), by_error);
      panels.push_back(detail::gauss_kronrod_15(scaled, mid, worst.b));
      std::push_heap(panels.begin(), panels.end(), by_error);
    }

    if (evaluations > opts.max_evaluations) {
      throw Error(ErrorCode::BudgetExceeded,
                  "quadrature used " + std::to_string(evaluations) + " evaluations");
    }
    if (!std::isfinite(upper)) {
      throw Error(ErrorCode::QuadratureFailure, "integrand tail does not decay");
    }
  }
}

template <class F>
QuadratureResult integrate_semi_infinite(F&& f, double decay_scale, double tol) {
  if (!(tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "tolerance must be > 0");
  QuadratureOptions opts;
  opts.abs_tol = tol;
  opts.rel_tol = 0.0;
  return integrate_semi_infinite(std::forward<F>(f), decay_scale, opts);
}

/// Matsubara frequencies xi_m = 2 pi m T with weights 1/2 at m = 0 and 1 after.
struct MatsubaraGrid {
  double temperature = 0.0;

  explicit MatsubaraGrid(double t) : temperature(t) {
    if (!(t > 0.0)) throw Error(ErrorCode::NonPositiveTemperature, "temperature must be > 0");
  }
  double frequency(long m) const { return 2.0 * std::numbers::pi * static_cast<double>(m) * temperature; }
  static double weight(long m) { return m == 0 ? 0.5 : 1.0; }
};

struct MatsubaraOptions {
  double abs_tol = 0.0;
  double rel_tol = 1e-13;
  long first = 0;
  /// Index from which |term(m+1)| <= ratio * |term(m)| is guaranteed.
  long ratio_from = 1;
  long max_terms = 100'000'000;
};

struct SummationResult {
  double value = 0.0;
  double tail_bound = 0.0;
  long terms = 0;
};

/// sum_{m >= first} w_m term(m). Summation stops at the first index M past
/// `ratio_from` where the geometric bound |w_M term(M)| q / (1 - q) on the
/// remainder is below tolerance. A term that grows faster than the declared
/// ratio raises RatioBoundViolated.
template <class Term>
SummationResult matsubara_sum(Term&& term, const MatsubaraGrid&, double ratio_bound,
                              const MatsubaraOptions& opts) {
  if (!(ratio_bound > 0.0 && ratio_bound < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "ratio bound must lie in (0, 1)");
  }
  if (!(opts.abs_tol > 0.0) && !(opts.rel_tol > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "at least one tolerance must be > 0");
  }
  const double slack = 1.0 + 1e-12;
  CompensatedSum sum;
  double previous = 0.0;
  for (long m = opts.first; m < opts.first + opts.max_terms; ++m) {
    const double t = MatsubaraGrid::weight(m) * term(m);
    if (!std::isfinite(t)) {
      throw Error(ErrorCode::RatioBoundViolated, "term " + std::to_string(m) + " is not finite");
    }
    if (m > opts.first && m - 1 >= opts.ratio_from &&
        std::abs(t) > ratio_bound * std::abs(previous) * slack) {
      throw Error(ErrorCode::RatioBoundViolated,
                  "term " + std::to_string(m) + " decays slower than ratio " +
                      std::to_string(ratio_bound));
    }
    sum.add(t);
    previous = t;
    if (m >= opts.ratio_from) {
      const double tail = std::abs(t) * ratio_bound / (1.0 - ratio_bound);
      const double target = std::max(opts.abs_tol, opts.rel_tol * std::abs(sum.value()));
      if (tail < target || t == 0.0) {
        return {sum.value(), tail, m - opts.first + 1};
      }
    }
  }
  throw Error(ErrorCode::BudgetExceeded,
              "Matsubara sum did not converge within " + std::to_string(opts.max_terms) + " terms");
}

template <class Term>
SummationResult matsubara_sum(Term&& term, const MatsubaraGrid& grid, double ratio_bound,
                              double tol, long first = 0) {
  if (!(tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "tolerance must be > 0");
  MatsubaraOptions opts;
  opts.abs_tol = tol;
  opts.rel_tol = 0.0;
  opts.first = first;
  opts.ratio_from = first;
  return matsubara_sum(std::forward<Term>(term), grid, ratio_bound, opts);
}

/// Fit of |U| = exp(intercept) * R^exponent on natural-log axes.
struct PowerLawFit {
  double exponent = 0.0;
  double intercept = 0.0;
  double stderr_exponent = 0.0;
  std::size_t points_used = 0;
};

inline PowerLawFit fit_power_law(std::span<const std::pair<double, double>> points) {
  if (points.size() < 3) throw Error(ErrorCode::TooFewPoints, "power-law fit needs >= 3 points");
  const bool negative = points.front().second < 0.0;
  for (const auto& [r, u] : points) {
    if (!(r > 0.0)) throw Error(ErrorCode::InvalidArgument, "separations must be > 0");
    if (u == 0.0 || !std::isfinite(u) || (u < 0.0) != negative) {
      throw Error(ErrorCode::SignChange, "values must be nonzero and of one sign");
    }
  }
  const double n = static_cast<double>(points.size());
  double mx = 0.0, my = 0.0;
  for (const auto& [r, u] : points) {
    mx += std::log(r);
    my += std::log(std::abs(u));
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [r, u] : points) {
    const double dx = std::log(r) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(std::abs(u)) - my);
  }
  if (!(sxx > 0.0)) throw Error(ErrorCode::InvalidArgument, "separations must not all coincide");
  PowerLawFit fit;
  fit.exponent = sxy / sxx;
  fit.intercept = my - fit.exponent * mx;
  double ssr = 0.0;
  for (const auto& [r, u] : points) {
    const double res = std::log(std::abs(u)) - (fit.intercept + fit.exponent * std::log(r));
    ssr += res * res;
  }
  fit.stderr_exponent = points.size() > 2 ? std::sqrt(ssr / (n - 2.0) / sxx) : 0.0;
  fit.points_used = points.size();
  return fit;
}

inline PowerLawFit fit_power_law(const std::vector<std::pair<double, double>>& points) {
  return fit_power_law(std::span<const std::pair<double, double>>(points));
}

}  // namespace dispersion
