#pragma once

// Free-space retarded dyadic Green tensor between two points, and the two
// scalar distance kernels that the closed-form potentials are written in.
//
// Convention: D = w^2 [delta (1 + i/x - 1/x^2) + s s (3/x^2 - 3i/x - 1)] e^{ix}/R
// with x = wR, and no 4*pi factor.

#include <array>
#include <cmath>
#include <complex>

#include "dispersion/error.hpp"

namespace dispersion {

using Vec3 = std::array<double, 3>;
using cdouble = std::complex<double>;

class SeparationGeometry {
 public:
  SeparationGeometry(const Vec3& r, const Vec3& r_prime) : r_(r), r_prime_(r_prime) {
    Vec3 d{r[0] - r_prime[0], r[1] - r_prime[1], r[2] - r_prime[2]};
    distance_ = std::hypot(d[0], d[1], d[2]);
    if (!(distance_ > 0.0) || !std::isfinite(distance_)) {
      throw Error(ErrorCode::ZeroSeparation, "atoms must be at distinct finite positions");
    }
    for (int i = 0; i < 3; ++i) direction_[i] = d[i] / distance_;
  }

  /// Atom A at the origin, atom B at distance R along -s, so that the unit
  /// vector from B to A is `s` (normalized here).
  static SeparationGeometry along(double distance, const Vec3& s = {0.0, 0.0, 1.0}) {
    if (!(distance > 0.0)) throw Error(ErrorCode::ZeroSeparation, "separation must be > 0");
    const double n = std::hypot(s[0], s[1], s[2]);
    if (!(n > 0.0)) throw Error(ErrorCode::InvalidArgument, "direction must be nonzero");
    return SeparationGeometry({0.0, 0.0, 0.0},
                              {-distance * s[0] / n, -distance * s[1] / n, -distance * s[2] / n});
  }

  const Vec3& r() const noexcept { return r_; }
  const Vec3& r_prime() const noexcept { return r_prime_; }
  double distance() const noexcept { return distance_; }
  const Vec3& direction() const noexcept { return direction_; }

 private:
  Vec3 r_;
  Vec3 r_prime_;
  double distance_ = 0.0;
  Vec3 direction_{};
};

struct GreenTensor {
  std::array<std::array<cdouble, 3>, 3> entries{};
  cdouble at_frequency;
  double distance = 0.0;

  const cdouble& operator()(int i, int j) const { return entries[i][j]; }
};

inline GreenTensor retarded_green_tensor(cdouble omega, const SeparationGeometry& geom) {
  if (omega == cdouble(0.0, 0.0)) {
    throw Error(ErrorCode::ZeroFrequency, "Green tensor is evaluated at nonzero frequency");
  }
  const double R = geom.distance();
  const cdouble I(0.0, 1.0);
  const cdouble x = omega * R;
  const cdouble inv_x = 1.0 / x;
  const cdouble inv_x2 = inv_x * inv_x;
  const cdouble transverse = 1.0 + I * inv_x - inv_x2;
  const cdouble longitudinal = 3.0 * inv_x2 - 3.0 * I * inv_x - 1.0;
  const cdouble scale = omega * omega * std::exp(I * x) / R;

  const Vec3& s = geom.direction();
  GreenTensor D;
  D.at_frequency = omega;
  D.distance = R;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const cdouble delta = i == j ? transverse : cdouble(0.0, 0.0);
      D.entries[i][j] = scale * (delta + s[i] * s[j] * longitudinal);
    }
  }
  return D;
}

/// Green tensor at the imaginary frequency iu (u > 0), where every entry is
/// real. Same formula as the complex path; realness is checked.
inline std::array<std::array<double, 3>, 3> retarded_green_tensor_imag(
    double u, const SeparationGeometry& geom) {
  if (!(u > 0.0)) throw Error(ErrorCode::ZeroFrequency, "imaginary frequency must be > 0");
  const GreenTensor D = retarded_green_tensor(cdouble(0.0, u), geom);
  std::array<std::array<double, 3>, 3> out{};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const cdouble v = D.entries[i][j];
      if (std::abs(v.imag()) > 1e-12 * std::abs(v)) {
        throw Error(ErrorCode::InvalidArgument, "imaginary-axis Green tensor is not real");
      }
      out[i][j] = v.real();
    }
  }
  return out;
}

/// sum_{ij} D_ij D_ji
inline cdouble contraction_squared(const GreenTensor& D) {
  cdouble sum(0.0, 0.0);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) sum += D.entries[i][j] * D.entries[j][i];
  return sum;
}

/// sum_{ij} |D_ij|^2
inline double abs_contraction(const GreenTensor& D) {
  double sum = 0.0;
  for (const auto& row : D.entries)
    for (const cdouble& v : row) sum += std::norm(v);
  return sum;
}

/// g(x) = 1 + 2/x + 5/x^2 + 6/x^3 + 3/x^4
inline double kernel_g(double x) {
  if (!(x > 0.0)) throw Error(ErrorCode::NonPositiveArgument, "kernel_g needs x > 0");
  const double y = 1.0 / x;
  return 1.0 + y * (2.0 + y * (5.0 + y * (6.0 + y * 3.0)));
}

/// x^4 g(x) as a polynomial, finite at x = 0 (equals 3 there).
inline double kernel_g_scaled(double x) {
  if (!(x >= 0.0)) throw Error(ErrorCode::NonPositiveArgument, "kernel_g_scaled needs x >= 0");
  return 3.0 + x * (6.0 + x * (5.0 + x * (2.0 + x)));
}

/// h(x) = 1 + 1/x^2 + 3/x^4
inline double kernel_h(double x) {
  if (!(x > 0.0)) throw Error(ErrorCode::NonPositiveArgument, "kernel_h needs x > 0");
  const double y2 = 1.0 / (x * x);
  return 1.0 + y2 * (1.0 + 3.0 * y2);
}

}  // namespace dispersion
