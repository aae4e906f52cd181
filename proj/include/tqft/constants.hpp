#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

namespace tqft {

using Complex = std::complex<double>;

inline constexpr double kPi = std::numbers::pi_v<double>;
inline constexpr Complex kI{0.0, 1.0};

/// Hyperbolic volume of the complement of the 7_3 knot, the target of the
/// semiclassical limit checks throughout this project.
inline constexpr double kVolume73 = 4.592125697027062550196614;

/// Semiclassical coupling.  The family is parametrised by b > 0; the
/// quantisation constant is hbar = (b + 1/b)^-2 and the natural shift
/// constant is c_b = i (b + 1/b) / 2.
struct CouplingConstant {
  double b = 1.0;

  explicit CouplingConstant(double b_val = 1.0) : b(b_val) {
    if (!(b > 0.0) || !std::isfinite(b)) {
      throw std::domain_error("CouplingConstant: b must be positive and finite");
    }
  }

  double q_sum() const { return b + 1.0 / b; }        // b + 1/b
  double hbar() const {
    const double s = q_sum();
    return 1.0 / (s * s);
  }
  Complex c_b() const { return Complex(0.0, 0.5 * q_sum()); }

  /// Half-width of the pole-free horizontal strip of the quantum
  /// dilogarithm: |Im z| < (b + 1/b)/2.
  double strip_half_width() const { return 0.5 * q_sum(); }
};

/// Numerical policy shared by the quadrature-backed special functions.
struct PrecisionConfig {
  /// Absolute accuracy target for function values.
  double abs_tol = 1e-12;
  /// Safety factor multiplying the analytically derived contour truncation
  /// point (1.0 keeps the derived value).
  double contour_truncation = 1.0;
  /// Gauss-Legendre points per quadrature panel.
  int quad_points = 24;
};

}  // namespace tqft
