#pragma once

#include <array>
#include <string>
#include <vector>

#include "tqft/constants.hpp"
#include "tqft/triangulation.hpp"

namespace tqft {

/// One horizontal integration line R + i*offset, truncated to
/// [-half_width, +half_width] and discretised by equal-width panels
/// carrying a Gauss-Legendre rule with `points` nodes each.
struct ContourSpec {
  double offset = 0.0;
  double half_width = 0.0;
  int points = 16;
};

/// Outcome of a certified contour integral.  The value is reported in log
/// form, log_value = log|I| + i arg I, so that strongly scaled integrals
/// remain representable.
struct QuadratureResult {
  Complex log_value{0.0, 0.0};
  /// Relative change under the final refinement step (error proxy).
  double rel_err_bound = 0.0;
  /// Largest ratio of the integrand envelope on the outermost panels to its
  /// global maximum, across all axes; certifies window truncation.
  double decay_certificate = 0.0;
  int refinements = 0;
  /// Total number of integrand samples consumed across levels.
  long long evaluations = 0;
  /// True when both the refinement and the decay criteria were met.
  bool certified = false;

  /// exp(log_value); may overflow or underflow for extreme exponents.
  Complex value() const;
};

/// Knobs for the oscillatory-integral evaluator.
struct IntegratorOptions {
  /// Gauss-Legendre nodes per panel at the coarsest level.
  int points = 16;
  /// Refinement stops once the relative change drops below rel_tol.
  double rel_tol = 1e-6;
  /// Maximum number of point-doubling refinements after the base level.
  int max_refinements = 2;
  /// Envelope drop used to size the integration windows.
  double tail_tol = 1e-13;
  /// Required decay certificate at the window edges.
  double edge_tol = 1e-12;
  /// Worker threads: 0 = use TQFT_THREADS or hardware concurrency.
  int threads = 0;
};

/// Number of worker threads to use: `requested` when positive, otherwise
/// the TQFT_THREADS environment variable, otherwise hardware concurrency.
int resolve_threads(int requested);

// ---------------------------------------------------------------------------
// Partition-function integrals
// ---------------------------------------------------------------------------
//
// The three-dimensional form evaluated here is
//
//   J(b) = Int dY dZ dW  e^{2 pi i (Y^2 - Y Z + Z W + W^2/2)}
//                        e^{(pi/sqrt(hbar)) (-Y + W)}
//                        Phi_b(Z) / (Phi_b(Y) Phi_b(W)^3)
//
// over horizontal lines whose imaginary offsets are fixed by a positive
// angle triple a = (a1, a2, a3) (in turns):
//
//   Y: -(1 - 2 a1) / (2 sqrt(hbar))
//   Z: +(1 - 2 a2) / (2 sqrt(hbar))
//   W: -(1 - 2 a3) / (2 sqrt(hbar))
//
// Integrating out the hub variable Z exactly turns it into the equivalent
// two-dimensional form
//
//   J(b) = e^{-i pi (1 + 1/hbar)/12}
//          Int dx dy  e^{i pi (2 x^2 + y^2)}
//                     / (Phi_b(x) Phi_b(x - y - c_b) Phi_b(y)^3)
//
// over the Y- and W-lines above.  Both evaluators return the same complex
// number up to quadrature error.

/// Default contours for the three-dimensional form; throws
/// std::invalid_argument when the angle triple leaves an analyticity strip
/// or gives a non-decaying integrand envelope along any axis direction.
std::array<ContourSpec, 3> contours_3d(const CouplingConstant& cc,
                                       const std::array<double, 3>& a,
                                       const IntegratorOptions& opt = {});

/// Default contours for the two-dimensional form.  On top of the
/// three-dimensional validation this requires 0 < a1 - a3 < 1/2 so the
/// coupled factor Phi_b(x - y - c_b) keeps its argument strictly inside
/// the pole-free strip.
std::array<ContourSpec, 2> contours_2d(const CouplingConstant& cc,
                                       const std::array<double, 3>& a,
                                       const IntegratorOptions& opt = {});

/// Three-dimensional evaluation on the default contours.
QuadratureResult integrate_JX_3d(const CouplingConstant& cc,
                                 const std::array<double, 3>& a,
                                 const IntegratorOptions& opt = {});

/// Three-dimensional evaluation on caller-supplied contours.
QuadratureResult integrate_JX_3d_on(const CouplingConstant& cc,
                                    const std::array<ContourSpec, 3>& lines,
                                    const IntegratorOptions& opt = {});

/// Two-dimensional evaluation on the default contours.
QuadratureResult integrate_JX_2d(const CouplingConstant& cc,
                                 const std::array<double, 3>& a,
                                 const IntegratorOptions& opt = {});

/// Two-dimensional evaluation on caller-supplied contours.
QuadratureResult integrate_JX_2d_on(const CouplingConstant& cc,
                                    const std::array<ContourSpec, 2>& lines,
                                    const IntegratorOptions& opt = {});

/// Envelope decay rates (per unit length, positive = decaying) of the
/// three-dimensional integrand along the +/- directions of the Y, Z and W
/// axes, in the order Y+, Y-, Z+, Z-, W+, W-.
std::array<double, 6> decay_rates_3d(const CouplingConstant& cc,
                                     const std::array<double, 3>& offsets);

/// Same for the two-dimensional form: x+, x-, y+, y-.
std::array<double, 4> decay_rates_2d(const CouplingConstant& cc,
                                     const std::array<double, 2>& offsets);

// ---------------------------------------------------------------------------
// Saddle-point estimates
// ---------------------------------------------------------------------------

/// log of the steepest-descent estimate of the rescaled (y-space) integral:
///   rho' hbar^{3/2} e^{S0 / (2 pi hbar)},  rho' = (2 pi)^3 / sqrt(det H).
/// sqrt(det H) enters on the branch -principal_sqrt(det H); the orientation
/// was fixed once by matching the quadrature phase at b = 0.5 and is frozen.
Complex log_saddle_integral(const CouplingConstant& cc, Complex S0,
                            Complex det_hess);

/// log of the matching estimate of J itself (divides out the Jacobian of
/// the y -> u rescaling):  -e^{S0/(2 pi hbar)} / principal_sqrt(det H).
Complex log_saddle_estimate_J(const CouplingConstant& cc, Complex S0,
                              Complex det_hess);

/// Value form of log_saddle_integral; representable throughout the
/// feasible coupling range (the exponent stays above about -10^2).
Complex saddle_estimate(const CouplingConstant& cc, Complex S0,
                        Complex det_hess);

/// Volume estimate read off a quadrature value of J:  2 pi hbar log|J|.
/// Negative, tending to minus the hyperbolic volume as hbar -> 0.
double volume_from_log_abs_J(const CouplingConstant& cc, double log_abs_J);

/// Removes the hbar^{3/2} |rho'| prefactor from a saddle-estimate modulus
/// and rescales:  2 pi hbar (log|est| - 3/2 log hbar - log|rho'|).  Applied
/// to log|saddle_estimate| this returns Re S0 up to rounding; applied to a
/// quadrature modulus it exposes the residual gap between the integral and
/// its leading saddle term.
double corrected_saddle_volume(const CouplingConstant& cc,
                               double log_abs_estimate, Complex det_hess);

// ---------------------------------------------------------------------------
// Semiclassical sweep
// ---------------------------------------------------------------------------

struct SweepRow {
  double b = 0.0;
  double hbar = 0.0;
  double log_abs_J = 0.0;
  double volume_estimate = 0.0;  // 2 pi hbar log|J|, negative
  double err_bound = 0.0;        // relative quadrature error + decay cert
};

struct SweepTable {
  std::vector<SweepRow> rows;
  /// Least-squares fit  v = v0 + c1 * hbar log hbar + c2 * hbar; v0 is the
  /// extrapolated volume estimate (approaches minus the hyperbolic volume).
  double v0 = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  /// True when the volume estimates at b <= 0.42 are strictly decreasing
  /// (approach from above toward the limit).
  bool monotone_tail = false;

  std::string to_csv() const;
  std::string to_json() const;
};

/// Evaluate J across the given couplings (method "2d" or "3d"), convert to
/// volume estimates and extrapolate hbar -> 0.
SweepTable sweep_volume_limit(const std::vector<double>& bs,
                              const std::array<double, 3>& a,
                              const std::string& method = "2d",
                              const IntegratorOptions& opt = {});

// ---------------------------------------------------------------------------
// One-vertex cross-check
// ---------------------------------------------------------------------------

/// The partition-function integral attached to the six-tetrahedron
/// one-vertex triangulation uses the same kernel with contour offsets read
/// from the a-angles of its tetrahedra 2, 3 and 4.
std::array<double, 3> h_effective_ideal_triple(const ShapeStructure& tau);

struct CrossCheckResult {
  double log_abs_H = 0.0;    // log |I_H|
  double log_abs_JX = 0.0;   // log |J|
  double rel_gap = 0.0;      // | |I_H| / |J| - 1 |
  double err_bound_H = 0.0;  // quadrature error + decay cert of I_H
  double err_bound_JX = 0.0; // same for J
  bool certified = false;    // both quadratures certified
};

/// Modulus comparison |I_H| vs |J| at coupling cc; both sides evaluated
/// with the three-dimensional form on their own contours.
CrossCheckResult h_triangulation_cross_check(
    const CouplingConstant& cc, const std::array<double, 3>& ideal_a,
    const std::array<double, 3>& h_a, const IntegratorOptions& opt = {});

}  // namespace tqft
