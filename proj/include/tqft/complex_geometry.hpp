#pragma once

#include <Eigen/Dense>
#include <array>
#include <string>
#include <vector>

#include "tqft/constants.hpp"
#include "tqft/triangulation.hpp"

namespace tqft {

/// Moebius companions of an ideal tetrahedron shape parameter:
/// z' = 1/(1-z) and z'' = 1 - 1/z, satisfying z z' z'' = -1.
inline Complex shape_prime(Complex z) { return 1.0 / (1.0 - z); }
inline Complex shape_double_prime(Complex z) { return 1.0 - 1.0 / z; }

/// Complex shape of a tetrahedron recovered from its dihedral angles
/// (in turns) and orientation sign:
///   sign +1:  z = (sin 2 pi c / sin 2 pi b) e^{2 pi i a}
///   sign -1:  z = (sin 2 pi b / sin 2 pi c) e^{2 pi i a}
Complex shape_from_angle_triple(const std::array<double, 3>& abc, int sign);

/// One complex shape per tetrahedron of `tri`.
std::vector<Complex> shapes_from_angles(const Triangulation& tri,
                                        const ShapeStructure& shape);

/// Logarithmic chart psi(z) = sign (Log z - i pi) and its inverse
/// z = -exp(sign * y).
Complex psi(Complex z, int sign);
Complex psi_inverse(Complex y, int sign);

/// The analytic open box U = (R + i(-pi,0)) x (R + i(0,pi)) x (R + i(-pi,0))
/// on which the gluing potential below is defined.
bool in_domain_U(const Eigen::Vector3cd& y);

/// Gluing potential of the five-tetrahedron ideal triangulation in the
/// reduced coordinates y = (y1, y2, y3):
///   S(y) = i y^T Q y + y^T W
///        + i ( Li2(-e^{y1}) - Li2(-e^{y2}) + 3 Li2(-e^{y3}) ).
Complex potential_S(const Eigen::Vector3cd& y);

/// Same function written with the inverted middle dilogarithm; agrees with
/// potential_S identically on U (used as a cross-check).
Complex potential_S_rewrite(const Eigen::Vector3cd& y);

Eigen::Vector3cd grad_S(const Eigen::Vector3cd& y);
Eigen::Matrix3cd hess_S(const Eigen::Vector3cd& y);

/// Quadratic form Q and linear term W of the potential.
Eigen::Matrix3d potential_Q();
Eigen::Vector3d potential_W();

/// Edge-consistency residual of the reduced shape triple (z1, z2, z3)
/// (z4 = z3 and z5 = z3'' are implied):
///   r1 = Log z3 - Log z1'' - Log z2'
///   r2 = Log z3 - Log z1  + Log z2''
///   r3 = Log z1 + Log z2' + 3 Log z3' - 2 pi i
Eigen::Vector3cd gluing_residual(Complex z1, Complex z2, Complex z3);

/// Full critical-point report of the gluing potential.
struct SaddleReport {
  Eigen::Vector3cd y0;          // critical point in the chart
  std::array<Complex, 5> z0;    // shapes of all five tetrahedra
  Complex S_value;              // S(y0)
  Eigen::Matrix3cd hessian;     // Hess S(y0)
  Complex det_hessian;
  Complex rho;                  // (2 pi)^{3/2} / sqrt(det Hess)
  double volume = 0.0;          // -Re S(y0)
  double grad_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Damped Newton iteration on grad S = 0 starting from `seed`; steps are
/// halved whenever they would leave U or fail to shrink the gradient.
SaddleReport solve_gluing(const Eigen::Vector3cd& seed, int max_steps = 10,
                          double tol = 1e-12);

/// Seed produced from an angle structure through shapes_from_angles + psi.
Eigen::Vector3cd gluing_seed(const Triangulation& tri,
                             const ShapeStructure& shape);

std::string saddle_report_to_json(const SaddleReport& report);

// ---------------------------------------------------------------------------
// One-variable reduction
// ---------------------------------------------------------------------------

/// Monic polynomial whose roots enumerate the critical points of the
/// two-variable reduced potential; coefficients in ascending degree order,
///   t^7 - 2 t^6 - t^5 + 2 t^4 - 7 t^3 - 12 t^2 - 6 t - 1.
Eigen::VectorXd saddle_polynomial_coeffs();

/// All seven roots, companion-matrix eigenvalues polished by Newton to
/// ~1e-13 and sorted lexicographically by (Re, Im).
std::array<Complex, 7> saddle_polynomial_roots();

/// Shape data attached to a root t: e^x = t,
///   e^y = -(t^2 + t) / (t^2 - t - 1),  e^{x-y} = -(t^2 - t - 1) / (t + 1).
struct ReducedShapes {
  Complex ex, ey, exy;
};
ReducedShapes reduced_shapes(Complex t);

/// Two-variable reduced potential evaluated on the root data:
///   f(t) = -(Log t)^2 - (1/2)(Log e^y)^2
///          - Li2(-t) - Li2(e^{x-y}) - 3 Li2(-e^y),
/// with dilogarithm arguments that land on [1, inf) taken from below.
/// Throws std::domain_error at the degenerate root t = -1.
Complex f_of_t(Complex t);

/// Reduced Hessian data and admissibility of a critical point.
struct SaddleClassification {
  Complex t;
  Complex h, i, j;       // entries of the reduced quadratic form
  double eig_lo = 0.0;   // eigenvalues of [[Im h, Im j], [Im j, Im i]]
  double eig_hi = 0.0;
  bool admissible = false;
};

/// A root is admissible when Im e^x < 0, Im e^y < 0, Im e^{x-y} > 0 and
/// both eigenvalues of the imaginary part of the reduced form are negative.
SaddleClassification classify_saddle(Complex t);

}  // namespace tqft
