#pragma once

#include <Eigen/Dense>
#include <string>

#include "tqft/constants.hpp"
#include "tqft/specfun.hpp"
#include "tqft/triangulation.hpp"

namespace tqft {

/// Affine-linear description of the positive angle structures on the
/// five-tetrahedron ideal triangulation: 15 dihedral angles (in turns)
/// subject to 9 independent equalities (five triple sums of 1/2 plus four
/// edge-balance combinations), with all coordinates strictly positive.
struct AnglePolytope {
  Eigen::MatrixXd equalities;      // 9 x 15 coefficient matrix
  Eigen::VectorXd rhs;             // 9
  Eigen::MatrixXd kernel_basis;    // 15 x 6, orthonormal columns
  Eigen::VectorXd interior_point;  // a strictly positive feasible point

  static AnglePolytope ideal_73();

  Eigen::Index dimension() const { return equalities.cols(); }
  Eigen::Index num_equalities() const { return equalities.rows(); }

  /// Equality residual A x - b.
  Eigen::VectorXd residual(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    return equalities * x - rhs;
  }

  bool contains(const Eigen::Ref<const Eigen::VectorXd>& x,
                double tol = 1e-9) const;
};

/// Total hyperbolic volume of an angle assignment: the sum of the
/// Lobachevsky function over all angles (given in turns).
template <typename Derived>
double volume_functional(const Eigen::MatrixBase<Derived>& angles_turns) {
  double v = 0.0;
  for (Eigen::Index i = 0; i < angles_turns.size(); ++i) {
    v += lobachevsky(2.0 * kPi * angles_turns(i));
  }
  return v;
}

/// Gradient of volume_functional with respect to the angles in turns:
/// d/dx L(2 pi x) = -2 pi log|2 sin(2 pi x)| per coordinate.
Eigen::VectorXd volume_gradient(const Eigen::Ref<const Eigen::VectorXd>& angles_turns);

/// Diagonal of the Hessian: -(2 pi)^2 cot(2 pi x) per coordinate.
Eigen::VectorXd volume_hessian_diag(const Eigen::Ref<const Eigen::VectorXd>& angles_turns);

struct VolumeMaxResult {
  Eigen::VectorXd angles;  // 15 angles in turns
  double volume = 0.0;
  double grad_norm = 0.0;  // norm of the gradient projected onto the polytope
  int iterations = 0;
  bool converged = false;
};

/// Maximises the volume functional over the polytope interior with a
/// log-barrier continuation followed by projected-Newton polishing.
/// Converged means the projected gradient norm fell below grad_tol.
VolumeMaxResult maximize_volume(const AnglePolytope& poly,
                                double grad_tol = 1e-10);

/// Deterministic JSON report of an optimisation result.
std::string volume_result_to_json(const VolumeMaxResult& result);

/// View a 15-vector of turns as the per-tetrahedron shape structure.
ShapeStructure shape_from_vector(const Eigen::Ref<const Eigen::VectorXd>& x);

/// Flatten a shape structure back to a coordinate vector.
Eigen::VectorXd vector_from_shape(const ShapeStructure& shape);

}  // namespace tqft
