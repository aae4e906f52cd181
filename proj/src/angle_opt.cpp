#include "tqft/angle_opt.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace tqft {

namespace {

// Coordinate order: (a1,b1,c1, a2,b2,c2, ..., a5,b5,c5).
Eigen::MatrixXd build_equalities() {
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(9, 15);
  for (int t = 0; t < 5; ++t) {
    A(t, 3 * t + 0) = A(t, 3 * t + 1) = A(t, 3 * t + 2) = 1.0;
  }
  // Edge-balance combinations (independent residue of the five edge
  // conditions modulo the triple sums).
  A(5, 1) = 1.0;  A(5, 4) = 1.0;  A(5, 6) = 1.0;  A(5, 9) = -1.0; A(5, 14) = -1.0;
  A(6, 3) = 1.0;  A(6, 1) = -2.0; A(6, 2) = -1.0;
  A(7, 3) = 1.0;  A(7, 7) = 1.0;  A(7, 11) = -1.0; A(7, 13) = -1.0;
  A(8, 6) = 1.0;  A(8, 1) = -1.0; A(8, 4) = -1.0;
  return A;
}

Eigen::VectorXd build_rhs() {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(9);
  b.head(5).setConstant(0.5);
  return b;
}

Eigen::VectorXd build_interior_point() {
  Eigen::VectorXd x(15);
  x << 1.0 / 4, 1.0 / 8, 1.0 / 8,
       3.0 / 8, 1.0 / 16, 1.0 / 16,
       3.0 / 16, 1.0 / 8, 3.0 / 16,
       1.0 / 8, 1.0 / 16, 5.0 / 16,
       1.0 / 16, 3.0 / 16, 1.0 / 4;
  return x;
}

}  // namespace

AnglePolytope AnglePolytope::ideal_73() {
  AnglePolytope poly;
  poly.equalities = build_equalities();
  poly.rhs = build_rhs();
  poly.interior_point = build_interior_point();

  Eigen::FullPivLU<Eigen::MatrixXd> lu(poly.equalities);
  if (lu.rank() != 9) {
    throw std::logic_error("AnglePolytope: equality system is rank-deficient");
  }
  const Eigen::MatrixXd kernel = lu.kernel();  // 15 x 6
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(kernel);
  poly.kernel_basis =
      qr.householderQ() * Eigen::MatrixXd::Identity(15, kernel.cols());
  return poly;
}

bool AnglePolytope::contains(const Eigen::Ref<const Eigen::VectorXd>& x,
                             double tol) const {
  if (x.size() != dimension()) return false;
  if (residual(x).lpNorm<Eigen::Infinity>() > tol) return false;
  return (x.array() > tol).all();
}

Eigen::VectorXd volume_gradient(
    const Eigen::Ref<const Eigen::VectorXd>& angles_turns) {
  Eigen::VectorXd g(angles_turns.size());
  for (Eigen::Index i = 0; i < angles_turns.size(); ++i) {
    g(i) = -2.0 * kPi * std::log(2.0 * std::sin(2.0 * kPi * angles_turns(i)));
  }
  return g;
}

Eigen::VectorXd volume_hessian_diag(
    const Eigen::Ref<const Eigen::VectorXd>& angles_turns) {
  Eigen::VectorXd h(angles_turns.size());
  for (Eigen::Index i = 0; i < angles_turns.size(); ++i) {
    h(i) = -std::pow(2.0 * kPi, 2) / std::tan(2.0 * kPi * angles_turns(i));
  }
  return h;
}

namespace {

// One inner Newton ascent on  phi(x) = t V(x) + sum_i log x_i  restricted to
// the affine subspace x = x0 + K u.  With t <= 0 the barrier is dropped and
// plain V is polished.  Returns the iteration count.
int newton_ascend(const AnglePolytope& poly, Eigen::VectorXd& x, double t,
                  double inner_tol, int max_iter) {
  const auto& K = poly.kernel_basis;
  int used = 0;
  for (int it = 0; it < max_iter; ++it) {
    ++used;
    Eigen::VectorXd grad = volume_gradient(x);
    Eigen::VectorXd hdiag = volume_hessian_diag(x);
    if (t > 0.0) {
      grad = t * grad + x.cwiseInverse();
      hdiag = t * hdiag - x.cwiseAbs2().cwiseInverse();
    }
    const Eigen::VectorXd g_red = K.transpose() * grad;
    if (g_red.norm() < inner_tol) break;

    Eigen::MatrixXd M = -(K.transpose() * hdiag.asDiagonal() * K);
    // Levenberg regularisation if the reduced Hessian is not positive
    // definite (possible far from the optimum).
    double mu = 0.0;
    Eigen::LLT<Eigen::MatrixXd> llt(M);
    while (llt.info() != Eigen::Success && mu < 1e8) {
      mu = (mu == 0.0) ? 1e-8 : mu * 10.0;
      llt.compute(M + mu * Eigen::MatrixXd::Identity(M.rows(), M.cols()));
    }
    Eigen::VectorXd du = llt.solve(g_red);

    // Backtracking: stay strictly positive and do not decrease the
    // objective.
    const auto value = [&](const Eigen::VectorXd& xx) {
      double v = volume_functional(xx);
      if (t > 0.0) v = t * v + xx.array().log().sum();
      return v;
    };
    const double f0 = value(x);
    double step = 1.0;
    Eigen::VectorXd xn;
    for (int bt = 0; bt < 60; ++bt) {
      xn = x + step * (K * du);
      if ((xn.array() > 0.0).all() && value(xn) >= f0 - 1e-15) break;
      step *= 0.5;
    }
    const double moved = (step * du).norm();
    x = xn;
    if (moved < 1e-15) break;
  }
  return used;
}

}  // namespace

VolumeMaxResult maximize_volume(const AnglePolytope& poly, double grad_tol) {
  VolumeMaxResult res;
  Eigen::VectorXd x = poly.interior_point;
  int iters = 0;

  // Barrier continuation: weight 1/t of the log barrier decreases to 1e-12.
  for (double t = 1e2; t <= 1.0000001e12; t *= 100.0) {
    iters += newton_ascend(poly, x, t, 1e-9 * t, 60);
  }
  // Final polish on the bare objective (the optimum is strictly interior).
  iters += newton_ascend(poly, x, /*t=*/-1.0, 0.1 * grad_tol, 60);

  res.angles = x;
  res.volume = volume_functional(x);
  res.grad_norm = (poly.kernel_basis.transpose() * volume_gradient(x)).norm();
  res.iterations = iters;
  res.converged = res.grad_norm < grad_tol && poly.contains(x, 1e-9);
  return res;
}

std::string volume_result_to_json(const VolumeMaxResult& result) {
  nlohmann::json j;
  j["angles"] = std::vector<double>(
      result.angles.data(), result.angles.data() + result.angles.size());
  j["objective"] = result.volume;
  j["grad_norm"] = result.grad_norm;
  j["iterations"] = result.iterations;
  j["converged"] = result.converged;
  return j.dump(2) + "\n";
}

ShapeStructure shape_from_vector(const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() % 3 != 0) {
    throw std::invalid_argument("shape_from_vector: size must be 3 * ntets");
  }
  ShapeStructure s;
  for (Eigen::Index t = 0; t < x.size() / 3; ++t) {
    s.angles.push_back({x(3 * t), x(3 * t + 1), x(3 * t + 2)});
  }
  return s;
}

Eigen::VectorXd vector_from_shape(const ShapeStructure& shape) {
  Eigen::VectorXd x(3 * static_cast<Eigen::Index>(shape.angles.size()));
  for (size_t t = 0; t < shape.angles.size(); ++t) {
    x(3 * t) = shape.angles[t][0];
    x(3 * t + 1) = shape.angles[t][1];
    x(3 * t + 2) = shape.angles[t][2];
  }
  return x;
}

}  // namespace tqft
