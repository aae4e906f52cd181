#include "tqft/complex_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "json.hpp"
#include "tqft/specfun.hpp"

namespace tqft {

namespace {

// Dilogarithm with on-cut arguments evaluated as the limit from below.
Complex dilog_cut_below(Complex v) {
  if (v.imag() == 0.0 && v.real() >= 1.0) {
    v = Complex(v.real(), -1e-300);
  }
  return dilog(v);
}

}  // namespace

Complex shape_from_angle_triple(const std::array<double, 3>& abc, int sign) {
  const double a = abc[0], b = abc[1], c = abc[2];
  const double sb = std::sin(2.0 * kPi * b);
  const double sc = std::sin(2.0 * kPi * c);
  const double modulus = (sign >= 0) ? sc / sb : sb / sc;
  return modulus * std::exp(Complex(0.0, 2.0 * kPi * a));
}

std::vector<Complex> shapes_from_angles(const Triangulation& tri,
                                        const ShapeStructure& shape) {
  if (shape.angles.size() != tri.tets.size()) {
    throw std::invalid_argument("shapes_from_angles: size mismatch");
  }
  std::vector<Complex> out;
  out.reserve(tri.tets.size());
  for (size_t i = 0; i < tri.tets.size(); ++i) {
    out.push_back(shape_from_angle_triple(shape.angles[i], tri.tets[i].sign));
  }
  return out;
}

Complex psi(Complex z, int sign) {
  const double s = (sign >= 0) ? 1.0 : -1.0;
  return s * (std::log(z) - kI * kPi);
}

Complex psi_inverse(Complex y, int sign) {
  const double s = (sign >= 0) ? 1.0 : -1.0;
  return -std::exp(s * y);
}

bool in_domain_U(const Eigen::Vector3cd& y) {
  return y(0).imag() > -kPi && y(0).imag() < 0.0 &&
         y(1).imag() > 0.0 && y(1).imag() < kPi &&
         y(2).imag() > -kPi && y(2).imag() < 0.0;
}

Eigen::Matrix3d potential_Q() {
  Eigen::Matrix3d Q;
  Q << 1.0, -0.5, 0.0,
      -0.5, 0.0, 0.5,
       0.0, 0.5, 0.5;
  return Q;
}

Eigen::Vector3d potential_W() {
  return Eigen::Vector3d(-kPi, 0.0, kPi);
}

namespace {

// y^T Q y and y^T W without the implicit conjugation of Eigen's dot().
Complex quad_form(const Eigen::Vector3cd& y) {
  const Eigen::Vector3cd Qy = potential_Q().cast<Complex>() * y;
  return y.cwiseProduct(Qy).sum();
}

Complex lin_form(const Eigen::Vector3cd& y) {
  return y.cwiseProduct(potential_W().cast<Complex>()).sum();
}

}  // namespace

Complex potential_S(const Eigen::Vector3cd& y) {
  return kI * quad_form(y) + lin_form(y) +
         kI * (dilog(-std::exp(y(0))) - dilog(-std::exp(y(1))) +
               3.0 * dilog(-std::exp(y(2))));
}

Complex potential_S_rewrite(const Eigen::Vector3cd& y) {
  return kI * (dilog(-std::exp(y(0))) + dilog(-std::exp(-y(1))) +
               3.0 * dilog(-std::exp(y(2)))) +
         kI * quad_form(y) + kI * 0.5 * y(1) * y(1) + lin_form(y) +
         kI * kPi * kPi / 6.0;
}

Eigen::Vector3cd grad_S(const Eigen::Vector3cd& y) {
  Eigen::Vector3cd g = 2.0 * kI * (potential_Q().cast<Complex>() * y) +
                       potential_W().cast<Complex>();
  g(0) += -kI * std::log(1.0 + std::exp(y(0)));
  g(1) += kI * std::log(1.0 + std::exp(y(1)));
  g(2) += -3.0 * kI * std::log(1.0 + std::exp(y(2)));
  return g;
}

Eigen::Matrix3cd hess_S(const Eigen::Vector3cd& y) {
  Eigen::Matrix3cd H = 2.0 * kI * potential_Q().cast<Complex>();
  const Complex e1 = std::exp(y(0));
  const Complex e2 = std::exp(y(1));
  const Complex e3 = std::exp(y(2));
  H(0, 0) += -kI * e1 / (1.0 + e1);
  H(1, 1) += kI * e2 / (1.0 + e2);
  H(2, 2) += -3.0 * kI * e3 / (1.0 + e3);
  return H;
}

Eigen::Vector3cd gluing_residual(Complex z1, Complex z2, Complex z3) {
  Eigen::Vector3cd r;
  r(0) = std::log(z3) - std::log(shape_double_prime(z1)) -
         std::log(shape_prime(z2));
  r(1) = std::log(z3) - std::log(z1) + std::log(shape_double_prime(z2));
  r(2) = std::log(z1) + std::log(shape_prime(z2)) +
         3.0 * std::log(shape_prime(z3)) - 2.0 * kI * kPi;
  return r;
}

Eigen::Vector3cd gluing_seed(const Triangulation& tri,
                             const ShapeStructure& shape) {
  const std::vector<Complex> z = shapes_from_angles(tri, shape);
  if (z.size() < 3) {
    throw std::invalid_argument("gluing_seed: need at least three tetrahedra");
  }
  Eigen::Vector3cd y;
  for (int i = 0; i < 3; ++i) y(i) = psi(z[i], tri.tets[i].sign);
  return y;
}

SaddleReport solve_gluing(const Eigen::Vector3cd& seed, int max_steps,
                          double tol) {
  SaddleReport rep;
  Eigen::Vector3cd y = seed;
  if (!in_domain_U(y)) {
    throw std::invalid_argument("solve_gluing: seed outside the domain");
  }
  Eigen::Vector3cd g = grad_S(y);
  int it = 0;
  for (; it < max_steps && g.norm() > tol; ++it) {
    const Eigen::Vector3cd step = hess_S(y).fullPivLu().solve(-g);
    double damp = 1.0;
    bool moved = false;
    for (int halving = 0; halving < 40; ++halving) {
      const Eigen::Vector3cd cand = y + damp * step;
      if (in_domain_U(cand) && grad_S(cand).norm() < g.norm()) {
        y = cand;
        g = grad_S(y);
        moved = true;
        break;
      }
      damp *= 0.5;
    }
    if (!moved) break;
  }

  rep.y0 = y;
  rep.iterations = it;
  rep.grad_norm = g.norm();
  rep.converged = rep.grad_norm <= tol;
  rep.S_value = potential_S(y);
  rep.volume = -rep.S_value.real();
  rep.hessian = hess_S(y);
  rep.det_hessian = rep.hessian.determinant();
  rep.rho = std::pow(2.0 * kPi, 1.5) / std::sqrt(rep.det_hessian);
  const Complex z1 = psi_inverse(y(0), +1);
  const Complex z2 = psi_inverse(y(1), -1);
  const Complex z3 = psi_inverse(y(2), +1);
  rep.z0 = {z1, z2, z3, z3, shape_double_prime(z3)};
  return rep;
}

std::string saddle_report_to_json(const SaddleReport& rep) {
  nlohmann::json j;
  const auto put_complex = [](const Complex& c) {
    return nlohmann::json::array({c.real(), c.imag()});
  };
  j["y0"] = {put_complex(rep.y0(0)), put_complex(rep.y0(1)),
             put_complex(rep.y0(2))};
  j["z0"] = nlohmann::json::array();
  for (const auto& z : rep.z0) j["z0"].push_back(put_complex(z));
  j["S"] = put_complex(rep.S_value);
  j["det_hessian"] = put_complex(rep.det_hessian);
  j["rho"] = put_complex(rep.rho);
  j["volume"] = rep.volume;
  j["grad_norm"] = rep.grad_norm;
  j["iterations"] = rep.iterations;
  j["converged"] = rep.converged;
  nlohmann::json hj = nlohmann::json::array();
  for (int r = 0; r < 3; ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (int c = 0; c < 3; ++c) row.push_back(put_complex(rep.hessian(r, c)));
    hj.push_back(row);
  }
  j["hessian"] = hj;
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// One-variable reduction
// ---------------------------------------------------------------------------

Eigen::VectorXd saddle_polynomial_coeffs() {
  Eigen::VectorXd c(8);
  c << -1.0, -6.0, -12.0, -7.0, 2.0, -1.0, -2.0, 1.0;
  return c;
}

std::array<Complex, 7> saddle_polynomial_roots() {
  const Eigen::VectorXd c = saddle_polynomial_coeffs();
  // Companion matrix of the monic polynomial.
  Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(7, 7);
  for (int i = 0; i < 6; ++i) comp(i + 1, i) = 1.0;
  for (int i = 0; i < 7; ++i) comp(i, 6) = -c(i);
  const Eigen::EigenSolver<Eigen::MatrixXd> es(comp);

  const auto poly_and_deriv = [&](Complex t) {
    Complex p = c(7), dp = 0.0;
    for (int k = 6; k >= 0; --k) {
      dp = dp * t + p;
      p = p * t + c(k);
    }
    return std::make_pair(p, dp);
  };

  std::array<Complex, 7> roots;
  for (int i = 0; i < 7; ++i) {
    Complex t = es.eigenvalues()(i);
    for (int iter = 0; iter < 50; ++iter) {
      const auto [p, dp] = poly_and_deriv(t);
      const Complex step = p / dp;
      t -= step;
      if (std::abs(step) < 1e-15 * std::max(1.0, std::abs(t))) break;
    }
    // Snap real roots onto the axis so downstream branch choices are
    // deterministic.
    if (std::abs(t.imag()) < 1e-12) t = Complex(t.real(), 0.0);
    roots[i] = t;
  }
  std::sort(roots.begin(), roots.end(), [](const Complex& a, const Complex& b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  return roots;
}

ReducedShapes reduced_shapes(Complex t) {
  ReducedShapes rs;
  rs.ex = t;
  if (t.imag() == 0.0) {
    // Real roots: evaluate the rational maps in real arithmetic and attach
    // a +0 imaginary part, so negative values sit on the upper side of the
    // log branch cut.
    const double tr = t.real();
    const double num = tr * tr + tr;
    const double den = tr * tr - tr - 1.0;
    const double lin = tr + 1.0;
    rs.ey = Complex(-num / den, 0.0);
    rs.exy = Complex(-den / lin, 0.0);
  } else {
    const Complex t2 = t * t;
    rs.ey = -(t2 + t) / (t2 - t - 1.0);
    rs.exy = -(t2 - t - 1.0) / (t + 1.0);
  }
  return rs;
}

Complex f_of_t(Complex t) {
  if (std::abs(t + 1.0) < 1e-9) {
    throw std::domain_error("f_of_t: t = -1 is a degenerate critical value");
  }
  const ReducedShapes rs = reduced_shapes(t);
  const Complex logt = std::log(rs.ex);
  const Complex logey = std::log(rs.ey);
  return -logt * logt - 0.5 * logey * logey - dilog_cut_below(-rs.ex) -
         dilog_cut_below(rs.exy) - 3.0 * dilog_cut_below(-rs.ey);
}

SaddleClassification classify_saddle(Complex t) {
  SaddleClassification sc;
  sc.t = t;
  const ReducedShapes rs = reduced_shapes(t);
  const Complex u = rs.exy / (1.0 - rs.exy);
  sc.h = rs.ex / (1.0 + rs.ex) - u - 2.0;
  sc.i = -u + 3.0 * rs.ey / (1.0 + rs.ey) - 1.0;
  sc.j = u;
  const double m00 = sc.h.imag();
  const double m11 = sc.i.imag();
  const double m01 = sc.j.imag();
  const double mean = 0.5 * (m00 + m11);
  const double disc = std::hypot(0.5 * (m00 - m11), m01);
  sc.eig_lo = mean - disc;
  sc.eig_hi = mean + disc;
  sc.admissible = rs.ex.imag() < 0.0 && rs.ey.imag() < 0.0 &&
                  rs.exy.imag() > 0.0 && sc.eig_hi < 0.0;
  return sc;
}

}  // namespace tqft
