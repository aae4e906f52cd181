#include "tqft/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

namespace tqft {

namespace {

constexpr double kSeriesEps = 1e-17;

// ---------------------------------------------------------------------------
// Dilogarithm
// ---------------------------------------------------------------------------

// Power series sum_{k>=1} z^k / k^2, reliable for |z| <= 1/2.
Complex dilog_series(Complex z) {
  Complex term = z;
  Complex sum = z;
  for (int k = 2; k < 200; ++k) {
    term *= z;
    const Complex add = term / static_cast<double>(k * k);
    sum += add;
    if (std::abs(add) < kSeriesEps * (1.0 + std::abs(sum))) break;
  }
  return sum;
}

// Expansion of Li2(1 - e^{-w}) in powers of w, convergent for |w| < 2 pi.
// Coefficients are B_n / (n+1)! with B_n the Bernoulli numbers; odd-index
// terms vanish beyond n = 1.
Complex dilog_exp_series(Complex w) {
  static const double kBernoulli[] = {
      // B_2, B_4, ..., B_34
      1.0 / 6.0,
      -1.0 / 30.0,
      1.0 / 42.0,
      -1.0 / 30.0,
      5.0 / 66.0,
      -691.0 / 2730.0,
      7.0 / 6.0,
      -3617.0 / 510.0,
      43867.0 / 798.0,
      -174611.0 / 330.0,
      854513.0 / 138.0,
      -236364091.0 / 2730.0,
      8553103.0 / 6.0,
      -23749461029.0 / 870.0,
      8615841276005.0 / 14322.0,
      -7709321041217.0 / 510.0,
      2577687858367.0 / 6.0,
  };
  const Complex w2 = w * w;
  Complex sum = w - 0.25 * w2;        // n = 0 and n = 1 terms
  Complex wpow = w * w2;              // w^{n+1} for n = 2
  double fact = 6.0;                  // (n+1)! for n = 2
  for (int idx = 0; idx < 17; ++idx) {
    const int n = 2 * (idx + 1);
    if (idx > 0) {
      // advance w^{n+1} and (n+1)! by two steps of n
      wpow *= w2;
      fact *= static_cast<double>(n) * static_cast<double>(n + 1);
    }
    const Complex add = (kBernoulli[idx] / fact) * wpow;
    sum += add;
    if (std::abs(add) < kSeriesEps * (1.0 + std::abs(sum))) break;
  }
  return sum;
}

constexpr double kPiSqOver6 = kPi * kPi / 6.0;

}  // namespace

Complex dilog(Complex z) {
  if (z.imag() == 0.0 && z.real() >= 1.0) {
    throw std::domain_error("dilog: argument on the branch cut [1, inf)");
  }
  const double az = std::abs(z);
  if (az <= 0.5) {
    return dilog_series(z);
  }
  if (az >= 2.0) {
    // Inversion: Li2(z) = -Li2(1/z) - pi^2/6 - Log(-z)^2 / 2.
    const Complex lognz = std::log(-z);
    return -dilog_series(1.0 / z) - kPiSqOver6 - 0.5 * lognz * lognz;
  }
  const Complex omz = 1.0 - z;
  if (std::abs(omz) <= 0.5) {
    // Reflection: Li2(z) + Li2(1-z) = pi^2/6 - Log(z) Log(1-z).
    return kPiSqOver6 - std::log(z) * std::log(omz) - dilog_series(omz);
  }
  const Complex landen = z / (z - 1.0);
  if (std::abs(landen) <= 0.5) {
    // Landen: Li2(z) + Li2(z/(z-1)) = -Log(1-z)^2 / 2.
    const Complex l = std::log(omz);
    return -dilog_series(landen) - 0.5 * l * l;
  }
  if (z.real() <= 0.5) {
    // Remaining annulus, left half: exponential-argument series with
    // w = -Log(1-z) stays well inside its convergence disc.
    return dilog_exp_series(-std::log(omz));
  }
  // Remaining annulus, right half: reflect once, then the argument 1-z has
  // real part < 1/2 and one of the previous cases applies.
  return kPiSqOver6 - std::log(z) * std::log(omz) - dilog(omz);
}

double bloch_wigner(Complex z) {
  if (z.imag() == 0.0) return 0.0;  // vanishes on the real axis
  const Complex li2 = dilog(z);
  return li2.imag() + std::arg(1.0 - z) * std::log(std::abs(z));
}

double lobachevsky(double x) {
  // Odd and pi-periodic; reduce to |xr| <= pi/2.
  const double xr = x - kPi * std::round(x / kPi);
  if (xr == 0.0 || std::abs(std::abs(xr) - 0.5 * kPi) == 0.0) {
    // L(0) = L(+-pi/2) = 0 (the latter because Li2(-1) is real).
    if (xr == 0.0) return 0.0;
  }
  const Complex z = std::exp(Complex(0.0, 2.0 * xr));
  return 0.5 * dilog(z).imag();
}

// ---------------------------------------------------------------------------
// Gauss-Legendre rules
// ---------------------------------------------------------------------------

namespace detail {

const GaussRule& gauss_legendre(int n) {
  if (n < 2) throw std::domain_error("gauss_legendre: need n >= 2");
  static std::mutex mu;
  static std::map<int, GaussRule> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Tricomi-style initial guess followed by Newton on P_n.
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  auto [pos, inserted] = cache.emplace(n, std::move(rule));
  (void)inserted;
  return pos->second;
}

double faddeev_singularity_distance(Complex z, const CouplingConstant& cc) {
  // Poles at +i(s/2 + m b + n / b), zeros at the mirror points, m, n >= 0.
  const double s = cc.q_sum();
  const double x = std::abs(z.real());
  const double y = std::abs(z.imag());
  const double binv = 1.0 / cc.b;
  double best = std::hypot(x, y - 0.5 * s);  // m = n = 0
  if (y > 0.5 * s) {
    const double excess = y - 0.5 * s;
    const int mmax = static_cast<int>(excess / cc.b) + 1;
    for (int m = 0; m <= mmax; ++m) {
      const double rem = excess - m * cc.b;
      const double nf = std::floor(rem / binv);
      for (double n : {nf, nf + 1.0}) {
        if (n < 0.0) continue;
        best = std::min(best, std::hypot(x, rem - n * binv));
      }
    }
  }
  return best;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Faddeev quantum dilogarithm
// ---------------------------------------------------------------------------

namespace {

// log(1 + e^w) on the principal branch, safe against overflow.
Complex log1p_exp(Complex w) {
  if (w.real() > 36.0) {
    return w + std::exp(-w);  // log(1+e^w) = w + log(1+e^{-w})
  }
  return std::log(1.0 + std::exp(w));
}

// Integral representation valid for |Im z| < (b + 1/b)/2, evaluated along
// the real axis with a semicircular detour above the third-order pole at
// the origin.  Folding the two rays gives on (r, T]
//   g(w) = -i sin(2 z w) / (2 sinh(b w) sinh(w / b) w),
// and the detour contributes  -i r Int_0^pi f(r e^{i t}) e^{i t} dt  with
//   f(w) = e^{-2 i z w} / (4 sinh(b w) sinh(w / b) w).
Complex log_faddeev_in_strip(Complex z, const CouplingConstant& cc,
                             const PrecisionConfig& prec) {
  const double b = cc.b;
  const double s = cc.q_sum();
  const double rate = s - 2.0 * std::abs(z.imag());
  // Truncation point where the integrand envelope falls below
  // abs_tol / (10 T):  e^{-rate T} / T < tol / (10 T).
  const double T =
      prec.contour_truncation * std::log(10.0 / prec.abs_tol) / rate;
  const double r = std::min(1.0, 1.0 / (4.0 * s));

  const auto& rule = detail::gauss_legendre(prec.quad_points);
  const auto f = [&](Complex w) {
    return std::exp(-2.0 * kI * z * w) /
           (4.0 * std::sinh(b * w) * std::sinh(w / b) * w);
  };
  const auto g = [&](double w) {
    return -kI * std::sin(2.0 * z * w) /
           (2.0 * std::sinh(b * w) * std::sinh(w / b) * w);
  };

  // Straight part: composite panels, geometrically graded away from the
  // origin (the folded integrand grows like 1/w^2 towards w = r) and capped
  // by the sin oscillation length and by the distance to the nearest
  // sinh pole at i pi min(b, 1/b).
  const double cycle =
      std::min(kPi / std::max(std::abs(z.real()), 1.0),
               2.0 * kPi * std::min(b, 1.0 / b));
  Complex line_sum = 0.0;
  double a = r;
  for (int p = 0; p < 100000 && a < T; ++p) {
    const double h = std::min({0.75 * a, cycle, T - a});
    Complex acc = 0.0;
    for (int q = 0; q < prec.quad_points; ++q) {
      const double w = a + 0.5 * h * (1.0 + rule.nodes[q]);
      acc += rule.weights[q] * g(w);
    }
    line_sum += 0.5 * h * acc;
    a += h;
  }

  // Semicircular detour, radius r, traversed from angle pi to 0.
  const auto& arc_rule = detail::gauss_legendre(2 * prec.quad_points);
  Complex arc_sum = 0.0;
  for (size_t q = 0; q < arc_rule.nodes.size(); ++q) {
    const double t = 0.5 * kPi * (1.0 + arc_rule.nodes[q]);
    const Complex w = r * std::exp(Complex(0.0, t));
    arc_sum += arc_rule.weights[q] * f(w) * std::exp(Complex(0.0, t));
  }
  arc_sum *= -kI * r * 0.5 * kPi;

  return line_sum + arc_sum;
}

}  // namespace

Complex log_faddeev(Complex z, const CouplingConstant& cc,
                    const PrecisionConfig& prec) {
  const double guard = 1e3 * prec.abs_tol;
  if (detail::faddeev_singularity_distance(z, cc) < guard) {
    throw std::domain_error(
        "log_faddeev: argument within guard distance of a pole or zero");
  }
  const double s = cc.q_sum();

  // Shift the argument into |Im z| <= s/4 with the vertical functional
  // equations; each step multiplies by an explicit elementary factor:
  //   Phi(z - i u) = Phi(z) * (1 + e^{2 pi u (z - i u / 2)})   (u = b, 1/b).
  Complex extra = 0.0;
  Complex zr = z;
  for (int step = 0; step < 512 && std::abs(zr.imag()) > 0.25 * s; ++step) {
    const double dir = (zr.imag() > 0.0) ? -1.0 : 1.0;
    double u = cc.b;
    if (std::abs(zr.imag() + dir / cc.b) < std::abs(zr.imag() + dir * cc.b)) {
      u = 1.0 / cc.b;
    }
    if (dir < 0.0) {
      // moving down from above: log Phi(z) = log Phi(z - iu) - log(1+e^{2 pi u (z - iu/2)})
      extra -= log1p_exp(2.0 * kPi * u * (zr - 0.5 * kI * u));
      zr -= kI * u;
    } else {
      extra += log1p_exp(2.0 * kPi * u * (zr + 0.5 * kI * u));
      zr += kI * u;
    }
  }
  return extra + log_faddeev_in_strip(zr, cc, prec);
}

Complex faddeev(Complex z, const CouplingConstant& cc,
                const PrecisionConfig& prec) {
  return std::exp(log_faddeev(z, cc, prec));
}

Complex semiclassical_log_faddeev(Complex y, const CouplingConstant& cc) {
  if (std::abs(y.imag()) >= kPi) {
    throw std::domain_error(
        "semiclassical_log_faddeev: requires |Im y| < pi");
  }
  const double b2 = cc.b * cc.b;
  return dilog(-std::exp(y)) / (2.0 * kPi * kI * b2);
}

}  // namespace tqft
