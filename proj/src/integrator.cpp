#include "tqft/integrator.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <nlohmann/json.hpp>
#include <stdexcept>
#include <thread>
#include <utility>

#include "tqft/specfun.hpp"

namespace tqft {
namespace {

constexpr double kTwoPi = 2.0 * kPi;

int parse_env_threads() {
  const char* env = std::getenv("TQFT_THREADS");
  if (env == nullptr) return 0;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (end == env || *end != '\0' || v <= 0 || v > 1024) return 0;
  return static_cast<int>(v);
}

/// Run fn(lo, hi) over contiguous blocks of [0, total).  Callers write to
/// disjoint preallocated slots, so the block decomposition cannot change
/// the result; the final combination step is always sequential.
template <typename Fn>
void parallel_blocks(long long total, int threads, const Fn& fn) {
  if (threads <= 1 || total < 2048) {
    fn(0LL, total);
    return;
  }
  const long long workers = std::min<long long>(threads, total);
  const long long chunk = (total + workers - 1) / workers;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(workers));
  for (long long t = 0; t < workers; ++t) {
    const long long lo = t * chunk;
    const long long hi = std::min(total, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&fn, lo, hi] { fn(lo, hi); });
  }
  for (auto& th : pool) th.join();
}

// ---------------------------------------------------------------------------
// Panelised horizontal lines
// ---------------------------------------------------------------------------

struct Window {
  double offset = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

double extent(const Window& w) {
  return std::max(std::abs(w.lo), std::abs(w.hi));
}

struct Axis {
  double offset = 0.0;
  double lo = 0.0;
  double pitch = 0.0;  // common panel width
  int panels = 0;
  int points = 0;  // Gauss-Legendre nodes per panel
  std::vector<double> node;
  std::vector<double> weight;

  long long size() const { return static_cast<long long>(node.size()); }
};

Axis build_axis_pitched(double offset, double lo, int panels, double pitch,
                        int points) {
  Axis ax;
  ax.offset = offset;
  ax.lo = lo;
  ax.pitch = pitch;
  ax.panels = panels;
  ax.points = points;
  const auto& rule = detail::gauss_legendre(points);
  ax.node.resize(static_cast<size_t>(panels) * points);
  ax.weight.resize(ax.node.size());
  for (int p = 0; p < panels; ++p) {
    const double c = lo + (p + 0.5) * pitch;
    for (int q = 0; q < points; ++q) {
      const size_t k = static_cast<size_t>(p) * points + q;
      ax.node[k] = c + 0.5 * pitch * rule.nodes[q];
      ax.weight[k] = 0.5 * pitch * rule.weights[q];
    }
  }
  return ax;
}

/// Panel width chosen so that at most `base_points / 8` phase cycles of the
/// fastest local oscillation (total angular frequency `max_freq`) fall into
/// one panel; `points` nodes then resolve them to near machine precision.
Axis build_axis(const Window& w, double max_freq, int base_points,
                int points) {
  const double cycles = std::max(1.0, base_points / 8.0);
  const double target = cycles * kTwoPi / std::max(max_freq, 1e-8);
  const int panels =
      std::max(2, static_cast<int>(std::ceil((w.hi - w.lo) / target)));
  const double pitch = (w.hi - w.lo) / panels;
  return build_axis_pitched(w.offset, w.lo, panels, pitch, points);
}

/// Sampled log-integrand along one axis, rescaled by its peak so the
/// stored factors stay O(1).
struct Line {
  Axis ax;
  std::vector<Complex> scaled;  // weight * exp(log - peak)
  double peak = 0.0;            // max Re log
  double edge_lo = 0.0;         // max Re log over the first panel
  double edge_hi = 0.0;         // max Re log over the last panel

  double cert_lo() const { return std::exp(edge_lo - peak); }
  double cert_hi() const { return std::exp(edge_hi - peak); }
};

template <typename LogFn>
Line build_line(Axis ax, const LogFn& fn, int threads) {
  Line line;
  line.ax = std::move(ax);
  const Axis& a = line.ax;
  const long long n = a.size();
  std::vector<Complex> logs(static_cast<size_t>(n));
  parallel_blocks(n, threads, [&](long long lo, long long hi) {
    for (long long i = lo; i < hi; ++i) {
      logs[static_cast<size_t>(i)] =
          fn(Complex(a.node[static_cast<size_t>(i)], a.offset));
    }
  });
  line.peak = -std::numeric_limits<double>::infinity();
  for (long long i = 0; i < n; ++i) {
    line.peak = std::max(line.peak, logs[static_cast<size_t>(i)].real());
  }
  line.edge_lo = -std::numeric_limits<double>::infinity();
  line.edge_hi = -std::numeric_limits<double>::infinity();
  for (int q = 0; q < a.points; ++q) {
    line.edge_lo = std::max(line.edge_lo, logs[static_cast<size_t>(q)].real());
    line.edge_hi = std::max(
        line.edge_hi, logs[static_cast<size_t>(n - 1 - q)].real());
  }
  line.scaled.resize(static_cast<size_t>(n));
  for (long long i = 0; i < n; ++i) {
    const size_t k = static_cast<size_t>(i);
    line.scaled[k] = a.weight[k] * std::exp(logs[k] - line.peak);
  }
  return line;
}

struct LevelOut {
  Complex log_value{0.0, 0.0};
  /// Edge-to-peak envelope ratios per axis side, ordered
  /// (axis0 lo, axis0 hi, axis1 lo, axis1 hi, ...); unused entries zero.
  std::array<double, 6> side{};
  double cert = 0.0;  // max over side[]
  long long evals = 0;
};

// ---------------------------------------------------------------------------
// Three-dimensional form: Z is the hub coupling Y and W
// ---------------------------------------------------------------------------

LevelOut eval_3d_level(const CouplingConstant& cc, const Window& wY,
                       const Window& wZ, const Window& wW, int base_points,
                       int points, int threads) {
  const double pr = kPi * cc.q_sum();  // pi / sqrt(hbar)
  const double dY = wY.offset;
  const double dZ = wZ.offset;
  const double dW = wW.offset;
  const double eY = extent(wY);
  const double eZ = extent(wZ);
  const double eW = extent(wW);
  const PrecisionConfig prec;

  // Worst-case angular frequencies: the quadratic phases (including the
  // far-field quadratic phase of the quantum dilogarithm factors) plus the
  // full bandwidth of the coupled factor (the Z axis sees both transforms).
  Axis axY = build_axis(wY, kTwoPi * (3.0 * eY + eZ), base_points, points);
  Axis axZ =
      build_axis(wZ, kTwoPi * (eY + eW + 2.0 * eZ), base_points, points);
  Axis axW = build_axis(wW, kTwoPi * (4.0 * eW + eZ), base_points, points);

  // Cross-coupling factors e^{-2 pi i Y Z} e^{2 pi i Z W} split into pure
  // real-frequency kernels and per-axis exponential tilts absorbed here.
  const Line lineY = build_line(
      std::move(axY),
      [&](Complex u) {
        return kTwoPi * kI * u * u - pr * u - log_faddeev(u, cc, prec) +
               kTwoPi * dZ * u.real();
      },
      threads);
  const Line lineZ = build_line(
      std::move(axZ),
      [&](Complex s) {
        return log_faddeev(s, cc, prec) + kTwoPi * (dY - dW) * s.real();
      },
      threads);
  const Line lineW = build_line(
      std::move(axW),
      [&](Complex w) {
        return kPi * kI * w * w + pr * w - 3.0 * log_faddeev(w, cc, prec) -
               kTwoPi * dZ * w.real();
      },
      threads);

  const auto& rule = detail::gauss_legendre(points);
  const long long nZ = lineZ.ax.size();
  std::vector<Complex> contrib(static_cast<size_t>(nZ));

  parallel_blocks(nZ, threads, [&](long long klo, long long khi) {
    std::vector<Complex> eYq(static_cast<size_t>(points));
    std::vector<Complex> eWq(static_cast<size_t>(points));
    for (long long k = klo; k < khi; ++k) {
      const double s = lineZ.ax.node[static_cast<size_t>(k)];
      for (int q = 0; q < points; ++q) {
        const double xiY = 0.5 * lineY.ax.pitch * rule.nodes[q];
        const double xiW = 0.5 * lineW.ax.pitch * rule.nodes[q];
        eYq[static_cast<size_t>(q)] = std::polar(1.0, -kTwoPi * s * xiY);
        eWq[static_cast<size_t>(q)] = std::polar(1.0, kTwoPi * s * xiW);
      }
      Complex f(0.0, 0.0);
      {
        const double c0 = lineY.ax.lo + 0.5 * lineY.ax.pitch;
        Complex rot = std::polar(1.0, -kTwoPi * s * c0);
        const Complex step = std::polar(1.0, -kTwoPi * s * lineY.ax.pitch);
        const Complex* a = lineY.scaled.data();
        for (int p = 0; p < lineY.ax.panels; ++p) {
          Complex inner(0.0, 0.0);
          const Complex* row = a + static_cast<size_t>(p) * points;
          for (int q = 0; q < points; ++q) {
            inner += row[q] * eYq[static_cast<size_t>(q)];
          }
          f += rot * inner;
          rot *= step;
        }
      }
      Complex g(0.0, 0.0);
      {
        const double c0 = lineW.ax.lo + 0.5 * lineW.ax.pitch;
        Complex rot = std::polar(1.0, kTwoPi * s * c0);
        const Complex step = std::polar(1.0, kTwoPi * s * lineW.ax.pitch);
        const Complex* a = lineW.scaled.data();
        for (int p = 0; p < lineW.ax.panels; ++p) {
          Complex inner(0.0, 0.0);
          const Complex* row = a + static_cast<size_t>(p) * points;
          for (int q = 0; q < points; ++q) {
            inner += row[q] * eWq[static_cast<size_t>(q)];
          }
          g += rot * inner;
          rot *= step;
        }
      }
      contrib[static_cast<size_t>(k)] =
          lineZ.scaled[static_cast<size_t>(k)] * f * g;
    }
  });

  Complex sum(0.0, 0.0);
  for (long long k = 0; k < nZ; ++k) {
    sum += contrib[static_cast<size_t>(k)];
  }

  LevelOut out;
  out.log_value = Complex(lineY.peak + lineZ.peak + lineW.peak, 0.0) +
                  std::log(sum) +
                  Complex(0.0, kTwoPi * (dY * dZ - dZ * dW));
  // The integrand modulus factorises exactly into the three line envelopes
  // (all cross factors are unimodular after the tilt absorption above), so
  // per-line edge ratios certify the full three-dimensional truncation.
  out.side = {lineY.cert_lo(), lineY.cert_hi(), lineZ.cert_lo(),
              lineZ.cert_hi(), lineW.cert_lo(), lineW.cert_hi()};
  out.cert = *std::max_element(out.side.begin(), out.side.end());
  out.evals = lineY.ax.size() + lineZ.ax.size() + lineW.ax.size();
  return out;
}

// ---------------------------------------------------------------------------
// Two-dimensional form: shared panel pitch makes the coupled quantum
// dilogarithm a function of the node-index difference only
// ---------------------------------------------------------------------------

LevelOut eval_2d_level(const CouplingConstant& cc, const Window& wX,
                       const Window& wY, int base_points, int points,
                       int threads) {
  const double dX = wX.offset;
  const double dY = wY.offset;
  const double eX = extent(wX);
  const double eY = extent(wY);
  const PrecisionConfig prec;

  const double freq_x = kTwoPi * (3.0 * eX + eY);
  const double freq_y = kTwoPi * (5.0 * eY + eX);
  const double cycles = std::max(1.0, base_points / 8.0);
  const double pitch =
      cycles * kTwoPi / std::max(std::max(freq_x, freq_y), 1e-8);
  const int panels_x =
      std::max(2, static_cast<int>(std::ceil((wX.hi - wX.lo) / pitch)));
  const int panels_y =
      std::max(2, static_cast<int>(std::ceil((wY.hi - wY.lo) / pitch)));

  Axis axX = build_axis_pitched(dX, wX.lo, panels_x, pitch, points);
  Axis axY = build_axis_pitched(dY, wY.lo, panels_y, pitch, points);

  const Line lineX = build_line(
      std::move(axX),
      [&](Complex x) { return kTwoPi * kI * x * x - log_faddeev(x, cc, prec); },
      threads);
  const Line lineY = build_line(
      std::move(axY),
      [&](Complex y) {
        return kPi * kI * y * y - 3.0 * log_faddeev(y, cc, prec);
      },
      threads);

  // Difference table for 1 / Phi_b(x - y - c_b) over all node pairs.
  const auto& rule = detail::gauss_legendre(points);
  const double base_re = wX.lo - wY.lo;
  const double im = dX - dY - 0.5 * cc.q_sum();
  const int diag = panels_x + panels_y - 1;
  const int nsq = points * points;
  std::vector<Complex> dlog(static_cast<size_t>(diag) * nsq);
  parallel_blocks(diag, threads, [&](long long klo, long long khi) {
    for (long long k = klo; k < khi; ++k) {
      const int pdiff = static_cast<int>(k) - (panels_y - 1);
      for (int a = 0; a < points; ++a) {
        for (int bq = 0; bq < points; ++bq) {
          const double re = base_re + pdiff * pitch +
                            0.5 * pitch * (rule.nodes[a] - rule.nodes[bq]);
          dlog[static_cast<size_t>(k) * nsq + a * points + bq] =
              -log_faddeev(Complex(re, im), cc, prec);
        }
      }
    }
  });
  double peak_d = -std::numeric_limits<double>::infinity();
  for (const Complex& v : dlog) peak_d = std::max(peak_d, v.real());
  std::vector<Complex> dval(dlog.size());
  for (size_t i = 0; i < dlog.size(); ++i) {
    dval[i] = std::exp(dlog[i] - peak_d);
  }

  // Pair sum with inline envelope tracking.  Because the coupled factor
  // ties the two axes together the truncation certificate must be measured
  // on the assembled pair products, separately for each window side.
  std::vector<Complex> partial(static_cast<size_t>(panels_x),
                               Complex(0.0, 0.0));
  std::vector<double> peak_all(static_cast<size_t>(panels_x), 0.0);
  std::vector<std::array<double, 4>> peak_side(static_cast<size_t>(panels_x),
                                               {0.0, 0.0, 0.0, 0.0});
  parallel_blocks(panels_x, threads, [&](long long plo, long long phi) {
    for (long long p = plo; p < phi; ++p) {
      Complex acc(0.0, 0.0);
      double m_all = 0.0;
      std::array<double, 4> m_side{0.0, 0.0, 0.0, 0.0};
      const int x_side = p == 0 ? 0 : (p == panels_x - 1 ? 1 : -1);
      const Complex* ax = lineX.scaled.data() + p * points;
      for (int q = 0; q < panels_y; ++q) {
        const int y_side = q == 0 ? 2 : (q == panels_y - 1 ? 3 : -1);
        const Complex* cy = lineY.scaled.data() + static_cast<size_t>(q) * points;
        const Complex* drow =
            dval.data() +
            (static_cast<size_t>(p - q + panels_y - 1)) * nsq;
        double m_pair = 0.0;
        for (int a = 0; a < points; ++a) {
          Complex inner(0.0, 0.0);
          double m_inner = 0.0;
          const Complex* dr = drow + a * points;
          for (int bq = 0; bq < points; ++bq) {
            const Complex term = cy[bq] * dr[bq];
            inner += term;
            m_inner = std::max(m_inner, std::norm(term));
          }
          acc += ax[a] * inner;
          m_pair = std::max(m_pair, std::norm(ax[a]) * m_inner);
        }
        m_all = std::max(m_all, m_pair);
        if (x_side >= 0) m_side[static_cast<size_t>(x_side)] =
            std::max(m_side[static_cast<size_t>(x_side)], m_pair);
        if (y_side >= 0) m_side[static_cast<size_t>(y_side)] =
            std::max(m_side[static_cast<size_t>(y_side)], m_pair);
      }
      partial[static_cast<size_t>(p)] = acc;
      peak_all[static_cast<size_t>(p)] = m_all;
      peak_side[static_cast<size_t>(p)] = m_side;
    }
  });

  Complex sum(0.0, 0.0);
  double m_all = 0.0;
  std::array<double, 4> m_side{0.0, 0.0, 0.0, 0.0};
  for (int p = 0; p < panels_x; ++p) {
    sum += partial[static_cast<size_t>(p)];
    m_all = std::max(m_all, peak_all[static_cast<size_t>(p)]);
    for (int s = 0; s < 4; ++s) {
      m_side[static_cast<size_t>(s)] =
          std::max(m_side[static_cast<size_t>(s)],
                   peak_side[static_cast<size_t>(p)][static_cast<size_t>(s)]);
    }
  }

  const double hbar = cc.hbar();
  LevelOut out;
  out.log_value = Complex(lineX.peak + lineY.peak + peak_d, 0.0) +
                  std::log(sum) -
                  Complex(0.0, kPi * (1.0 + 1.0 / hbar) / 12.0);
  const double denom = std::max(m_all, 1e-300);
  for (int s = 0; s < 4; ++s) {
    out.side[static_cast<size_t>(s)] =
        std::sqrt(m_side[static_cast<size_t>(s)] / denom);
  }
  out.cert = *std::max_element(out.side.begin(), out.side.end());
  out.evals = lineX.ax.size() + lineY.ax.size() +
              static_cast<long long>(dlog.size());
  return out;
}

// ---------------------------------------------------------------------------
// Windows, rates and the refinement driver
// ---------------------------------------------------------------------------

std::array<double, 3> offsets_3d(const CouplingConstant& cc,
                                 const std::array<double, 3>& a) {
  const double half = 0.5 * cc.q_sum();  // 1 / (2 sqrt(hbar))
  return {-(1.0 - 2.0 * a[0]) * half, (1.0 - 2.0 * a[1]) * half,
          -(1.0 - 2.0 * a[2]) * half};
}

std::array<double, 2> offsets_2d(const CouplingConstant& cc,
                                 const std::array<double, 3>& a) {
  const double half = 0.5 * cc.q_sum();
  return {-(1.0 - 2.0 * a[0]) * half, -(1.0 - 2.0 * a[2]) * half};
}

void require_positive_rates(const char* what, const double* rates, int n) {
  for (int i = 0; i < n; ++i) {
    if (!(rates[i] > 0.0)) {
      throw std::invalid_argument(
          std::string(what) +
          ": integrand envelope does not decay along every axis direction");
    }
  }
}

void require_interior_angles(const char* what,
                             const std::array<double, 3>& a) {
  for (double ai : a) {
    if (!(ai > 0.0 && ai < 0.5)) {
      throw std::invalid_argument(
          std::string(what) +
          ": each angle must lie strictly between 0 and 1/2 turns");
    }
  }
}

std::array<Window, 3> windows_3d(const CouplingConstant& cc,
                                 const std::array<double, 3>& a,
                                 double tail_tol) {
  require_interior_angles("contours_3d", a);
  const auto d = offsets_3d(cc, a);
  const auto r = decay_rates_3d(cc, d);
  require_positive_rates("contours_3d", r.data(), 6);
  const double depth = std::log(1.0 / tail_tol);
  return {Window{d[0], -depth / r[1], depth / r[0]},
          Window{d[1], -depth / r[3], depth / r[2]},
          Window{d[2], -depth / r[5], depth / r[4]}};
}

std::array<Window, 2> windows_2d(const CouplingConstant& cc,
                                 const std::array<double, 3>& a,
                                 double tail_tol) {
  require_interior_angles("contours_2d", a);
  if (!(a[0] - a[2] > 0.0 && a[0] - a[2] < 0.5)) {
    throw std::invalid_argument(
        "contours_2d: the coupled factor needs 0 < a1 - a3 < 1/2 to keep "
        "its argument inside the pole-free strip");
  }
  const auto d = offsets_2d(cc, a);
  const auto r = decay_rates_2d(cc, d);
  require_positive_rates("contours_2d", r.data(), 4);
  const double depth = std::log(1.0 / tail_tol);
  return {Window{d[0], -depth / r[1], depth / r[0]},
          Window{d[1], -depth / r[3], depth / r[2]}};
}

/// Grow windows until the measured edge-to-peak envelope ratio falls below
/// a margin under edge_tol on every side.  The asymptotic decay rates size
/// each extension step (with slack, since the envelope shoulder is flatter
/// than its far tail); the evaluation at the final windows is returned so
/// the caller can reuse it as the first refinement level.
template <size_t N, typename EvalFn>
LevelOut fit_windows(std::array<Window, N>& w,
                     const std::array<double, 2 * N>& rates, double edge_tol,
                     const EvalFn& eval) {
  const double target = edge_tol / 30.0;
  LevelOut out = eval(w);
  for (int round = 0; round < 4; ++round) {
    if (out.cert < target) break;
    bool grew = false;
    for (size_t i = 0; i < N; ++i) {
      const double c_lo = out.side[2 * i];
      const double c_hi = out.side[2 * i + 1];
      if (c_lo > target) {
        w[i].lo -= 1.5 * std::log(c_lo / target) / rates[2 * i + 1] + 0.5;
        grew = true;
      }
      if (c_hi > target) {
        w[i].hi += 1.5 * std::log(c_hi / target) / rates[2 * i] + 0.5;
        grew = true;
      }
    }
    if (!grew) break;
    out = eval(w);
  }
  return out;
}

template <typename EvalFn>
QuadratureResult refine(const EvalFn& eval, const IntegratorOptions& opt,
                        const LevelOut* base = nullptr) {
  QuadratureResult out;
  LevelOut prev = base != nullptr ? *base : eval(opt.points);
  out.evaluations = prev.evals;
  out.decay_certificate = prev.cert;
  out.log_value = prev.log_value;
  double rel = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= opt.max_refinements; ++k) {
    const LevelOut cur = eval(opt.points << k);
    out.evaluations += cur.evals;
    out.decay_certificate = std::max(out.decay_certificate, cur.cert);
    rel = std::abs(std::exp(prev.log_value - cur.log_value) - 1.0);
    prev = cur;
    out.log_value = cur.log_value;
    out.refinements = k;
    if (rel < opt.rel_tol) break;
  }
  out.rel_err_bound = rel;
  out.certified = rel < opt.rel_tol &&
                  out.decay_certificate < opt.edge_tol &&
                  std::isfinite(out.log_value.real()) &&
                  std::isfinite(out.log_value.imag());
  return out;
}

void validate_points(int points) {
  if (points < 4 || points > 256) {
    throw std::invalid_argument("integrator: points per panel out of range");
  }
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

Complex QuadratureResult::value() const { return std::exp(log_value); }

int resolve_threads(int requested) {
  if (requested > 0) return std::min(requested, 1024);
  const int env = parse_env_threads();
  if (env > 0) return env;
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

std::array<double, 6> decay_rates_3d(const CouplingConstant& cc,
                                     const std::array<double, 3>& offsets) {
  const double pr = kPi * cc.q_sum();
  const double dY = offsets[0];
  const double dZ = offsets[1];
  const double dW = offsets[2];
  return {
      kTwoPi * dY - kTwoPi * dZ + pr,         // Y+
      -2.0 * kTwoPi * dY + kTwoPi * dZ - pr,  // Y-
      kTwoPi * dZ - kTwoPi * dY + kTwoPi * dW,  // Z+
      kTwoPi * (dY - dW),                       // Z-
      -2.0 * kTwoPi * dW + kTwoPi * dZ - pr,    // W+
      -kTwoPi * dW - kTwoPi * dZ + pr,          // W-
  };
}

std::array<double, 4> decay_rates_2d(const CouplingConstant& cc,
                                     const std::array<double, 2>& offsets) {
  const double pr = kPi * cc.q_sum();
  const double dX = offsets[0];
  const double dY = offsets[1];
  return {
      kTwoPi * dY + pr,    // x+
      -2.0 * kTwoPi * dX,  // x-
      -2.0 * kTwoPi * dY,  // y+
      pr - kTwoPi * dX,    // y-
  };
}

std::array<ContourSpec, 3> contours_3d(const CouplingConstant& cc,
                                       const std::array<double, 3>& a,
                                       const IntegratorOptions& opt) {
  const auto w = windows_3d(cc, a, opt.tail_tol);
  std::array<ContourSpec, 3> lines;
  for (int i = 0; i < 3; ++i) {
    lines[static_cast<size_t>(i)] =
        ContourSpec{w[static_cast<size_t>(i)].offset,
                    extent(w[static_cast<size_t>(i)]), opt.points};
  }
  return lines;
}

std::array<ContourSpec, 2> contours_2d(const CouplingConstant& cc,
                                       const std::array<double, 3>& a,
                                       const IntegratorOptions& opt) {
  const auto w = windows_2d(cc, a, opt.tail_tol);
  std::array<ContourSpec, 2> lines;
  for (int i = 0; i < 2; ++i) {
    lines[static_cast<size_t>(i)] =
        ContourSpec{w[static_cast<size_t>(i)].offset,
                    extent(w[static_cast<size_t>(i)]), opt.points};
  }
  return lines;
}

QuadratureResult integrate_JX_3d(const CouplingConstant& cc,
                                 const std::array<double, 3>& a,
                                 const IntegratorOptions& opt) {
  validate_points(opt.points);
  auto w = windows_3d(cc, a, opt.tail_tol);
  const auto rates = decay_rates_3d(cc, offsets_3d(cc, a));
  const int threads = resolve_threads(opt.threads);
  long long fit_evals = 0;
  const LevelOut base = fit_windows(
      w, rates, opt.edge_tol, [&](const std::array<Window, 3>& ww) {
        const LevelOut lv = eval_3d_level(cc, ww[0], ww[1], ww[2], opt.points,
                                          opt.points, threads);
        fit_evals += lv.evals;
        return lv;
      });
  QuadratureResult out = refine(
      [&](int pts) {
        return eval_3d_level(cc, w[0], w[1], w[2], opt.points, pts, threads);
      },
      opt, &base);
  out.evaluations += fit_evals - base.evals;
  return out;
}

QuadratureResult integrate_JX_3d_on(const CouplingConstant& cc,
                                    const std::array<ContourSpec, 3>& lines,
                                    const IntegratorOptions& opt) {
  int base = opt.points;
  for (const ContourSpec& line : lines) {
    if (!(line.half_width > 0.0)) {
      throw std::invalid_argument("integrate_JX_3d_on: half_width must be > 0");
    }
    base = std::max(base, line.points);
  }
  validate_points(base);
  std::array<Window, 3> w;
  for (int i = 0; i < 3; ++i) {
    const ContourSpec& line = lines[static_cast<size_t>(i)];
    w[static_cast<size_t>(i)] =
        Window{line.offset, -line.half_width, line.half_width};
  }
  IntegratorOptions local = opt;
  local.points = base;
  const int threads = resolve_threads(opt.threads);
  return refine(
      [&](int pts) {
        return eval_3d_level(cc, w[0], w[1], w[2], local.points, pts, threads);
      },
      local);
}

QuadratureResult integrate_JX_2d(const CouplingConstant& cc,
                                 const std::array<double, 3>& a,
                                 const IntegratorOptions& opt) {
  validate_points(opt.points);
  auto w = windows_2d(cc, a, opt.tail_tol);
  const auto rates = decay_rates_2d(cc, offsets_2d(cc, a));
  const int threads = resolve_threads(opt.threads);
  long long fit_evals = 0;
  const LevelOut base = fit_windows(
      w, rates, opt.edge_tol, [&](const std::array<Window, 2>& ww) {
        const LevelOut lv =
            eval_2d_level(cc, ww[0], ww[1], opt.points, opt.points, threads);
        fit_evals += lv.evals;
        return lv;
      });
  QuadratureResult out = refine(
      [&](int pts) {
        return eval_2d_level(cc, w[0], w[1], opt.points, pts, threads);
      },
      opt, &base);
  out.evaluations += fit_evals - base.evals;
  return out;
}

QuadratureResult integrate_JX_2d_on(const CouplingConstant& cc,
                                    const std::array<ContourSpec, 2>& lines,
                                    const IntegratorOptions& opt) {
  int base = opt.points;
  for (const ContourSpec& line : lines) {
    if (!(line.half_width > 0.0)) {
      throw std::invalid_argument("integrate_JX_2d_on: half_width must be > 0");
    }
    base = std::max(base, line.points);
  }
  validate_points(base);
  std::array<Window, 2> w;
  for (int i = 0; i < 2; ++i) {
    const ContourSpec& line = lines[static_cast<size_t>(i)];
    w[static_cast<size_t>(i)] =
        Window{line.offset, -line.half_width, line.half_width};
  }
  IntegratorOptions local = opt;
  local.points = base;
  const int threads = resolve_threads(opt.threads);
  return refine(
      [&](int pts) {
        return eval_2d_level(cc, w[0], w[1], local.points, pts, threads);
      },
      local);
}

// ---------------------------------------------------------------------------
// Saddle-point estimates
// ---------------------------------------------------------------------------

Complex log_saddle_integral(const CouplingConstant& cc, Complex S0,
                            Complex det_hess) {
  const double hbar = cc.hbar();
  // The -i pi term selects -principal_sqrt(det H): the steepest-descent
  // frame orientation recorded from the quadrature phase match at b = 0.5.
  const Complex log_rho_prime = Complex(3.0 * std::log(kTwoPi), -kPi) -
                                std::log(std::sqrt(det_hess));
  return log_rho_prime + 1.5 * std::log(hbar) + S0 / (kTwoPi * hbar);
}

Complex log_saddle_estimate_J(const CouplingConstant& cc, Complex S0,
                              Complex det_hess) {
  const double hbar = cc.hbar();
  return log_saddle_integral(cc, S0, det_hess) -
         3.0 * (std::log(kTwoPi) + 0.5 * std::log(hbar));
}

Complex saddle_estimate(const CouplingConstant& cc, Complex S0,
                        Complex det_hess) {
  return std::exp(log_saddle_integral(cc, S0, det_hess));
}

double volume_from_log_abs_J(const CouplingConstant& cc, double log_abs_J) {
  return kTwoPi * cc.hbar() * log_abs_J;
}

double corrected_saddle_volume(const CouplingConstant& cc,
                               double log_abs_estimate, Complex det_hess) {
  const double hbar = cc.hbar();
  const double log_abs_rho_prime =
      3.0 * std::log(kTwoPi) - 0.5 * std::log(std::abs(det_hess));
  return kTwoPi * hbar *
         (log_abs_estimate - 1.5 * std::log(hbar) - log_abs_rho_prime);
}

// ---------------------------------------------------------------------------
// Semiclassical sweep
// ---------------------------------------------------------------------------

std::string SweepTable::to_csv() const {
  std::string out = "b,hbar,log_abs_J,volume_estimate,err_bound\n";
  for (const SweepRow& row : rows) {
    out += format_double(row.b) + "," + format_double(row.hbar) + "," +
           format_double(row.log_abs_J) + "," +
           format_double(row.volume_estimate) + "," +
           format_double(row.err_bound) + "\n";
  }
  return out;
}

std::string SweepTable::to_json() const {
  nlohmann::ordered_json j;
  j["rows"] = nlohmann::ordered_json::array();
  for (const SweepRow& row : rows) {
    nlohmann::ordered_json r;
    r["b"] = row.b;
    r["hbar"] = row.hbar;
    r["log_abs_J"] = row.log_abs_J;
    r["volume_estimate"] = row.volume_estimate;
    r["err_bound"] = row.err_bound;
    j["rows"].push_back(r);
  }
  j["fit"] = {{"v0", v0}, {"c1", c1}, {"c2", c2}};
  j["monotone_tail"] = monotone_tail;
  return j.dump(2) + "\n";
}

SweepTable sweep_volume_limit(const std::vector<double>& bs,
                              const std::array<double, 3>& a,
                              const std::string& method,
                              const IntegratorOptions& opt) {
  if (method != "2d" && method != "3d") {
    throw std::invalid_argument("sweep_volume_limit: method must be 2d or 3d");
  }
  if (bs.empty()) {
    throw std::invalid_argument("sweep_volume_limit: empty coupling list");
  }
  SweepTable table;
  table.rows.reserve(bs.size());
  for (double b : bs) {
    const CouplingConstant cc(b);
    const QuadratureResult r = method == "3d" ? integrate_JX_3d(cc, a, opt)
                                              : integrate_JX_2d(cc, a, opt);
    SweepRow row;
    row.b = b;
    row.hbar = cc.hbar();
    row.log_abs_J = r.log_value.real();
    row.volume_estimate = volume_from_log_abs_J(cc, row.log_abs_J);
    row.err_bound = r.rel_err_bound + r.decay_certificate;
    table.rows.push_back(row);
  }

  const int n = static_cast<int>(table.rows.size());
  Eigen::MatrixXd design(n, 3);
  Eigen::VectorXd target(n);
  for (int i = 0; i < n; ++i) {
    const double h = table.rows[static_cast<size_t>(i)].hbar;
    design(i, 0) = 1.0;
    design(i, 1) = h * std::log(h);
    design(i, 2) = h;
    target(i) = table.rows[static_cast<size_t>(i)].volume_estimate;
  }
  if (n >= 3) {
    const Eigen::Vector3d fit = design.colPivHouseholderQr().solve(target);
    table.v0 = fit(0);
    table.c1 = fit(1);
    table.c2 = fit(2);
  } else {
    table.v0 = target(n - 1);
  }

  // The estimates over the small-coupling tail b <= 0.42 must fall strictly
  // toward the limit (they approach minus the volume from above).
  std::vector<std::pair<double, double>> tail;  // (b, volume)
  for (const SweepRow& row : table.rows) {
    if (row.b <= 0.42 + 1e-12) tail.emplace_back(row.b, row.volume_estimate);
  }
  std::sort(tail.begin(), tail.end(),
            [](const auto& p, const auto& q) { return p.first > q.first; });
  bool decreasing = true;
  for (size_t i = 1; i < tail.size(); ++i) {
    if (tail[i].second >= tail[i - 1].second) decreasing = false;
  }
  table.monotone_tail = tail.size() >= 2 && decreasing;
  return table;
}

// ---------------------------------------------------------------------------
// One-vertex cross-check
// ---------------------------------------------------------------------------

std::array<double, 3> h_effective_ideal_triple(const ShapeStructure& tau) {
  if (tau.angles.size() != 6) {
    throw std::invalid_argument(
        "h_effective_ideal_triple: expected a six-tetrahedron assignment");
  }
  return {tau.angles[1][0], tau.angles[2][0], tau.angles[3][0]};
}

CrossCheckResult h_triangulation_cross_check(
    const CouplingConstant& cc, const std::array<double, 3>& ideal_a,
    const std::array<double, 3>& h_a, const IntegratorOptions& opt) {
  const QuadratureResult rh = integrate_JX_3d(cc, h_a, opt);
  const QuadratureResult rj = integrate_JX_3d(cc, ideal_a, opt);
  CrossCheckResult out;
  out.log_abs_H = rh.log_value.real();
  out.log_abs_JX = rj.log_value.real();
  out.rel_gap = std::abs(std::exp(out.log_abs_H - out.log_abs_JX) - 1.0);
  out.err_bound_H = rh.rel_err_bound + rh.decay_certificate;
  out.err_bound_JX = rj.rel_err_bound + rj.decay_certificate;
  out.certified = rh.certified && rj.certified;
  return out;
}

}  // namespace tqft
