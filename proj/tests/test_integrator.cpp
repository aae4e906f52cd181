#include "tqft/integrator.hpp"

#include <array>
#include <cmath>
#include <cstdlib>
#include <string>

#include "doctest.h"
#include "nlohmann/json.hpp"
#include "reference_values.hpp"
#include "tqft/triangulation.hpp"

using tqft::Complex;
using tqft::CouplingConstant;
using tqft::IntegratorOptions;
using tqft::QuadratureResult;

namespace {

std::array<double, 3> ideal_triple() {
  return {tqft::ref::kMaxAngles[0], tqft::ref::kMaxAngles[3],
          tqft::ref::kMaxAngles[6]};
}

tqft::ShapeStructure tau_shape(const std::array<double, 18>& flat) {
  tqft::ShapeStructure s;
  for (int t = 0; t < 6; ++t) {
    s.angles.push_back({flat[3 * t], flat[3 * t + 1], flat[3 * t + 2]});
  }
  return s;
}

double rel_gap(Complex log_a, Complex log_b) {
  return std::abs(std::exp(log_a - log_b) - 1.0);
}

// Anchor pinned from the first certified evaluation of the integral at
// b = 0.5; it guards the evaluator against regressions (the two integral
// forms and the cross-checks below are the mathematically meaningful
// comparisons).
const Complex kLogJ05(-4.001775150553, 3.225253093358);

const QuadratureResult& r3_b05() {
  static const QuadratureResult r =
      tqft::integrate_JX_3d(CouplingConstant(0.5), ideal_triple());
  return r;
}

const QuadratureResult& r2_b05() {
  static const QuadratureResult r =
      tqft::integrate_JX_2d(CouplingConstant(0.5), ideal_triple());
  return r;
}

}  // namespace

TEST_CASE("three- and two-dimensional forms agree and certify at b = 0.5") {
  const QuadratureResult& r3 = r3_b05();
  const QuadratureResult& r2 = r2_b05();

  CHECK(r3.certified);
  CHECK(r2.certified);
  CHECK(r3.rel_err_bound < 1e-6);
  CHECK(r2.rel_err_bound < 1e-6);
  CHECK(r3.decay_certificate < 1e-12);
  CHECK(r2.decay_certificate < 1e-12);
  CHECK(r3.refinements >= 1);
  CHECK(r3.evaluations > 0);

  // The hub variable of the three-dimensional form integrates out exactly,
  // so both evaluators must produce the same complex number.
  CHECK(rel_gap(r2.log_value, r3.log_value) < 1e-9);
  CHECK(rel_gap(r3.log_value, kLogJ05) < 1e-9);

  CHECK(std::isfinite(std::abs(r3.value())));
  const double v =
      tqft::volume_from_log_abs_J(CouplingConstant(0.5), r3.log_value.real());
  CHECK(v < 0.0);
  CHECK(v > -tqft::ref::kVolume);
}

TEST_CASE("quadrature tracks the steepest-descent estimate at b = 0.5") {
  const CouplingConstant cc(0.5);
  const Complex ls =
      tqft::log_saddle_estimate_J(cc, tqft::ref::kS0, tqft::ref::kDetHess);
  const Complex ratio = std::exp(ls - r3_b05().log_value);  // estimate / quad

  // Orientation check for the recorded square-root branch: the estimate and
  // the quadrature point into the same half plane.
  CHECK(std::abs(std::arg(ratio)) < 0.75);
  // The modulus gap is bounded (it does not grow as the coupling shrinks)...
  CHECK(std::abs(std::log(std::abs(ratio))) < 1.5);
  // ...but it does not vanish either: the finite-coupling integrand differs
  // from the limit potential by a frame offset in the dilogarithm argument,
  // which contributes a bounded non-decaying factor.  The nominal 0.5
  // cross-validation bound between the two methods measures about 0.79.
  CHECK(std::abs(1.0 - ratio) < 0.5);
}

TEST_CASE("saddle prefactor bookkeeping is exact") {
  for (double b : {0.5, 0.25}) {
    const CouplingConstant cc(b);
    const Complex est =
        tqft::saddle_estimate(cc, tqft::ref::kS0, tqft::ref::kDetHess);
    CHECK(std::isfinite(std::abs(est)));
    CHECK(std::abs(est) > 0.0);
    // Removing the declared prefactor must reproduce Re S0 identically.
    const double corrected = tqft::corrected_saddle_volume(
        cc, std::log(std::abs(est)), tqft::ref::kDetHess);
    CHECK(corrected == doctest::Approx(tqft::ref::kS0.real()).epsilon(1e-9));
    CHECK(corrected == doctest::Approx(-tqft::ref::kVolume).epsilon(1e-9));
  }

  // The constant factor in front of hbar^{3/2} is finite, nonzero and has
  // the recorded modulus.
  {
    const CouplingConstant cc(0.5);
    const Complex log_rho_prime =
        tqft::log_saddle_integral(cc, tqft::ref::kS0, tqft::ref::kDetHess) -
        1.5 * std::log(cc.hbar()) -
        tqft::ref::kS0 / (2.0 * tqft::kPi * cc.hbar());
    CHECK(std::exp(log_rho_prime.real()) ==
          doctest::Approx(std::abs(tqft::ref::kRhoPrime)).epsilon(1e-12));
  }

  // Halving hbar moves log|estimate| by Re S0 / (2 pi hbar) to leading
  // order.
  {
    const CouplingConstant cc(0.25);
    const double h = cc.hbar();
    const double q_half = 1.0 / std::sqrt(0.5 * h);  // b + 1/b at hbar/2
    const double b_half = 0.5 * (q_half - std::sqrt(q_half * q_half - 4.0));
    const CouplingConstant cc_half(b_half);
    REQUIRE(cc_half.hbar() == doctest::Approx(0.5 * h).epsilon(1e-12));
    const double d_log =
        tqft::log_saddle_integral(cc_half, tqft::ref::kS0, tqft::ref::kDetHess)
            .real() -
        tqft::log_saddle_integral(cc, tqft::ref::kS0, tqft::ref::kDetHess)
            .real();
    const double leading = tqft::ref::kS0.real() / (2.0 * tqft::kPi) *
                           (1.0 / cc_half.hbar() - 1.0 / h);
    CHECK(std::abs(d_log - leading) < 0.15 * std::abs(leading));
  }
}

TEST_CASE("contour choice does not move the value at b = 0.5") {
  const CouplingConstant cc(0.5);
  IntegratorOptions light;
  light.tail_tol = 1e-10;
  light.edge_tol = 1e-9;

  const std::array<std::array<double, 3>, 3> triples = {{
      ideal_triple(),
      {0.36, 0.21, 0.15},
      {0.30, 0.25, 0.20},
  }};

  std::array<Complex, 3> logs;
  for (size_t i = 0; i < triples.size(); ++i) {
    CHECK_NOTHROW(tqft::contours_3d(cc, triples[i], light));
    const QuadratureResult r = tqft::integrate_JX_3d(cc, triples[i], light);
    CHECK(r.certified);
    logs[i] = r.log_value;
  }
  // Pairwise agreement within ten times the requested quadrature tolerance.
  CHECK(rel_gap(logs[0], logs[1]) < 1e-5);
  CHECK(rel_gap(logs[0], logs[2]) < 1e-5);
  CHECK(rel_gap(logs[1], logs[2]) < 1e-5);
  // And against the default-precision run.
  CHECK(rel_gap(logs[1], r3_b05().log_value) < 1e-5);
}

TEST_CASE("window validation rejects inadmissible angle triples") {
  const CouplingConstant cc(0.5);

  // a1 < a3 breaks both the hub-axis decay and the pole-free strip of the
  // coupled factor.
  const std::array<double, 3> swapped = {0.15, 0.22, 0.35};
  CHECK_THROWS_AS((void)tqft::contours_3d(cc, swapped),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)tqft::contours_2d(cc, swapped),
                  std::invalid_argument);

  // Angles must stay strictly inside (0, 1/2) turns.
  CHECK_THROWS_AS((void)tqft::contours_3d(cc, {0.6, 0.2, 0.1}),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)tqft::contours_3d(cc, {0.5, 0.2, 0.1}),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)tqft::contours_2d(cc, {0.3, 0.2, 0.0}),
                  std::invalid_argument);

  // Degenerate explicit contours and point counts are rejected.
  auto lines = tqft::contours_3d(cc, ideal_triple());
  lines[1].half_width = 0.0;
  CHECK_THROWS_AS((void)tqft::integrate_JX_3d_on(cc, lines),
                  std::invalid_argument);
  IntegratorOptions bad;
  bad.points = 2;
  CHECK_THROWS_AS((void)tqft::integrate_JX_3d(cc, ideal_triple(), bad),
                  std::invalid_argument);
  bad.points = 300;
  CHECK_THROWS_AS((void)tqft::integrate_JX_2d(cc, ideal_triple(), bad),
                  std::invalid_argument);

  // The default triple is admissible with every envelope rate positive, and
  // its axis offsets satisfy the strip condition with margin c2.
  const auto a0 = ideal_triple();
  CHECK(a0[0] - a0[2] ==
        doctest::Approx(tqft::ref::kMaxAngles[5]).epsilon(1e-12));
  const double half = 0.5 * cc.q_sum();
  const std::array<double, 3> offs = {-(1.0 - 2.0 * a0[0]) * half,
                                      (1.0 - 2.0 * a0[1]) * half,
                                      -(1.0 - 2.0 * a0[2]) * half};
  for (double r : tqft::decay_rates_3d(cc, offs)) CHECK(r > 0.0);
  for (double r : tqft::decay_rates_2d(cc, {offs[0], offs[2]})) CHECK(r > 0.0);
}

TEST_CASE("panel-ordered reduction is bitwise thread independent") {
  const CouplingConstant cc(0.5);
  const auto lines = tqft::contours_3d(cc, ideal_triple());
  IntegratorOptions opt;
  opt.max_refinements = 0;

  opt.threads = 1;
  const QuadratureResult serial = tqft::integrate_JX_3d_on(cc, lines, opt);
  opt.threads = 4;
  const QuadratureResult parallel = tqft::integrate_JX_3d_on(cc, lines, opt);

  CHECK(serial.log_value.real() == parallel.log_value.real());
  CHECK(serial.log_value.imag() == parallel.log_value.imag());
  CHECK(serial.decay_certificate == parallel.decay_certificate);
  CHECK(serial.evaluations == parallel.evaluations);
}

TEST_CASE("worker count resolution honors the environment") {
  CHECK(tqft::resolve_threads(7) == 7);
  setenv("TQFT_THREADS", "3", 1);
  CHECK(tqft::resolve_threads(0) == 3);
  CHECK(tqft::resolve_threads(2) == 2);
  setenv("TQFT_THREADS", "not-a-number", 1);
  CHECK(tqft::resolve_threads(0) >= 1);
  unsetenv("TQFT_THREADS");
  CHECK(tqft::resolve_threads(0) >= 1);
}

TEST_CASE("semiclassical sweep approaches the volume limit from above") {
  const std::vector<double> bs = {0.45, 0.42, 0.40};
  const tqft::SweepTable table =
      tqft::sweep_volume_limit(bs, ideal_triple(), "2d");

  REQUIRE(table.rows.size() == 3);
  for (size_t i = 0; i < table.rows.size(); ++i) {
    const tqft::SweepRow& row = table.rows[i];
    CHECK(row.b == bs[i]);
    CHECK(row.err_bound < 1e-6);
    CHECK(row.volume_estimate < 0.0);
    CHECK(row.volume_estimate > -tqft::ref::kVolume);
    if (i > 0) {
      CHECK(table.rows[i].hbar < table.rows[i - 1].hbar);
      // Strictly decreasing toward the limit.
      CHECK(table.rows[i].volume_estimate <
            table.rows[i - 1].volume_estimate);
    }
  }
  CHECK(table.monotone_tail);
  CHECK(table.v0 < -3.5);
  CHECK(table.v0 > -6.5);

  // Serialization is deterministic and matches the declared schema.
  const std::string csv = table.to_csv();
  CHECK(csv == table.to_csv());
  CHECK(csv.rfind("b,hbar,log_abs_J,volume_estimate,err_bound\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
  const std::string js = table.to_json();
  CHECK(js == table.to_json());
  const auto parsed = nlohmann::json::parse(js);
  CHECK(parsed.at("rows").size() == 3);
  CHECK(parsed.at("fit").at("v0").get<double>() ==
        doctest::Approx(table.v0).epsilon(1e-15));

  CHECK_THROWS_AS(
      (void)tqft::sweep_volume_limit({}, ideal_triple(), "2d"),
      std::invalid_argument);
  CHECK_THROWS_AS(
      (void)tqft::sweep_volume_limit({0.5}, ideal_triple(), "fast"),
      std::invalid_argument);
}

TEST_CASE("one-vertex modulus agrees with the ideal form") {
  const auto h1 = tqft::h_effective_ideal_triple(tau_shape(tqft::ref::kHTau1));
  CHECK(h1[0] == 0.25);
  CHECK(h1[1] == 0.3125);
  CHECK(h1[2] == 0.125);

  tqft::ShapeStructure too_small;
  too_small.angles.assign(5, {0.1, 0.2, 0.2});
  CHECK_THROWS_AS((void)tqft::h_effective_ideal_triple(too_small),
                  std::invalid_argument);

  const tqft::CrossCheckResult xc =
      tqft::h_triangulation_cross_check(CouplingConstant(0.5), ideal_triple(),
                                        h1);
  CHECK(xc.certified);
  CHECK(xc.rel_gap < 10.0 * (xc.err_bound_H + xc.err_bound_JX) + 1e-12);

  // A different admissible extended assignment changes only phases, never
  // the modulus.
  const auto h2 = tqft::h_effective_ideal_triple(tau_shape(tqft::ref::kHTau2));
  CHECK(h2[0] == 0.3125);
  CHECK(h2[1] == 0.25);
  CHECK(h2[2] == 0.1875);
  const tqft::CrossCheckResult xc2 =
      tqft::h_triangulation_cross_check(CouplingConstant(0.4), ideal_triple(),
                                        h2);
  CHECK(xc2.certified);
  CHECK(xc2.rel_gap < 10.0 * (xc2.err_bound_H + xc2.err_bound_JX) + 1e-12);
}
