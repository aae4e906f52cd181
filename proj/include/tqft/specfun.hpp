#pragma once

#include <vector>

#include "tqft/constants.hpp"

namespace tqft {

/// Principal-branch dilogarithm Li2(z), analytic on C minus the cut [1, inf).
/// Throws std::domain_error for real arguments on the cut.
Complex dilog(Complex z);

/// Bloch-Wigner function D(z) = Im Li2(z) + arg(1 - z) log|z|.
/// Real-analytic off {0, 1}, zero on the real axis.
double bloch_wigner(Complex z);

/// Lobachevsky function L(x) = (1/2) Im Li2(e^{2ix}); odd and pi-periodic.
double lobachevsky(double x);

/// log of Faddeev's quantum dilogarithm Phi_b(z), evaluated on the branch
/// anchored at log Phi_b(0) = i pi (b^2 + b^-2) / 24 and continued without
/// jumps along the evaluation path.  Throws std::domain_error within
/// guard distance (1e3 * abs_tol) of a pole or a zero.
Complex log_faddeev(Complex z, const CouplingConstant& cc,
                    const PrecisionConfig& prec = {});

/// Phi_b(z) = exp(log_faddeev(z)).
Complex faddeev(Complex z, const CouplingConstant& cc,
                const PrecisionConfig& prec = {});

/// Semiclassical limit profile of the quantum dilogarithm:
///   y |-> Li2(-e^y) / (2 pi i b^2),
/// the leading term of log Phi_b(y / (2 pi b)) as b -> 0.  Defined for
/// |Im y| < pi; throws std::domain_error on |Im y| >= pi where the
/// argument -e^y meets the dilogarithm cut.
Complex semiclassical_log_faddeev(Complex y, const CouplingConstant& cc);

namespace detail {

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Cached n-point Gauss-Legendre rule (thread-safe).
const GaussRule& gauss_legendre(int n);

/// Distance from z to the nearest pole or zero of Phi_b.
double faddeev_singularity_distance(Complex z, const CouplingConstant& cc);

}  // namespace detail

}  // namespace tqft
