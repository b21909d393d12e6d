#pragma once

#include <cstdint>
#include <optional>

#include "cdbulk/chebyshev.hpp"
#include "cdbulk/jacobi.hpp"

namespace cdbulk {

/// Variation-of-parameters coefficients: p_n = A1 psi1_n + A2 psi2_n together
/// with the companion line at n-1. Constant in n along stretches with b = 0.
struct VarCoeffs {
    std::int64_t n;
    cplx A1, A2;
    cplx z;
    std::optional<std::size_t> level{};
};

/// Rank-one nilpotent update matrix: A_{n+1} = (I + Phi_n) A_n, with
/// Phi_n = -b_{n+1} [[psi1 psi2, psi2^2], [-psi1^2, -psi1 psi2]] at index n.
struct PerturbStep {
    std::int64_t n;
    Mat2 Phi;
};

/// Solves T_n(z) A = (p_n, p_{n-1}) through the adjugate (det T_n = 1).
VarCoeffs coeffs_from_poly(std::int64_t n, cplx z, const JacobiParams& params);

PerturbStep phi_step(std::int64_t n, cplx z, const JacobiParams& params);

/// One update step A_{n+1} = (I + Phi_n) A_n, and its exact inverse
/// A_n = (I - Phi_n) A_{n+1}.
VarCoeffs step_A(const VarCoeffs& coeffs, const JacobiParams& params);
VarCoeffs step_A_back(const VarCoeffs& coeffs, const JacobiParams& params);

/// Quadratic form kappa = A1^2 + A2^2 - A1 A2 x (algebraic squares, not
/// moduli). For real x and real A:  |kappa| >= (1 - |x|/2)(A1^2 + A2^2).
cplx kappa(const VarCoeffs& coeffs, double x);

/// Checks the lower bound above with an absolute slack of tol * (A1^2 + A2^2).
bool kappa_lower_bound_holds(const VarCoeffs& coeffs, double x, double tol = 1e-10);

/// Propagates one sparse bump across a gap: given the level-l pair at index
/// n >= site and the level-l boundary value p_{site-1}(z), returns the
/// level-(l+1) pair
///   p'_n     = p_n     - v p_{site-1}(z) psi1_{n-site}(z)
///   p'_{n-1} = p_{n-1} - v p_{site-1}(z) psi1_{n-1-site}(z).
/// The boundary value cannot be reconstructed from the pair itself, so it is
/// an explicit argument; the overload taking the level-l params computes it.
PolyPair single_bump_update(const PolyPair& level_vals, double v, std::int64_t site,
                            cplx p_site_prev);
PolyPair single_bump_update(const PolyPair& level_vals, double v, std::int64_t site,
                            const JacobiParams& level_params);

} // namespace cdbulk
