#include "cdbulk/varparam.hpp"

#include <cmath>
#include <stdexcept>

namespace cdbulk {

VarCoeffs coeffs_from_poly(std::int64_t n, cplx z, const JacobiParams& params) {
    if (n < 0) throw std::invalid_argument("coeffs_from_poly: order must be >= 0");
    const PolyPair pp = eval_poly(n, z, params);
    const Mat2 inv = transfer_matrix(n, z).unimodular_inverse();
    const auto [a1, a2] = inv * std::pair<cplx, cplx>{pp.p, pp.p_prev};
    return {n, a1, a2, z, params.level};
}

PerturbStep phi_step(std::int64_t n, cplx z, const JacobiParams& params) {
    if (n < 0) throw std::invalid_argument("phi_step: index must be >= 0");
    const double b = params.b_at(n + 1);
    if (b == 0.0) return {n, Mat2{}};
    const cplx u1 = psi1(n, z);
    const cplx u2 = psi2(n, z);
    const cplx f = cplx(-b);
    return {n, Mat2{f * u1 * u2, f * u2 * u2, -f * u1 * u1, -f * u1 * u2}};
}

VarCoeffs step_A(const VarCoeffs& coeffs, const JacobiParams& params) {
    const PerturbStep step = phi_step(coeffs.n, coeffs.z, params);
    const Mat2 g = Mat2::identity() + step.Phi;
    const auto [a1, a2] = g * std::pair<cplx, cplx>{coeffs.A1, coeffs.A2};
    return {coeffs.n + 1, a1, a2, coeffs.z, coeffs.level};
}

VarCoeffs step_A_back(const VarCoeffs& coeffs, const JacobiParams& params) {
    if (coeffs.n < 1) throw std::invalid_argument("step_A_back: nothing before index 0");
    const PerturbStep step = phi_step(coeffs.n - 1, coeffs.z, params);
    const Mat2 g = Mat2::identity() - step.Phi;
    const auto [a1, a2] = g * std::pair<cplx, cplx>{coeffs.A1, coeffs.A2};
    return {coeffs.n - 1, a1, a2, coeffs.z, coeffs.level};
}

cplx kappa(const VarCoeffs& coeffs, double x) {
    return coeffs.A1 * coeffs.A1 + coeffs.A2 * coeffs.A2 - coeffs.A1 * coeffs.A2 * x;
}

bool kappa_lower_bound_holds(const VarCoeffs& coeffs, double x, double tol) {
    const double norm2 = std::norm(coeffs.A1) + std::norm(coeffs.A2);
    const double bound = (1.0 - 0.5 * std::abs(x)) * norm2;
    return std::abs(kappa(coeffs, x)) >= bound - tol * norm2;
}

PolyPair single_bump_update(const PolyPair& level_vals, double v, std::int64_t site,
                            cplx p_site_prev) {
    if (level_vals.n < site) {
        throw std::invalid_argument("single_bump_update: index precedes the bump site");
    }
    const cplx corr = v * p_site_prev;
    return {level_vals.n,
            level_vals.p - corr * psi1(level_vals.n - site, level_vals.z),
            level_vals.p_prev - corr * psi1(level_vals.n - 1 - site, level_vals.z),
            level_vals.z};
}

PolyPair single_bump_update(const PolyPair& level_vals, double v, std::int64_t site,
                            const JacobiParams& level_params) {
    const cplx boundary = eval_poly(site - 1, level_vals.z, level_params).p;
    return single_bump_update(level_vals, v, site, boundary);
}

} // namespace cdbulk
