#pragma once

#include <cstdint>

#include "cdbulk/errors.hpp"
#include "cdbulk/mat2.hpp"

namespace cdbulk {

/// A point of the bulk spectrum together with its angle parametrization
/// x = 2 cos(theta), theta in (0, pi).
struct SpectralPoint {
    double x;
    double theta;

    static SpectralPoint from_energy(double x);
    static SpectralPoint from_angle(double theta);
};

/// Free solutions of x psi_n = psi_{n+1} + psi_{n-1}.
///
/// psi1 is the second-kind Chebyshev polynomial U_n(x) = sin((n+1)theta)/sin(theta)
/// with boundary values psi1_0 = 1, psi1_{-1} = 0; psi2 has psi2_0 = 0, psi2_{-1} = 1
/// and satisfies psi2_n = -psi1_{n-1} identically (the implementation delegates, so
/// the identity is bit-exact).
///
/// The complex overloads evaluate the trigonometric form on the principal branch of
/// theta = acos(z/2); near z = +-2 they fall back to the matrix-power recurrence.
/// The real overloads are the bounded-regime path and reject |x| >= 2.
cplx psi1(std::int64_t n, cplx z);
cplx psi2(std::int64_t n, cplx z);
double psi1(std::int64_t n, double x);
double psi2(std::int64_t n, double x);

/// n-th power of [[z, -1], [1, 0]]; rows are (psi1_n, psi2_n) and
/// (psi1_{n-1}, psi2_{n-1}), det = 1. Computed by binary exponentiation.
Mat2 transfer_matrix(std::int64_t n, cplx z);

/// Certified sup bound for transfer matrices over I_m = [-2 + 1/m, 2 - 1/m].
///
/// M is the closed-form Frobenius bound 2/sqrt(1/m - 1/(4 m^2)) (entrywise
/// |psi| <= 1/sin(theta) at the interval endpoints); M_strip = 4 M covers
/// complex arguments x + it/n with |t| <= 1. Both are validated on a sample
/// grid before being returned.
struct IntervalBound {
    int m;
    double lo, hi;
    double M;
    double M_strip;
};

enum class StripCertification { certify, skip };

/// Throws ValidationError if a sampled transfer-matrix norm exceeds the claimed
/// bound. The strip sweep may be skipped: the factor 4 is empirical and is known
/// to be exceeded for large m, while the real-interval bound is exact.
IntervalBound m_bound(int m, StripCertification strip = StripCertification::certify);

/// Bulk scaling limit of the kernel ratio: sin(u)/u with u = (b-a)/sqrt(4-x^2),
/// equal to 1 at a = b. Even in b - a by construction.
double sine_target(double x, double a, double b);
cplx sine_target(double x, cplx a, cplx b);

/// Limit of K_n(x+a/n, x+b/n)/n for the free case and of the kappa-normalized
/// kernels: 2 sin(u)/(sqrt(4-x^2) (b-a)), i.e. (2/(4-x^2)) sinc(u).
double scaled_kernel_target(double x, double a, double b);
cplx scaled_kernel_target(double x, cplx a, cplx b);

/// Free zero-counting density 1/(pi sqrt(4-x^2)) on (-2, 2), 0 outside.
double rho0(double x);

} // namespace cdbulk
