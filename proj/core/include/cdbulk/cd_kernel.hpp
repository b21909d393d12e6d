#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "cdbulk/chebyshev.hpp"
#include "cdbulk/jacobi.hpp"

namespace cdbulk {

/// Kernel evaluation request: base point x, offsets a, b scaled by 1/n, order
/// n and optional truncation level (overrides the one in JacobiParams).
/// Imaginary offsets are restricted to the strip |Im| <= 1 where the transfer
/// matrices stay bounded.
struct KernelQuery {
    double x;
    cplx a{};
    cplx b{};
    std::int64_t n;
    std::optional<std::size_t> level{};
    bool allow_derivative_path = true;
    Precision precision = Precision::standard;

    void validate() const;
    bool real_offsets() const { return a.imag() == 0.0 && b.imag() == 0.0; }
};

struct KernelValue {
    cplx K;
    cplx K_diag;
    cplx ratio;
    std::int64_t n;
};

/// K_n(x+a/n, x+b/n) through the Christoffel-Darboux formula
///   K_n(z, w) = (p_n(z) p_{n-1}(w) - p_n(w) p_{n-1}(z)) / (z - w).
/// The confluent case runs the derivative recurrence; queries with
/// 0 < |z-w| < 1e-8 (1+|z|) are evaluated at the midpoint through the same
/// derivative formula (the linear Taylor term vanishes by antisymmetry).
cplx cd_kernel(const KernelQuery& q, const JacobiParams& params);

/// The defining sum  sum_{j<n} p_j(z) p_j(w), accumulated with Neumaier
/// compensation. Serves as the independent oracle for cd_kernel.
cplx cd_kernel_direct(const KernelQuery& q, const JacobiParams& params);

/// K and K_n(x, x) from one streamed pass; ratio = K / K_diag.
KernelValue kernel_ratio(const KernelQuery& q, const JacobiParams& params);

/// Kernel of the constant-coefficient solutions phi_j = A1 psi1_j + A2 psi2_j.
/// With `normalized` the value is divided by n (A1^2 + A2^2 - A1 A2 x).
cplx constantA_kernel(std::array<double, 2> A, const KernelQuery& q, bool normalized = false);

/// Batched evaluation over a grid of real (a, b) offsets sharing one pass of
/// the recurrence per distinct evaluation point.
struct GridKernelResult {
    std::vector<double> K; // per grid pair, order preserved
    double K_diag;         // K_n(x, x)
};
GridKernelResult cd_kernel_grid(double x, std::int64_t n,
                                std::span<const std::pair<double, double>> grid,
                                const JacobiParams& params,
                                Precision precision = Precision::standard);

/// max over the grid of |K/K_diag - sine_target|.
double universality_error(double x, std::int64_t n,
                          std::span<const std::pair<double, double>> grid,
                          const JacobiParams& params,
                          Precision precision = Precision::standard);

} // namespace cdbulk
