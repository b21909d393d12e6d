#include "cdbulk/chebyshev.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace cdbulk {

namespace {

constexpr double kStripSafety = 4.0;
constexpr double kTrigFallbackSinTheta = 1e-7;

void require_order(std::int64_t n, std::int64_t least, const char* who) {
    if (n < least) {
        throw std::invalid_argument(std::string(who) + ": order below " + std::to_string(least));
    }
}

// psi1 via the matrix power; used where the trigonometric form degenerates
// (z within roundoff of +-2).
cplx psi1_by_power(std::int64_t n, cplx z) {
    if (n <= -1) return 0.0;
    return transfer_matrix(n, z).m00;
}

double chebyshev_node(double lo, double hi, int i, int count) {
    if (count <= 1) return 0.5 * (lo + hi);
    const double c = std::cos(std::numbers::pi * double(i) / double(count - 1));
    return 0.5 * (lo + hi) + 0.5 * (hi - lo) * c;
}

} // namespace

SpectralPoint SpectralPoint::from_energy(double x) {
    if (!(std::abs(x) < 2.0)) throw OutsideBulkError("SpectralPoint: energy outside bulk (-2, 2)");
    return {x, std::acos(0.5 * x)};
}

SpectralPoint SpectralPoint::from_angle(double theta) {
    if (!(theta > 0.0 && theta < std::numbers::pi)) {
        throw OutsideBulkError("SpectralPoint: angle outside (0, pi)");
    }
    return {2.0 * std::cos(theta), theta};
}

cplx psi1(std::int64_t n, cplx z) {
    require_order(n, -1, "psi1");
    if (n == -1) return 0.0;
    if (n == 0) return 1.0;
    const cplx theta = std::acos(0.5 * z);
    const cplx s = std::sin(theta);
    if (std::abs(s) < kTrigFallbackSinTheta) return psi1_by_power(n, z);
    return std::sin(cplx(double(n + 1)) * theta) / s;
}

cplx psi2(std::int64_t n, cplx z) {
    require_order(n, -1, "psi2");
    if (n == -1) return 1.0;
    return -psi1(n - 1, z);
}

double psi1(std::int64_t n, double x) {
    require_order(n, -1, "psi1");
    if (!(std::abs(x) < 2.0)) throw OutsideBulkError("psi1: outside bulk");
    if (n == -1) return 0.0;
    if (n == 0) return 1.0;
    const double theta = std::acos(0.5 * x);
    return std::sin(double(n + 1) * theta) / std::sin(theta);
}

double psi2(std::int64_t n, double x) {
    require_order(n, -1, "psi2");
    if (!(std::abs(x) < 2.0)) throw OutsideBulkError("psi2: outside bulk");
    if (n == -1) return 1.0;
    return -psi1(n - 1, x);
}

Mat2 transfer_matrix(std::int64_t n, cplx z) {
    require_order(n, 0, "transfer_matrix");
    Mat2 acc = Mat2::identity();
    Mat2 base{z, -1.0, 1.0, 0.0};
    std::uint64_t e = static_cast<std::uint64_t>(n);
    while (e != 0) {
        if (e & 1u) acc = acc * base;
        e >>= 1;
        if (e != 0) base = base * base;
    }
    return acc;
}

IntervalBound m_bound(int m, StripCertification strip) {
    if (m < 1) throw std::invalid_argument("m_bound: m must be >= 1");
    const double md = double(m);
    IntervalBound ib;
    ib.m = m;
    ib.lo = -2.0 + 1.0 / md;
    ib.hi = 2.0 - 1.0 / md;
    ib.M = 2.0 / std::sqrt(1.0 / md - 1.0 / (4.0 * md * md));
    ib.M_strip = kStripSafety * ib.M;

    // Certification sweep. Real arguments: iterate T_{n+1} = T_1 T_n and track
    // the Frobenius norm for every n up to the sweep depth.
    const int grid = 41;
    const std::int64_t sweep_depth = 10'000;
    const double tol = 1.0 + 1e-12;
    for (int i = 0; i < grid; ++i) {
        const double x = chebyshev_node(ib.lo, ib.hi, i, grid);
        double a = x, b = -1.0, c = 1.0, d = 0.0; // T_1
        for (std::int64_t n = 1; n <= sweep_depth; ++n) {
            const double norm = std::sqrt(a * a + b * b + c * c + d * d);
            if (norm > ib.M * tol) {
                throw ValidationError("m_bound: validation failure on I_" + std::to_string(m) +
                                      " at n=" + std::to_string(n));
            }
            const double na = x * a - c, nb = x * b - d;
            c = a; d = b; a = na; b = nb;
        }
    }

    if (strip == StripCertification::certify) {
        const std::vector<double> ts{-1.0, -0.5, 0.5, 1.0};
        for (int i = 0; i < grid; ++i) {
            const double x = chebyshev_node(ib.lo, ib.hi, i, grid);
            for (double t : ts) {
                for (std::int64_t n = 1; n <= 8192; n *= 2) {
                    const cplx z{x, t / double(n)};
                    const double norm = transfer_matrix(n, z).frobenius_norm();
                    if (norm > ib.M_strip * tol) {
                        throw ValidationError("m_bound: strip validation failure on I_" +
                                              std::to_string(m) + " at n=" + std::to_string(n));
                    }
                }
            }
        }
    }
    return ib;
}

double sine_target(double x, double a, double b) {
    if (!(std::abs(x) < 2.0)) throw OutsideBulkError("sine_target: outside bulk");
    const double u = std::abs(b - a) / std::sqrt(4.0 - x * x);
    if (u == 0.0) return 1.0;
    return std::sin(u) / u;
}

cplx sine_target(double x, cplx a, cplx b) {
    if (!(std::abs(x) < 2.0)) throw OutsideBulkError("sine_target: outside bulk");
    const cplx u = (b - a) / std::sqrt(4.0 - x * x);
    if (u == cplx(0.0)) return 1.0;
    return std::sin(u) / u;
}

double scaled_kernel_target(double x, double a, double b) {
    return 2.0 / (4.0 - x * x) * sine_target(x, a, b);
}

cplx scaled_kernel_target(double x, cplx a, cplx b) {
    return 2.0 / (4.0 - x * x) * sine_target(x, a, b);
}

double rho0(double x) {
    if (std::abs(x) >= 2.0) return 0.0;
    return 1.0 / (std::numbers::pi * std::sqrt(4.0 - x * x));
}

} // namespace cdbulk
