#pragma once

#include <cmath>
#include <complex>

namespace cdbulk {

using cplx = std::complex<double>;

/// Dense 2x2 complex matrix, row-major. Small enough to live in registers;
/// all operations are value-returning.
struct Mat2 {
    cplx m00{}, m01{}, m10{}, m11{};

    static Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }

    friend Mat2 operator*(const Mat2& a, const Mat2& b) {
        return {a.m00 * b.m00 + a.m01 * b.m10, a.m00 * b.m01 + a.m01 * b.m11,
                a.m10 * b.m00 + a.m11 * b.m10, a.m10 * b.m01 + a.m11 * b.m11};
    }
    friend Mat2 operator+(const Mat2& a, const Mat2& b) {
        return {a.m00 + b.m00, a.m01 + b.m01, a.m10 + b.m10, a.m11 + b.m11};
    }
    friend Mat2 operator-(const Mat2& a, const Mat2& b) {
        return {a.m00 - b.m00, a.m01 - b.m01, a.m10 - b.m10, a.m11 - b.m11};
    }
    friend Mat2 operator*(cplx s, const Mat2& a) {
        return {s * a.m00, s * a.m01, s * a.m10, s * a.m11};
    }

    cplx det() const { return m00 * m11 - m01 * m10; }

    double frobenius_norm() const {
        return std::sqrt(std::norm(m00) + std::norm(m01) + std::norm(m10) + std::norm(m11));
    }

    /// Largest entry magnitude; used to scale roundoff tolerances.
    double entry_scale() const {
        return std::max(std::max(std::abs(m00), std::abs(m01)),
                        std::max(std::abs(m10), std::abs(m11)));
    }

    /// Inverse of a unimodular matrix (det = 1): the adjugate.
    Mat2 unimodular_inverse() const { return {m11, -m01, -m10, m00}; }

    friend std::pair<cplx, cplx> operator*(const Mat2& a, const std::pair<cplx, cplx>& v) {
        return {a.m00 * v.first + a.m01 * v.second, a.m10 * v.first + a.m11 * v.second};
    }
};

} // namespace cdbulk
