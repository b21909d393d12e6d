#pragma once

// Streamed evaluation of the three-term recurrence for one or many points in
// lockstep. The scalar type S is double, std::complex<double>, or dd; each
// state optionally carries the derivative recurrence
//   p'_{k+1} = (z - b_{k+1}) p'_k + p_k - p'_{k-1}
// used by the confluent kernel formula.

#include <complex>
#include <cstdint>
#include <span>
#include <string>

#include "cdbulk/dd.hpp"
#include "cdbulk/errors.hpp"
#include "cdbulk/jacobi.hpp"

namespace cdbulk::detail {

constexpr double kOverflowGuard = 1e200;

inline cplx to_cplx(double v) { return {v, 0.0}; }
inline cplx to_cplx(cplx v) { return v; }
inline cplx to_cplx(dd v) { return {v.to_double(), 0.0}; }

inline bool magnitude_exceeds(double v, double limit) { return std::fabs(v) > limit; }
inline bool magnitude_exceeds(cplx v, double limit) {
    return std::fabs(v.real()) > limit || std::fabs(v.imag()) > limit;
}
inline bool magnitude_exceeds(dd v, double limit) { return dd_magnitude_exceeds(v, limit); }

/// O(1) amortized lookup of b_{k} along a forward sweep (k non-decreasing).
class SiteCursor {
public:
    explicit SiteCursor(const JacobiParams& params)
        : spec_(&params.spec), active_(params.active_site_count()) {}

    double b_for(std::int64_t index) {
        while (j_ < active_ && spec_->site(j_) < index) ++j_;
        if (j_ < active_ && spec_->site(j_) == index) return spec_->coupling(j_);
        return 0.0;
    }

private:
    const SparseSpec* spec_;
    std::size_t active_;
    std::size_t j_ = 0;
};

template <class S>
struct PolyState {
    S z{};
    S p{};       // p_k
    S p_prev{};  // p_{k-1}
    S dp{};      // p'_k
    S dp_prev{}; // p'_{k-1}

    PolyState() = default;
    explicit PolyState(S point) : z(point), p(S(1.0)), p_prev(S(0.0)), dp(S(0.0)), dp_prev(S(0.0)) {}
};

/// Advances every state from index `from` to index `to` (both are recurrence
/// indices k of p_k). All states share the coefficient stream.
template <class S, std::size_t Extent>
void advance_states(std::span<PolyState<S>, Extent> states, const JacobiParams& params,
                    std::int64_t from, std::int64_t to) {
    SiteCursor cursor(params);
    if (from > 0) cursor.b_for(from); // position the cursor
    for (std::int64_t k = from; k < to; ++k) {
        const double b = cursor.b_for(k + 1);
        for (auto& s : states) {
            const S c = s.z - S(b);
            const S p_next = c * s.p - s.p_prev;
            const S dp_next = c * s.dp + s.p - s.dp_prev;
            s.p_prev = s.p;
            s.p = p_next;
            s.dp_prev = s.dp;
            s.dp = dp_next;
            if (magnitude_exceeds(s.p, kOverflowGuard)) {
                throw EscapedBulkError("recurrence escaped bulk regime at index " +
                                       std::to_string(k + 1));
            }
        }
    }
}

} // namespace cdbulk::detail
