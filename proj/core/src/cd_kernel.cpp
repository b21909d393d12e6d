#include "cdbulk/cd_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "cdbulk/dd.hpp"
#include "cdbulk/recurrence.hpp"

namespace cdbulk {

namespace {

constexpr double kNearConfluentFactor = 1e-8;
constexpr double kDegenerateDiagonal = 1e-300;

double magnitude(double v) { return std::fabs(v); }
double magnitude(cplx v) { return std::abs(v); }
double magnitude(dd v) { return std::fabs(v.hi); }

cplx as_cplx_value(double v) { return {v, 0.0}; }
cplx as_cplx_value(cplx v) { return v; }
cplx as_cplx_value(dd v) { return {v.to_double(), 0.0}; }

JacobiParams with_level(const JacobiParams& params, const KernelQuery& q) {
    if (!q.level) return params;
    JacobiParams p = params;
    p.level = q.level;
    return p;
}

template <class S>
cplx confluent_kernel(const detail::PolyState<S>& s) {
    return as_cplx_value(s.dp * s.p_prev - s.p * s.dp_prev);
}

template <class S>
cplx cd_two_point(const detail::PolyState<S>& sz, const detail::PolyState<S>& sw, S z, S w) {
    return as_cplx_value((sz.p * sw.p_prev - sw.p * sz.p_prev) / (z - w));
}

// Shared CD evaluation for an arbitrary initial state (p_0, p_{-1}) = (c1, c2)
// evolving under `params`; covers both the orthonormal polynomials (1, 0) and
// the constant-coefficient solutions (A1, A2).
template <class S>
cplx cd_kernel_typed(S z, S w, std::int64_t n, const JacobiParams& params, bool allow_deriv,
                     bool non_real_offsets, S c1, S c2) {
    const auto seed = [&](S point) {
        detail::PolyState<S> st(point);
        st.p = c1;
        st.p_prev = c2;
        return st;
    };
    const bool exact_confluent = magnitude(z - w) == 0.0;
    if (exact_confluent && !allow_deriv) {
        if (non_real_offsets) {
            throw std::invalid_argument(
                "cd_kernel: confluent but non-real query with derivative path disabled");
        }
        throw std::invalid_argument("cd_kernel: confluent query needs the derivative path");
    }
    const bool near_confluent =
        !exact_confluent && magnitude(z - w) < kNearConfluentFactor * (1.0 + magnitude(z));
    if (exact_confluent || (near_confluent && allow_deriv)) {
        // Midpoint evaluation: the O(|z-w|) Taylor term of the antisymmetric
        // numerator cancels, leaving an O(|z-w|^2 n^2) relative residual.
        detail::PolyState<S> st = seed(exact_confluent ? z : (z + w) * 0.5);
        detail::advance_states(std::span<detail::PolyState<S>, 1>(&st, 1), params, 0, n);
        return confluent_kernel(st);
    }
    detail::PolyState<S> states[2] = {seed(z), seed(w)};
    detail::advance_states(std::span<detail::PolyState<S>, 2>(states, 2), params, 0, n);
    return cd_two_point(states[0], states[1], z, w);
}

// Neumaier-compensated accumulator per scalar type; dd sums are already
// compensated by construction.
template <class S>
struct KernelAccumulator;

template <>
struct KernelAccumulator<double> {
    double sum = 0.0, carry = 0.0;
    void add(double v) {
        const double t = sum + v;
        carry += std::fabs(sum) >= std::fabs(v) ? (sum - t) + v : (v - t) + sum;
        sum = t;
    }
    cplx value() const { return {sum + carry, 0.0}; }
};

template <>
struct KernelAccumulator<dd> {
    dd sum{};
    void add(dd v) { sum = sum + v; }
    cplx value() const { return {sum.to_double(), 0.0}; }
};

template <>
struct KernelAccumulator<cplx> {
    KernelAccumulator<double> re, im;
    void add(cplx v) {
        re.add(v.real());
        im.add(v.imag());
    }
    cplx value() const { return {re.value().real(), im.value().real()}; }
};

template <class S>
cplx direct_sum_typed(S z, S w, std::int64_t n, const JacobiParams& params) {
    detail::PolyState<S> states[2] = {detail::PolyState<S>(z), detail::PolyState<S>(w)};
    auto span = std::span<detail::PolyState<S>, 2>(states, 2);
    KernelAccumulator<S> acc;
    for (std::int64_t k = 0; k < n; ++k) {
        acc.add(states[0].p * states[1].p);
        detail::advance_states(span, params, k, k + 1);
    }
    return acc.value();
}

} // namespace

void KernelQuery::validate() const {
    if (!(std::abs(x) < 2.0)) throw std::invalid_argument("KernelQuery: x outside bulk (-2, 2)");
    if (n < 1) throw std::invalid_argument("KernelQuery: order must be >= 1");
    if (std::abs(a.imag()) > 1.0 || std::abs(b.imag()) > 1.0) {
        throw std::invalid_argument("KernelQuery: imaginary offsets must stay in the strip |Im| <= 1");
    }
    const double reach = std::max(std::abs(a), std::abs(b)) / double(n);
    if (!(x - reach > -2.0 && x + reach < 2.0)) {
        throw std::invalid_argument("KernelQuery: shifted points leave the bulk");
    }
    if (precision == Precision::compensated && !real_offsets()) {
        throw std::invalid_argument("KernelQuery: compensated mode requires real offsets");
    }
}

cplx cd_kernel(const KernelQuery& q, const JacobiParams& params0) {
    q.validate();
    const JacobiParams params = with_level(params0, q);
    const double inv_n = 1.0 / double(q.n);
    if (q.precision == Precision::compensated) {
        const double z = q.x + q.a.real() * inv_n;
        const double w = q.x + q.b.real() * inv_n;
        return cd_kernel_typed<dd>(dd(z), dd(w), q.n, params, q.allow_derivative_path, false,
                                   dd(1.0), dd(0.0));
    }
    if (q.real_offsets()) {
        const double z = q.x + q.a.real() * inv_n;
        const double w = q.x + q.b.real() * inv_n;
        return cd_kernel_typed<double>(z, w, q.n, params, q.allow_derivative_path, false, 1.0, 0.0);
    }
    const cplx z = q.x + q.a * inv_n;
    const cplx w = q.x + q.b * inv_n;
    return cd_kernel_typed<cplx>(z, w, q.n, params, q.allow_derivative_path, true, 1.0, 0.0);
}

cplx cd_kernel_direct(const KernelQuery& q, const JacobiParams& params0) {
    q.validate();
    const JacobiParams params = with_level(params0, q);
    const double inv_n = 1.0 / double(q.n);
    if (q.precision == Precision::compensated) {
        return direct_sum_typed<dd>(dd(q.x + q.a.real() * inv_n), dd(q.x + q.b.real() * inv_n),
                                    q.n, params);
    }
    if (q.real_offsets()) {
        return direct_sum_typed<double>(q.x + q.a.real() * inv_n, q.x + q.b.real() * inv_n, q.n,
                                        params);
    }
    return direct_sum_typed<cplx>(q.x + q.a * inv_n, q.x + q.b * inv_n, q.n, params);
}

namespace {

template <class S>
KernelValue kernel_ratio_typed(const KernelQuery& q, const JacobiParams& params, S z, S w, S x) {
    const bool exact_confluent = magnitude(z - w) == 0.0;
    const bool near_confluent =
        !exact_confluent && magnitude(z - w) < kNearConfluentFactor * (1.0 + magnitude(z));
    if (exact_confluent && !q.allow_derivative_path) {
        throw std::invalid_argument(
            q.real_offsets() ? "kernel_ratio: confluent query needs the derivative path"
                             : "kernel_ratio: confluent but non-real query with derivative path "
                               "disabled");
    }
    const bool use_confluent_formula =
        exact_confluent || (near_confluent && q.allow_derivative_path);

    detail::PolyState<S> states[3] = {
        detail::PolyState<S>(use_confluent_formula && !exact_confluent ? (z + w) * 0.5 : z),
        detail::PolyState<S>(w), detail::PolyState<S>(x)};
    detail::advance_states(std::span<detail::PolyState<S>, 3>(states, 3), params, 0, q.n);

    cplx K;
    if (use_confluent_formula) {
        K = confluent_kernel(states[0]);
    } else {
        K = cd_two_point(states[0], states[1], z, w);
    }
    const cplx K_diag = confluent_kernel(states[2]);
    if (std::abs(K_diag) < kDegenerateDiagonal) {
        throw std::runtime_error("kernel_ratio: degenerate diagonal");
    }
    return {K, K_diag, K / K_diag, q.n};
}

} // namespace

KernelValue kernel_ratio(const KernelQuery& q, const JacobiParams& params0) {
    q.validate();
    const JacobiParams params = with_level(params0, q);
    const double inv_n = 1.0 / double(q.n);
    if (q.precision == Precision::compensated) {
        return kernel_ratio_typed<dd>(q, params, dd(q.x + q.a.real() * inv_n),
                                      dd(q.x + q.b.real() * inv_n), dd(q.x));
    }
    if (q.real_offsets()) {
        return kernel_ratio_typed<double>(q, params, q.x + q.a.real() * inv_n,
                                          q.x + q.b.real() * inv_n, q.x);
    }
    return kernel_ratio_typed<cplx>(q, params, q.x + q.a * inv_n, q.x + q.b * inv_n, cplx(q.x));
}

cplx constantA_kernel(std::array<double, 2> A, const KernelQuery& q, bool normalized) {
    if (A[0] == 0.0 && A[1] == 0.0) {
        throw std::invalid_argument("constantA_kernel: A must be nonzero");
    }
    q.validate();
    const JacobiParams free{SparseSpec::free_case(), std::nullopt};
    const double inv_n = 1.0 / double(q.n);
    cplx K;
    if (q.real_offsets() && q.precision == Precision::standard) {
        const double z = q.x + q.a.real() * inv_n;
        const double w = q.x + q.b.real() * inv_n;
        K = cd_kernel_typed<double>(z, w, q.n, free, q.allow_derivative_path, false, A[0], A[1]);
    } else if (q.precision == Precision::compensated) {
        const double z = q.x + q.a.real() * inv_n;
        const double w = q.x + q.b.real() * inv_n;
        K = cd_kernel_typed<dd>(dd(z), dd(w), q.n, free, q.allow_derivative_path, false, dd(A[0]),
                                dd(A[1]));
    } else {
        const cplx z = q.x + q.a * inv_n;
        const cplx w = q.x + q.b * inv_n;
        K = cd_kernel_typed<cplx>(z, w, q.n, free, q.allow_derivative_path, true, cplx(A[0]),
                                  cplx(A[1]));
    }
    if (!normalized) return K;
    const double kap = A[0] * A[0] + A[1] * A[1] - A[0] * A[1] * q.x;
    return K / (double(q.n) * kap);
}

namespace {

struct PairPlan {
    enum class Kind { confluent, near, two_point } kind;
    std::size_t i = 0, j = 0; // point registry indices
    double z = 0.0, w = 0.0;  // original shifted points (two_point)
};

template <class S>
GridKernelResult grid_typed(double x, std::int64_t n,
                            std::span<const std::pair<double, double>> grid,
                            const JacobiParams& params) {
    std::vector<double> points;
    std::map<double, std::size_t> index;
    const auto point_id = [&](double p) {
        const auto it = index.find(p);
        if (it != index.end()) return it->second;
        const std::size_t id = points.size();
        points.push_back(p);
        index.emplace(p, id);
        return id;
    };

    const std::size_t diag_id = point_id(x);
    std::vector<PairPlan> plans;
    plans.reserve(grid.size());
    for (const auto& [a, b] : grid) {
        const double za = x + a / double(n);
        const double zb = x + b / double(n);
        if (za == zb) {
            plans.push_back({PairPlan::Kind::confluent, point_id(za), 0, za, zb});
        } else if (std::fabs(za - zb) < kNearConfluentFactor * (1.0 + std::fabs(za))) {
            plans.push_back({PairPlan::Kind::near, point_id(0.5 * (za + zb)), 0, za, zb});
        } else {
            plans.push_back({PairPlan::Kind::two_point, point_id(za), point_id(zb), za, zb});
        }
    }

    std::vector<detail::PolyState<S>> states;
    states.reserve(points.size());
    for (double p : points) states.emplace_back(S(p));
    detail::advance_states(std::span<detail::PolyState<S>>(states), params, 0, n);

    GridKernelResult out;
    out.K_diag = confluent_kernel(states[diag_id]).real();
    if (std::fabs(out.K_diag) < kDegenerateDiagonal) {
        throw std::runtime_error("cd_kernel_grid: degenerate diagonal");
    }
    out.K.reserve(plans.size());
    for (const auto& plan : plans) {
        switch (plan.kind) {
        case PairPlan::Kind::confluent:
        case PairPlan::Kind::near:
            out.K.push_back(confluent_kernel(states[plan.i]).real());
            break;
        case PairPlan::Kind::two_point:
            out.K.push_back(
                cd_two_point(states[plan.i], states[plan.j], S(plan.z), S(plan.w)).real());
            break;
        }
    }
    return out;
}

} // namespace

GridKernelResult cd_kernel_grid(double x, std::int64_t n,
                                std::span<const std::pair<double, double>> grid,
                                const JacobiParams& params, Precision precision) {
    if (grid.empty()) throw std::invalid_argument("cd_kernel_grid: empty grid");
    for (const auto& [a, b] : grid) {
        KernelQuery q{x, cplx(a), cplx(b), n, std::nullopt, true, precision};
        q.validate();
    }
    if (precision == Precision::compensated) return grid_typed<dd>(x, n, grid, params);
    return grid_typed<double>(x, n, grid, params);
}

double universality_error(double x, std::int64_t n,
                          std::span<const std::pair<double, double>> grid,
                          const JacobiParams& params, Precision precision) {
    const GridKernelResult res = cd_kernel_grid(x, n, grid, params, precision);
    double worst = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto& [a, b] = grid[i];
        worst = std::max(worst, std::fabs(res.K[i] / res.K_diag - sine_target(x, a, b)));
    }
    return worst;
}

} // namespace cdbulk
