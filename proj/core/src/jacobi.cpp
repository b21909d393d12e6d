#include "cdbulk/jacobi.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "cdbulk/dd.hpp"
#include "cdbulk/recurrence.hpp"

namespace cdbulk {

VRule VRule::power_law(double amplitude, double exponent) {
    if (!(exponent > 0.0)) throw std::invalid_argument("VRule: power law needs exponent > 0");
    VRule r;
    r.kind = Kind::power_law;
    r.amplitude = amplitude;
    r.exponent = exponent;
    return r;
}

VRule VRule::geometric(double amplitude, double ratio) {
    if (!(std::abs(ratio) < 1.0)) throw std::invalid_argument("VRule: geometric needs |ratio| < 1");
    VRule r;
    r.kind = Kind::geometric;
    r.amplitude = amplitude;
    r.ratio = ratio;
    return r;
}

VRule VRule::explicit_list(std::vector<double> values) {
    VRule r;
    r.kind = Kind::explicit_list;
    r.values = std::move(values);
    return r;
}

double VRule::value_at(std::int64_t k) const {
    if (k < 1) throw std::invalid_argument("VRule: index starts at 1");
    switch (kind) {
    case Kind::zero: return 0.0;
    case Kind::power_law: return amplitude * std::pow(double(k), -exponent);
    case Kind::geometric: return amplitude * std::pow(ratio, double(k));
    case Kind::explicit_list:
        return k <= std::int64_t(values.size()) ? values[std::size_t(k - 1)] : 0.0;
    }
    return 0.0;
}

EnvelopeRule EnvelopeRule::power_law(double amplitude, double exponent) {
    if (!(amplitude >= 0.0) || !(exponent > 0.0)) {
        throw std::invalid_argument("EnvelopeRule: power law needs amplitude >= 0, exponent > 0");
    }
    EnvelopeRule e;
    e.kind = Kind::power_law;
    e.amplitude = amplitude;
    e.exponent = exponent;
    return e;
}

EnvelopeRule EnvelopeRule::geometric(double amplitude, double ratio) {
    if (!(amplitude >= 0.0) || !(ratio > 0.0 && ratio < 1.0)) {
        throw std::invalid_argument("EnvelopeRule: geometric needs amplitude >= 0, 0 < ratio < 1");
    }
    EnvelopeRule e;
    e.kind = Kind::geometric;
    e.amplitude = amplitude;
    e.ratio = ratio;
    return e;
}

EnvelopeRule EnvelopeRule::explicit_list(std::vector<double> values) {
    EnvelopeRule e;
    e.kind = Kind::explicit_list;
    e.values = std::move(values);
    for (std::size_t i = 0; i < e.values.size(); ++i) {
        if (e.values[i] < 0.0) throw std::invalid_argument("EnvelopeRule: negative entry");
        if (i > 0 && e.values[i] > e.values[i - 1]) {
            throw std::invalid_argument("EnvelopeRule: explicit envelope must be non-increasing");
        }
    }
    return e;
}

EnvelopeRule EnvelopeRule::constant(double level) {
    if (!(level >= 0.0)) throw std::invalid_argument("EnvelopeRule: negative constant");
    EnvelopeRule e;
    e.kind = Kind::constant;
    e.level = level;
    return e;
}

namespace {

// Envelope of the coupling rule itself; explicit lists take the suffix maximum
// so the result is non-increasing.
double auto_envelope_at(const VRule& v, std::int64_t k) {
    switch (v.kind) {
    case VRule::Kind::zero: return 0.0;
    case VRule::Kind::power_law: return std::abs(v.amplitude) * std::pow(double(k), -v.exponent);
    case VRule::Kind::geometric:
        return std::abs(v.amplitude) * std::pow(std::abs(v.ratio), double(k));
    case VRule::Kind::explicit_list: {
        double m = 0.0;
        for (std::int64_t i = std::int64_t(v.values.size()); i >= k && i >= 1; --i) {
            m = std::max(m, std::abs(v.values[std::size_t(i - 1)]));
        }
        return m;
    }
    }
    return 0.0;
}

std::optional<std::int64_t> closed_form_first_below(double amplitude, auto value_of,
                                                    double threshold, std::int64_t guess) {
    if (amplitude < threshold) return 1;
    // Walk the analytic guess to the exact boundary; the guess is off by at
    // most a few ulps of the inversion.
    std::int64_t k = std::max<std::int64_t>(guess, 1);
    while (k > 1 && value_of(k - 1) < threshold) --k;
    while (!(value_of(k) < threshold)) ++k;
    return k;
}

} // namespace

SparseSpec SparseSpec::from_rule(VRule rule, std::vector<std::int64_t> sites,
                                 EnvelopeRule envelope, bool adaptive) {
    SparseSpec s;
    s.v_rule_ = std::move(rule);
    s.envelope_rule_ = std::move(envelope);
    s.sites_ = std::move(sites);
    s.adaptive_ = adaptive;
    s.couplings_.reserve(s.sites_.size());
    for (std::size_t j = 0; j < s.sites_.size(); ++j) {
        s.couplings_.push_back(s.v_rule_.value_at(std::int64_t(j) + 1));
    }
    s.validate();
    return s;
}

SparseSpec SparseSpec::explicit_list(std::vector<double> couplings,
                                     std::vector<std::int64_t> sites) {
    if (couplings.size() != sites.size()) {
        throw std::invalid_argument("SparseSpec: couplings/sites size mismatch");
    }
    return from_rule(VRule::explicit_list(std::move(couplings)), std::move(sites));
}

double SparseSpec::envelope_at(std::int64_t k) const {
    if (k < 1) throw std::invalid_argument("SparseSpec: envelope index starts at 1");
    switch (envelope_rule_.kind) {
    case EnvelopeRule::Kind::auto_from_v: return auto_envelope_at(v_rule_, k);
    case EnvelopeRule::Kind::power_law:
        return envelope_rule_.amplitude * std::pow(double(k), -envelope_rule_.exponent);
    case EnvelopeRule::Kind::geometric:
        return envelope_rule_.amplitude * std::pow(envelope_rule_.ratio, double(k));
    case EnvelopeRule::Kind::explicit_list:
        return k <= std::int64_t(envelope_rule_.values.size())
                   ? envelope_rule_.values[std::size_t(k - 1)]
                   : 0.0;
    case EnvelopeRule::Kind::constant: return envelope_rule_.level;
    }
    return 0.0;
}

std::optional<std::int64_t> SparseSpec::envelope_first_below(double threshold,
                                                             std::int64_t scan_limit) const {
    if (!(threshold > 0.0)) return std::nullopt;
    const auto value = [this](std::int64_t k) { return envelope_at(k); };
    switch (envelope_rule_.kind) {
    case EnvelopeRule::Kind::constant:
        return envelope_rule_.level < threshold ? std::optional<std::int64_t>(1) : std::nullopt;
    case EnvelopeRule::Kind::power_law: {
        const double c = envelope_rule_.amplitude;
        if (c < threshold) return 1;
        const double guess = std::pow(c / threshold, 1.0 / envelope_rule_.exponent);
        return closed_form_first_below(c, value, threshold, std::int64_t(guess) + 1);
    }
    case EnvelopeRule::Kind::geometric: {
        const double c = envelope_rule_.amplitude;
        if (c == 0.0) return 1;
        const double guess = std::log(threshold / c) / std::log(envelope_rule_.ratio);
        return closed_form_first_below(c, value, threshold, std::int64_t(guess) + 1);
    }
    case EnvelopeRule::Kind::auto_from_v: {
        switch (v_rule_.kind) {
        case VRule::Kind::zero: return 1;
        case VRule::Kind::power_law: {
            const double c = std::abs(v_rule_.amplitude);
            if (c < threshold) return 1;
            const double guess = std::pow(c / threshold, 1.0 / v_rule_.exponent);
            return closed_form_first_below(c, value, threshold, std::int64_t(guess) + 1);
        }
        case VRule::Kind::geometric: {
            const double c = std::abs(v_rule_.amplitude);
            if (c == 0.0) return 1;
            const double q = std::abs(v_rule_.ratio);
            if (q == 0.0) return 1;
            const double guess = std::log(threshold / c) / std::log(q);
            return closed_form_first_below(c, value, threshold, std::int64_t(guess) + 1);
        }
        case VRule::Kind::explicit_list: break; // scan below
        }
        break;
    }
    case EnvelopeRule::Kind::explicit_list: break; // scan below
    }
    for (std::int64_t k = 1; k <= scan_limit; ++k) {
        if (envelope_at(k) < threshold) return k;
    }
    return std::nullopt;
}

void SparseSpec::append_site(std::int64_t site) {
    sites_.push_back(site);
    couplings_.push_back(v_rule_.value_at(std::int64_t(sites_.size())));
    validate();
}

double SparseSpec::max_abs_coupling() const {
    double m = 0.0;
    for (double v : couplings_) m = std::max(m, std::abs(v));
    return m;
}

void SparseSpec::set_ratio_sparse(bool flag) {
    ratio_sparse_ = flag;
    if (flag) validate();
}

void SparseSpec::validate() const {
    if (!sites_.empty() && sites_.front() < 2) {
        throw std::invalid_argument("SparseSpec: first site must be >= 2");
    }
    for (std::size_t j = 1; j < sites_.size(); ++j) {
        if (sites_[j] <= sites_[j - 1]) {
            throw std::invalid_argument("SparseSpec: sites must be strictly increasing");
        }
    }
    for (std::size_t j = 0; j < sites_.size(); ++j) {
        const double env = envelope_at(std::int64_t(j) + 1);
        if (env < std::abs(couplings_[j])) {
            throw std::invalid_argument("SparseSpec: envelope below |v_" + std::to_string(j + 1) +
                                        "|");
        }
        if (j > 0 && envelope_at(std::int64_t(j) + 1) > envelope_at(std::int64_t(j))) {
            throw std::invalid_argument("SparseSpec: envelope must be non-increasing");
        }
    }
    if (ratio_sparse_) {
        for (std::size_t j = 2; j < sites_.size(); ++j) {
            const double r_prev = double(sites_[j - 1]) / double(sites_[j - 2]);
            const double r = double(sites_[j]) / double(sites_[j - 1]);
            if (r < r_prev) {
                throw std::invalid_argument("SparseSpec: ratio-sparse flag violated");
            }
        }
    }
}

double JacobiParams::b_at(std::int64_t n) const {
    if (n < 1) throw std::invalid_argument("b_at: matrix index starts at 1");
    const auto& sites = spec.sites();
    const auto end = sites.begin() + std::ptrdiff_t(active_site_count());
    const auto it = std::lower_bound(sites.begin(), end, n);
    if (it != end && *it == n) return spec.coupling(std::size_t(it - sites.begin()));
    return 0.0;
}

std::size_t JacobiParams::sites_up_to(std::int64_t n) const {
    const auto& sites = spec.sites();
    const auto end = sites.begin() + std::ptrdiff_t(active_site_count());
    return std::size_t(std::upper_bound(sites.begin(), end, n) - sites.begin());
}

double b_at(std::int64_t n, const JacobiParams& params) { return params.b_at(n); }

namespace {

template <class S>
PolyPair eval_poly_typed(std::int64_t n, S z, cplx z_out, const JacobiParams& params) {
    detail::PolyState<S> st(z);
    detail::advance_states(std::span<detail::PolyState<S>, 1>(&st, 1), params, 0, n);
    return {n, detail::to_cplx(st.p), detail::to_cplx(st.p_prev), z_out};
}

} // namespace

PolyPair eval_poly(std::int64_t n, cplx z, const JacobiParams& params, Precision precision) {
    if (n < 0) throw std::invalid_argument("eval_poly: order must be >= 0");
    if (precision == Precision::compensated) {
        if (z.imag() != 0.0) {
            throw std::invalid_argument("eval_poly: compensated mode requires a real point");
        }
        return eval_poly_typed<dd>(n, dd(z.real()), z, params);
    }
    if (z.imag() == 0.0) return eval_poly_typed<double>(n, z.real(), z, params);
    return eval_poly_typed<cplx>(n, z, z, params);
}

namespace {

template <class S>
void eval_stream_typed(std::int64_t n_max, S z, cplx z_out, const JacobiParams& params,
                       const std::function<void(const PolyPair&)>& sink) {
    detail::PolyState<S> st(z);
    auto span = std::span<detail::PolyState<S>, 1>(&st, 1);
    for (std::int64_t k = 0; k <= n_max; ++k) {
        sink(PolyPair{k, detail::to_cplx(st.p), detail::to_cplx(st.p_prev), z_out});
        if (k < n_max) detail::advance_states(span, params, k, k + 1);
    }
}

} // namespace

void eval_poly_stream(std::int64_t n_max, cplx z, const JacobiParams& params,
                      const std::function<void(const PolyPair&)>& sink, Precision precision) {
    if (n_max < 0) throw std::invalid_argument("eval_poly_stream: order must be >= 0");
    if (precision == Precision::compensated) {
        if (z.imag() != 0.0) {
            throw std::invalid_argument("eval_poly_stream: compensated mode requires a real point");
        }
        eval_stream_typed<dd>(n_max, dd(z.real()), z, params, sink);
        return;
    }
    if (z.imag() == 0.0) {
        eval_stream_typed<double>(n_max, z.real(), z, params, sink);
        return;
    }
    eval_stream_typed<cplx>(n_max, z, z, params, sink);
}

} // namespace cdbulk
