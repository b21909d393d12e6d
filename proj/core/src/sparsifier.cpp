#include "cdbulk/sparsifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "cdbulk/cd_kernel.hpp"
#include "cdbulk/chebyshev.hpp"
#include "cdbulk/parallel.hpp"

namespace cdbulk {

MSequence::MSequence(SparseSpec spec, std::int64_t scan_limit, int rank_cap)
    : spec_(std::move(spec)), scan_limit_(scan_limit), rank_cap_(rank_cap) {
    const double M1 = m_bound(1, StripCertification::skip).M;
    const auto bp1 = spec_.envelope_first_below(1.0 / (M1 * M1 * M1 * M1), scan_limit_);
    if (!bp1) throw std::runtime_error("envelope does not decay");
    breakpoints_.emplace_back(1, *bp1);
}

void MSequence::ensure(std::int64_t k) {
    while (!saturated_ && breakpoints_.back().second <= k) {
        const int r = breakpoints_.back().first + 1;
        if (r > rank_cap_) {
            saturated_ = true;
            break;
        }
        const double M = m_bound(r, StripCertification::skip).M;
        const double rd = double(r);
        const double threshold = 1.0 / (M * M * M * M * rd * rd * rd * rd);
        const auto bp = spec_.envelope_first_below(threshold, scan_limit_);
        if (!bp) {
            saturated_ = true; // decays, but not within the scan horizon: hold the rank
            break;
        }
        breakpoints_.emplace_back(r, *bp);
    }
}

int MSequence::m_at(std::int64_t k) {
    if (k < 1) throw std::invalid_argument("MSequence: index starts at 1");
    ensure(k);
    int m = 1;
    for (const auto& [r, first] : breakpoints_) {
        if (first <= k) m = r;
        else break;
    }
    return m;
}

MSequence build_m_sequence(const SparseSpec& spec, std::int64_t scan_limit, int rank_cap) {
    return MSequence(spec, scan_limit, rank_cap);
}

void SparsifierConfig::validate() const {
    if (x_grid_size < 1) throw std::invalid_argument("SparsifierConfig: x_grid_size < 1");
    if (ab_grid_size < 1) throw std::invalid_argument("SparsifierConfig: ab_grid_size < 1");
    if (probe_multipliers.empty() || probe_multipliers.front() != 1) {
        throw std::invalid_argument("SparsifierConfig: probe multipliers must start at 1");
    }
    for (std::size_t i = 1; i < probe_multipliers.size(); ++i) {
        if (probe_multipliers[i] <= probe_multipliers[i - 1]) {
            throw std::invalid_argument("SparsifierConfig: probe multipliers must increase");
        }
    }
    if (!(tolerance_slack > 0.0 && tolerance_slack < 1.0)) {
        throw std::invalid_argument("SparsifierConfig: tolerance_slack must be in (0, 1)");
    }
    if (n_cap < 2) throw std::invalid_argument("SparsifierConfig: n_cap < 2");
    if (!(ratio_floor >= 2.0)) throw std::invalid_argument("SparsifierConfig: ratio_floor < 2");
}

double SparsifierConfig::ratio_floor_at(std::size_t level) const {
    return per_level_ratio_schedule ? ratio_floor * double(std::max<std::size_t>(level, 1))
                                    : ratio_floor;
}

std::pair<double, double> certification_interval(std::size_t level, int m) {
    const double lp = double(std::max<std::size_t>(level, 1));
    const double lo = -2.0 + 1.0 / double(m) + 1.0 / lp;
    const double hi = 2.0 - 1.0 / double(m) - 1.0 / lp;
    return {std::min(lo, hi), std::max(lo, hi)};
}

namespace {

std::vector<double> chebyshev_grid(double lo, double hi, int count) {
    std::vector<double> xs;
    xs.reserve(std::size_t(count));
    if (hi <= lo) {
        xs.push_back(0.5 * (lo + hi));
        return xs;
    }
    for (int i = 0; i < count; ++i) {
        const double c = count == 1 ? 0.0 : std::cos(std::numbers::pi * double(i) / double(count - 1));
        xs.push_back(0.5 * (lo + hi) + 0.5 * (hi - lo) * c);
    }
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    return xs;
}

} // namespace

CertificationGrid make_certification_grid(std::size_t level, int m, const SparsifierConfig& cfg) {
    const auto [lo, hi] = certification_interval(level, m);
    CertificationGrid grid;
    grid.xs = chebyshev_grid(lo, hi, cfg.x_grid_size);
    const double span = double(std::max<std::size_t>(level, 1));
    for (int i = 0; i < cfg.ab_grid_size; ++i) {
        grid.offsets.push_back(cfg.ab_grid_size == 1
                                   ? 0.0
                                   : -span + 2.0 * span * double(i) / double(cfg.ab_grid_size - 1));
    }
    for (double a : grid.offsets)
        for (double b : grid.offsets) grid.pairs.emplace_back(a, b);
    return grid;
}

namespace {

struct ProbeOutcome {
    double kappa_dev = 0.0;
    double ratio_dev = 0.0;
    double ratio_A = 0.0;
    bool in_interval = true;
};

struct GapContext {
    const SparsifierConfig* cfg;
    JacobiParams params;
    std::vector<double> xs;
    std::vector<double> offsets;
    std::vector<std::pair<double, double>> pairs;
    std::vector<double> kappa_x;   // per x
    std::vector<VarCoeffs> A_x;    // per x
    std::int64_t coeff_index = 1;  // index where A^(l) is constant
    double interval_lo = 0.0, interval_hi = 0.0;
};

void observe_state(const SparsifierConfig& cfg, const VarCoeffs& coeffs, double x) {
    if (!kappa_lower_bound_holds(coeffs, x)) {
        throw std::logic_error("find_gap: kappa lower bound violated at a sampled state");
    }
    if (cfg.state_observer) cfg.state_observer(coeffs);
}

ProbeOutcome evaluate_probe(const GapContext& ctx, std::int64_t n) {
    const auto& cfg = *ctx.cfg;
    ProbeOutcome total;
    const double reach = std::abs(ctx.offsets.empty() ? 0.0 : ctx.offsets.back());
    if (ctx.xs.front() - reach / double(n) < ctx.interval_lo ||
        ctx.xs.back() + reach / double(n) > ctx.interval_hi) {
        // Shifted points would leave I_m: the candidate fails outright and the
        // kernel grid (whose queries could even leave the bulk) is skipped.
        total.in_interval = false;
        total.kappa_dev = total.ratio_dev = std::numeric_limits<double>::infinity();
        return total;
    }

    std::vector<ProbeOutcome> slots(ctx.xs.size());
    parallel_for(ctx.xs.size(), cfg.threads, [&](std::size_t xi) {
        const double x = ctx.xs[xi];
        ProbeOutcome& slot = slots[xi];
        const GridKernelResult kernels = cd_kernel_grid(x, n, ctx.pairs, ctx.params);
        const double kap = ctx.kappa_x[xi];
        for (std::size_t i = 0; i < ctx.pairs.size(); ++i) {
            const auto& [a, b] = ctx.pairs[i];
            const double kdev =
                std::fabs(kernels.K[i] / (double(n) * kap) - scaled_kernel_target(x, a, b));
            const double rdev = std::fabs(kernels.K[i] / kernels.K_diag - sine_target(x, a, b));
            slot.kappa_dev = std::max(slot.kappa_dev, kdev);
            slot.ratio_dev = std::max(slot.ratio_dev, rdev);
        }
        const VarCoeffs& base = ctx.A_x[xi];
        const double base_norm2 = std::norm(base.A1) + std::norm(base.A2);
        for (double c : ctx.offsets) {
            const double xc = x + c / double(n);
            const VarCoeffs shifted = coeffs_from_poly(ctx.coeff_index, cplx(xc), ctx.params);
            observe_state(cfg, shifted, xc);
            const double norm2 = std::norm(shifted.A1) + std::norm(shifted.A2);
            slot.ratio_A = std::max(slot.ratio_A, norm2 / base_norm2);
        }
    });
    for (const auto& slot : slots) {
        total.kappa_dev = std::max(total.kappa_dev, slot.kappa_dev);
        total.ratio_dev = std::max(total.ratio_dev, slot.ratio_dev);
        total.ratio_A = std::max(total.ratio_A, slot.ratio_A);
    }
    return total;
}

} // namespace

GapCertificate find_gap(std::size_t level, const SparseSpec& placed, MSequence& mseq,
                        const SparsifierConfig& cfg) {
    cfg.validate();
    if (placed.site_count() != level) {
        throw std::invalid_argument("find_gap: prefix must carry exactly `level` sites");
    }
    const std::int64_t prev = level == 0 ? 1 : placed.site(level - 1);
    if (cfg.n_cap < std::int64_t(10.0 * cfg.ratio_floor * double(prev))) {
        throw std::invalid_argument("SparsifierConfig: n_cap leaves no room above the prefix");
    }

    const std::size_t lp = std::max<std::size_t>(level, 1);
    const int m = mseq.m_at(std::int64_t(level) + 1);
    const IntervalBound ib = m_bound(m, StripCertification::skip);
    const double threshold = cfg.tolerance_slack / double(lp);

    GapContext ctx;
    ctx.cfg = &cfg;
    ctx.params = JacobiParams{placed, std::nullopt};
    CertificationGrid grid = make_certification_grid(level, m, cfg);
    ctx.xs = std::move(grid.xs);
    ctx.offsets = std::move(grid.offsets);
    ctx.pairs = std::move(grid.pairs);
    ctx.interval_lo = ib.lo;
    ctx.interval_hi = ib.hi;
    ctx.coeff_index = level == 0 ? 1 : prev + 1;
    for (double x : ctx.xs) {
        VarCoeffs coeffs = coeffs_from_poly(ctx.coeff_index, cplx(x), ctx.params);
        observe_state(cfg, coeffs, x);
        ctx.kappa_x.push_back(kappa(coeffs, x).real());
        ctx.A_x.push_back(coeffs);
    }

    std::int64_t candidate =
        std::max<std::int64_t>(2, std::int64_t(std::ceil(cfg.ratio_floor_at(level) * double(prev))));
    GapCertificate best;
    bool have_best = false;
    while (candidate <= cfg.n_cap) {
        GapCertificate cert;
        cert.level = level;
        cert.N_hat = candidate;
        bool pass = true;
        for (int mult : cfg.probe_multipliers) {
            const std::int64_t n = candidate * mult;
            const ProbeOutcome probe = evaluate_probe(ctx, n);
            cert.probes.emplace_back(n, probe.kappa_dev);
            cert.max_kernel_error = std::max(cert.max_kernel_error, probe.kappa_dev);
            cert.max_ratio_error = std::max(cert.max_ratio_error, probe.ratio_dev);
            cert.ratio_A_max = std::max(cert.ratio_A_max, probe.ratio_A);
            if (!probe.in_interval || probe.kappa_dev > threshold || probe.ratio_dev > threshold ||
                probe.ratio_A > 2.0) {
                pass = false;
            }
        }
        if (pass) return cert;
        if (!have_best || cert.max_kernel_error < best.max_kernel_error) {
            best = cert;
            have_best = true;
        }
        if (candidate > cfg.n_cap / 2) break;
        candidate *= 2;
    }
    throw CapExceededError("find_gap: cap exceeded at level " + std::to_string(level), best);
}

SparsifyResult generate_spec(const VRule& rule, std::size_t levels, const SparsifierConfig& cfg) {
    cfg.validate();
    SparsifyResult out{SparseSpec::from_rule(rule, {}, EnvelopeRule::auto_from_v(), true), {}};
    if (levels == 0) return out;
    MSequence mseq = build_m_sequence(out.spec);
    for (std::size_t level = 0; level < levels; ++level) {
        GapCertificate cert;
        try {
            cert = find_gap(level, out.spec, mseq, cfg);
        } catch (const CapExceededError& e) {
            throw SparsifyCapExceededError("generate_spec: " + std::string(e.what()), out,
                                           e.best_attempt);
        }
        out.spec.append_site(cert.N_hat);
        out.certificates.push_back(std::move(cert));
    }
    bool monotone_ratios = true;
    for (std::size_t j = 2; j < out.spec.site_count(); ++j) {
        const double r_prev = double(out.spec.site(j - 1)) / double(out.spec.site(j - 2));
        const double r = double(out.spec.site(j)) / double(out.spec.site(j - 1));
        if (r < r_prev) monotone_ratios = false;
    }
    if (out.spec.site_count() >= 2 && monotone_ratios) out.spec.set_ratio_sparse(true);
    return out;
}

MeasureClass classify_measure(const SparseSpec& spec) {
    const VRule& v = spec.v_rule();
    switch (v.kind) {
    case VRule::Kind::zero:
        return MeasureClass::absolutely_continuous;
    case VRule::Kind::power_law:
        if (v.amplitude == 0.0) return MeasureClass::absolutely_continuous;
        // sum k^{-2p} diverges exactly when 2p <= 1
        return v.exponent <= 0.5 ? MeasureClass::singular : MeasureClass::absolutely_continuous;
    case VRule::Kind::geometric:
        return MeasureClass::absolutely_continuous;
    case VRule::Kind::explicit_list:
        // The list itself is square-summable; the verdict hinges on what the
        // envelope admits past the materialized data.
        switch (spec.envelope_rule().kind) {
        case EnvelopeRule::Kind::auto_from_v:
        case EnvelopeRule::Kind::explicit_list:
            return MeasureClass::absolutely_continuous; // zero beyond finite data
        case EnvelopeRule::Kind::geometric:
            return MeasureClass::absolutely_continuous;
        case EnvelopeRule::Kind::power_law:
            return spec.envelope_rule().exponent > 0.5 ? MeasureClass::absolutely_continuous
                                                       : MeasureClass::inconclusive;
        case EnvelopeRule::Kind::constant:
            return spec.envelope_rule().level == 0.0 ? MeasureClass::absolutely_continuous
                                                     : MeasureClass::inconclusive;
        }
    }
    return MeasureClass::inconclusive;
}

const char* to_string(MeasureClass c) {
    switch (c) {
    case MeasureClass::singular: return "singular";
    case MeasureClass::absolutely_continuous: return "absolutely_continuous";
    case MeasureClass::inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

} // namespace cdbulk
