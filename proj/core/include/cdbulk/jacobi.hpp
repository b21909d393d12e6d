#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "cdbulk/errors.hpp"
#include "cdbulk/mat2.hpp"

namespace cdbulk {

/// Closed form (or explicit list) generating the couplings v_1, v_2, ...
/// Indices are the mathematical ones: value_at(1) is the first coupling.
struct VRule {
    enum class Kind { zero, power_law, geometric, explicit_list };

    Kind kind = Kind::zero;
    double amplitude = 0.0; // power_law, geometric
    double exponent = 0.0;  // power_law: v_k = amplitude * k^-exponent, exponent > 0
    double ratio = 0.0;     // geometric: v_k = amplitude * ratio^k, |ratio| < 1
    std::vector<double> values; // explicit_list

    static VRule zero() { return {}; }
    static VRule power_law(double amplitude, double exponent);
    static VRule geometric(double amplitude, double ratio);
    static VRule explicit_list(std::vector<double> values);

    double value_at(std::int64_t k) const; // k >= 1
    bool finitely_supported() const { return kind == Kind::zero || kind == Kind::explicit_list; }
};

/// Non-increasing majorant of |v_k| with limit 0; makes tail conditions
/// ("for all k >= K ...") decidable. `auto_from_v` derives the envelope from
/// the coupling rule (for explicit lists: the suffix maximum, 0 past the end).
struct EnvelopeRule {
    enum class Kind { auto_from_v, power_law, geometric, explicit_list, constant };

    Kind kind = Kind::auto_from_v;
    double amplitude = 0.0;
    double exponent = 0.0;
    double ratio = 0.0;
    double level = 0.0; // constant
    std::vector<double> values;

    static EnvelopeRule auto_from_v() { return {}; }
    static EnvelopeRule power_law(double amplitude, double exponent);
    static EnvelopeRule geometric(double amplitude, double ratio);
    static EnvelopeRule explicit_list(std::vector<double> values);
    static EnvelopeRule constant(double level);
};

/// Sparse perturbation of the free Jacobi matrix: couplings v_j placed at
/// strictly increasing sites N_j (with N_1 >= 2), plus the decay envelope.
class SparseSpec {
public:
    SparseSpec() = default;

    static SparseSpec free_case() { return SparseSpec(); }
    static SparseSpec from_rule(VRule rule, std::vector<std::int64_t> sites,
                                EnvelopeRule envelope = EnvelopeRule::auto_from_v(),
                                bool adaptive = false);
    static SparseSpec explicit_list(std::vector<double> couplings, std::vector<std::int64_t> sites);

    std::size_t site_count() const { return sites_.size(); }
    std::int64_t site(std::size_t j) const { return sites_[j]; }          // 0-based
    double coupling(std::size_t j) const { return couplings_[j]; }        // 0-based
    const std::vector<std::int64_t>& sites() const { return sites_; }

    /// Envelope value at sequence index k >= 1.
    double envelope_at(std::int64_t k) const;
    /// First index k with envelope_at(k) < threshold, scanning explicit data up
    /// to scan_limit; closed forms are inverted analytically. Empty when the
    /// envelope never drops below the threshold.
    std::optional<std::int64_t> envelope_first_below(double threshold,
                                                     std::int64_t scan_limit = 1'000'000) const;

    /// Appends a site, drawing its coupling from the rule (next explicit value
    /// for list rules). Keeps all invariants checked.
    void append_site(std::int64_t site);

    double max_abs_coupling() const;
    bool adaptive() const { return adaptive_; }
    bool ratio_sparse() const { return ratio_sparse_; }
    void set_ratio_sparse(bool flag);

    const VRule& v_rule() const { return v_rule_; }
    const EnvelopeRule& envelope_rule() const { return envelope_rule_; }

private:
    void validate() const;

    VRule v_rule_{};
    EnvelopeRule envelope_rule_{};
    std::vector<std::int64_t> sites_{};
    std::vector<double> couplings_{}; // materialized cache, one per site
    bool adaptive_ = false;
    bool ratio_sparse_ = false;
};

/// A sparse spec together with a truncation level: level l keeps only the
/// first l sites (Jacobi coefficients of the finite-rank measure), nullopt
/// keeps all of them.
struct JacobiParams {
    SparseSpec spec;
    std::optional<std::size_t> level{};

    std::size_t active_site_count() const {
        const std::size_t n = spec.site_count();
        return level ? std::min(*level, n) : n;
    }

    /// b_n of the operator (n >= 1 is the matrix index); O(log #sites).
    double b_at(std::int64_t n) const;

    /// Number of active sites with position <= n.
    std::size_t sites_up_to(std::int64_t n) const;
};

double b_at(std::int64_t n, const JacobiParams& params);

/// State of the three-term recurrence at index n: (p_n(z), p_{n-1}(z)).
struct PolyPair {
    std::int64_t n;
    cplx p;
    cplx p_prev;
    cplx z;
};

enum class Precision { standard, compensated };

/// Forward recurrence from (p_0, p_{-1}) = (1, 0); O(n) time, O(1) memory.
/// Real z runs in real arithmetic (imaginary parts of the result are exactly
/// zero); Precision::compensated uses double-double arithmetic and requires a
/// real evaluation point. Throws EscapedBulkError when |p| exceeds 1e200.
PolyPair eval_poly(std::int64_t n, cplx z, const JacobiParams& params,
                   Precision precision = Precision::standard);

/// Invokes the sink with the PolyPair for every index 0..n_max in order.
void eval_poly_stream(std::int64_t n_max, cplx z, const JacobiParams& params,
                      const std::function<void(const PolyPair&)>& sink,
                      Precision precision = Precision::standard);

} // namespace cdbulk
