#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "cdbulk/jacobi.hpp"
#include "cdbulk/varparam.hpp"

namespace cdbulk {

/// The staircase n -> m_n coupling the envelope decay to interval bounds:
/// the breakpoint for rank r is the first index with envelope < 1/(M_r^4 r^4),
/// m is constant between consecutive breakpoints and 1 before the second one.
/// Breakpoints materialize lazily as larger indices are queried; ranks are
/// capped once the envelope is identically zero past a finite index.
class MSequence {
public:
    MSequence(SparseSpec spec, std::int64_t scan_limit, int rank_cap);

    /// m at sequence index k >= 1; extends the breakpoint table on demand.
    int m_at(std::int64_t k);
    void ensure(std::int64_t k);

    /// (rank r, first index with m = r), for the materialized part.
    const std::vector<std::pair<int, std::int64_t>>& breakpoints() const { return breakpoints_; }

private:
    SparseSpec spec_;
    std::int64_t scan_limit_;
    int rank_cap_;
    std::vector<std::pair<int, std::int64_t>> breakpoints_;
    bool saturated_ = false;
};

/// Throws std::runtime_error("envelope does not decay") when the envelope
/// never drops below the rank-1 threshold within scan_limit.
MSequence build_m_sequence(const SparseSpec& spec, std::int64_t scan_limit = 1'000'000,
                           int rank_cap = 12);

struct SparsifierConfig {
    int x_grid_size = 9;      // Chebyshev-spaced points of the certification interval
    int ab_grid_size = 7;     // ab_grid_size^2 lattice on [-l, l]^2
    std::vector<int> probe_multipliers = {1, 2, 4, 8};
    double tolerance_slack = 0.5; // certified error must be <= slack / level
    std::int64_t n_cap = 10'000'000;
    double ratio_floor = 4.0;
    bool per_level_ratio_schedule = true; // floor grows as ratio_floor * level
    unsigned threads = 1;
    /// Invoked on every variation-of-parameters state sampled during
    /// certification (used by invariant checks; must be thread-safe).
    std::function<void(const VarCoeffs&)> state_observer{};

    void validate() const;
    double ratio_floor_at(std::size_t level) const;
};

/// Record that the level-l truncated operator passed the gap conditions at
/// N_hat on the certification grid: the kappa-normalized kernel deviation and
/// the kernel-ratio deviation stay below tolerance_slack/max(l,1) at every
/// probe, and coefficient norm ratios at shifted points stay <= 2.
struct GapCertificate {
    std::size_t level = 0;
    std::int64_t N_hat = 0;
    double max_kernel_error = 0.0; // sup of the kappa-normalized deviation
    double max_ratio_error = 0.0;  // sup of the kernel-ratio deviation
    double ratio_A_max = 0.0;
    std::vector<std::pair<std::int64_t, double>> probes; // (n, kappa-form grid error)
};

/// Gap search exhausted n_cap; carries the best candidate seen.
class CapExceededError : public std::runtime_error {
public:
    CapExceededError(std::string what, GapCertificate best)
        : std::runtime_error(std::move(what)), best_attempt(std::move(best)) {}
    GapCertificate best_attempt;
};

/// Certification interval for level l with interval rank m: I_m shrunk
/// symmetrically by 1/max(l, 1).
std::pair<double, double> certification_interval(std::size_t level, int m);

/// The exact grids find_gap certifies on: Chebyshev-spaced base points of the
/// certification interval and the offset lattice on [-l, l]^2. Exposed so
/// certificates can be replayed on identical data.
struct CertificationGrid {
    std::vector<double> xs;
    std::vector<double> offsets;
    std::vector<std::pair<double, double>> pairs;
};
CertificationGrid make_certification_grid(std::size_t level, int m, const SparsifierConfig& cfg);

/// Smallest probed threshold N >= floor * N_l whose certificate passes; probes
/// are N * probe_multipliers and candidates advance by doubling.
GapCertificate find_gap(std::size_t level, const SparseSpec& placed, MSequence& mseq,
                        const SparsifierConfig& cfg);

struct SparsifyResult {
    SparseSpec spec;
    std::vector<GapCertificate> certificates;
};

/// generate_spec hit the cap at some level; carries everything placed so far.
class SparsifyCapExceededError : public std::runtime_error {
public:
    SparsifyCapExceededError(std::string what, SparsifyResult partial_result, GapCertificate best)
        : std::runtime_error(std::move(what)), partial(std::move(partial_result)),
          best_attempt(std::move(best)) {}
    SparsifyResult partial;
    GapCertificate best_attempt;
};

/// Places `levels` sites inductively: N_{l+1} = N_hat(l) from find_gap.
SparsifyResult generate_spec(const VRule& rule, std::size_t levels, const SparsifierConfig& cfg);

enum class MeasureClass { singular, absolutely_continuous, inconclusive };

/// Square-summability dichotomy for sparse decaying perturbations: divergent
/// sum of v_j^2 gives a purely singular continuous measure on (-2, 2),
/// convergent sum an absolutely continuous one. Decided symbolically for
/// closed-form rules, through envelope tail bounds otherwise.
MeasureClass classify_measure(const SparseSpec& spec);

const char* to_string(MeasureClass c);

} // namespace cdbulk
