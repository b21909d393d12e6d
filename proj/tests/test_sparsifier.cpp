#include <doctest.h>

#include <atomic>
#include <cmath>
#include <limits>

#include "cdbulk/cd_kernel.hpp"
#include "cdbulk/serialize.hpp"
#include "cdbulk/sparsifier.hpp"

using namespace cdbulk;

TEST_CASE("m-sequence breakpoints for a geometric envelope") {
    // envelope 2^-n: the rank-1 breakpoint is the first n with 2^-n < 1/M_1^4,
    // M_1 = 4/sqrt(3), i.e. n = 5.
    const SparseSpec spec = SparseSpec::from_rule(VRule::geometric(1.0, 0.5), {});
    MSequence ms = build_m_sequence(spec);
    CHECK(ms.breakpoints().front() == std::pair<int, std::int64_t>{1, 5});
    CHECK(ms.m_at(1) == 1);
    CHECK(ms.m_at(10) >= 1);
    int prev = 0;
    for (std::int64_t k = 1; k <= 40; ++k) {
        const int m = ms.m_at(k);
        CHECK(m >= prev);
        prev = m;
    }
}

TEST_CASE("m-sequence rejects non-decaying envelopes") {
    const SparseSpec constant =
        SparseSpec::from_rule(VRule::zero(), {}, EnvelopeRule::constant(0.5));
    CHECK_THROWS_WITH_AS(build_m_sequence(constant), "envelope does not decay",
                         std::runtime_error);
}

TEST_CASE("m-sequence staircase for a power envelope up to 1e6") {
    const SparseSpec spec = SparseSpec::from_rule(VRule::power_law(1.0, 0.5), {});
    MSequence ms = build_m_sequence(spec, 10'000'000);
    int prev = 1;
    for (std::int64_t k = 1; k <= 1'000'000; k += 997) {
        const int m = ms.m_at(k);
        REQUIRE(m >= prev);
        prev = m;
    }
    // breakpoint product decays strictly along the staircase
    double prev_product = std::numeric_limits<double>::infinity();
    for (const auto& [r, first] : ms.breakpoints()) {
        const double M = m_bound(r, StripCertification::skip).M;
        const double product = spec.envelope_at(first) * double(r) * double(r) * M * M * M * M;
        CHECK(product < prev_product);
        prev_product = product;
    }
}

TEST_CASE("certification interval shrinks into I_m") {
    const auto [lo0, hi0] = certification_interval(0, 1);
    CHECK(lo0 == hi0); // degenerate at level 0, m = 1
    const auto [lo2, hi2] = certification_interval(2, 1);
    CHECK(lo2 == doctest::Approx(-0.5));
    CHECK(hi2 == doctest::Approx(0.5));
    const auto ib = m_bound(1, StripCertification::skip);
    CHECK(lo2 > ib.lo);
    CHECK(hi2 < ib.hi);
}

TEST_CASE("find_gap certifies the free operator") {
    SparsifierConfig cfg;
    MSequence ms = build_m_sequence(SparseSpec::from_rule(VRule::power_law(1.0, 0.5), {}));
    const GapCertificate cert = find_gap(0, SparseSpec::free_case(), ms, cfg);
    CHECK(cert.level == 0);
    CHECK(cert.N_hat >= 4);
    CHECK(cert.max_kernel_error <= cfg.tolerance_slack);
    CHECK(cert.max_ratio_error <= cfg.tolerance_slack);
    CHECK(cert.ratio_A_max <= 2.0);
    CHECK(cert.probes.size() == cfg.probe_multipliers.size());
    // probe errors decrease as n grows
    for (std::size_t i = 1; i < cert.probes.size(); ++i) {
        CHECK(cert.probes[i].second < cert.probes[i - 1].second);
    }
}

TEST_CASE("find_gap respects the ratio floor above a placed prefix") {
    SparsifierConfig cfg;
    const SparseSpec prefix = SparseSpec::explicit_list({0.5}, {50});
    MSequence ms = build_m_sequence(prefix);
    const GapCertificate cert = find_gap(1, prefix, ms, cfg);
    CHECK(cert.N_hat >= std::int64_t(cfg.ratio_floor * 50));
    CHECK(cert.max_kernel_error <= cfg.tolerance_slack / 1.0);
    CHECK(cert.ratio_A_max <= 2.0);
    // frozen regression baseline for the default config
    CHECK(cert.N_hat == 200);
}

TEST_CASE("find_gap validates the prefix/level pairing") {
    SparsifierConfig cfg;
    MSequence ms = build_m_sequence(SparseSpec::from_rule(VRule::power_law(1.0, 0.5), {}));
    CHECK_THROWS_AS(find_gap(1, SparseSpec::free_case(), ms, cfg), std::invalid_argument);
}

TEST_CASE("unreachable tolerance exhausts the cap") {
    SparsifierConfig cfg;
    cfg.tolerance_slack = 1e-9;
    cfg.n_cap = 4096;
    MSequence ms = build_m_sequence(SparseSpec::from_rule(VRule::power_law(1.0, 0.5), {}));
    try {
        find_gap(0, SparseSpec::free_case(), ms, cfg);
        FAIL("expected CapExceededError");
    } catch (const CapExceededError& e) {
        CHECK(e.best_attempt.probes.size() == cfg.probe_multipliers.size());
        CHECK(e.best_attempt.max_kernel_error > cfg.tolerance_slack);
    }
}

TEST_CASE("generate_spec end to end") {
    SparsifierConfig cfg;
    const SparsifyResult result = generate_spec(VRule::power_law(1.0, 0.5), 3, cfg);
    REQUIRE(result.spec.site_count() == 3);
    REQUIRE(result.certificates.size() == 3);
    for (std::size_t l = 0; l < 3; ++l) {
        const auto& cert = result.certificates[l];
        const double lp = double(std::max<std::size_t>(l, 1));
        CHECK(cert.max_kernel_error <= cfg.tolerance_slack / lp);
        CHECK(cert.ratio_A_max <= 2.0);
        CHECK(result.spec.site(l) == cert.N_hat);
    }
    for (std::size_t l = 1; l < 3; ++l) {
        CHECK(double(result.spec.site(l)) / double(result.spec.site(l - 1)) >= cfg.ratio_floor);
    }
    // frozen regression baseline for the default config
    CHECK(result.spec.site(0) == 4);
    CHECK(result.spec.site(1) == 16);
    CHECK(result.spec.site(2) == 128);

    // determinism: a second run serializes to the same bytes
    const SparsifyResult again = generate_spec(VRule::power_law(1.0, 0.5), 3, cfg);
    CHECK(spec_to_json(result.spec, result.certificates) ==
          spec_to_json(again.spec, again.certificates));

    // threads must not change anything
    SparsifierConfig threaded = cfg;
    threaded.threads = 4;
    const SparsifyResult parallel = generate_spec(VRule::power_law(1.0, 0.5), 3, threaded);
    CHECK(spec_to_json(result.spec, result.certificates) ==
          spec_to_json(parallel.spec, parallel.certificates));
}

TEST_CASE("generate_spec with the zero rule certifies immediately") {
    SparsifierConfig cfg;
    // A zero rule paired with a decaying envelope so the m-sequence exists.
    const SparsifyResult result = generate_spec(VRule::power_law(0.0, 0.5), 2, cfg);
    CHECK(result.spec.site_count() == 2);
    CHECK(result.spec.site(0) == 4); // first candidate passes
    CHECK(result.certificates[0].max_kernel_error <= cfg.tolerance_slack);
}

TEST_CASE("generate_spec with zero levels is empty") {
    SparsifierConfig cfg;
    const SparsifyResult result = generate_spec(VRule::power_law(1.0, 0.5), 0, cfg);
    CHECK(result.spec.site_count() == 0);
    CHECK(result.certificates.empty());
}

TEST_CASE("generate_spec surfaces partial output when the cap is hit") {
    SparsifierConfig cfg;
    cfg.tolerance_slack = 1e-9; // unreachable even for the first placement
    cfg.n_cap = 2048;
    try {
        generate_spec(VRule::power_law(1.0, 0.5), 3, cfg);
        FAIL("expected SparsifyCapExceededError");
    } catch (const SparsifyCapExceededError& e) {
        CHECK(e.partial.spec.site_count() == 0);
        CHECK(e.partial.certificates.empty());
        CHECK(e.best_attempt.probes.size() == cfg.probe_multipliers.size());
    }
}

TEST_CASE("certificate replay reproduces the recorded error") {
    SparsifierConfig cfg;
    const SparsifyResult result = generate_spec(VRule::power_law(1.0, 0.5), 2, cfg);
    // re-run find_gap for level 1 on the level-1 prefix: byte-identical cert
    SparseSpec prefix = SparseSpec::from_rule(VRule::power_law(1.0, 0.5), {result.spec.site(0)});
    MSequence ms = build_m_sequence(prefix);
    const GapCertificate replay = find_gap(1, prefix, ms, cfg);
    CHECK(replay.N_hat == result.certificates[1].N_hat);
    CHECK(replay.max_kernel_error == result.certificates[1].max_kernel_error);
    CHECK(replay.ratio_A_max == result.certificates[1].ratio_A_max);
}

TEST_CASE("classification by square summability") {
    CHECK(classify_measure(SparseSpec::from_rule(VRule::power_law(1.0, 0.5), {})) ==
          MeasureClass::singular);
    CHECK(classify_measure(SparseSpec::from_rule(VRule::power_law(1.0, 1.0), {})) ==
          MeasureClass::absolutely_continuous);
    CHECK(classify_measure(SparseSpec::from_rule(VRule::geometric(1.0, 0.5), {})) ==
          MeasureClass::absolutely_continuous);
    CHECK(classify_measure(SparseSpec::free_case()) == MeasureClass::absolutely_continuous);
    CHECK(classify_measure(SparseSpec::explicit_list({0.5, 0.3}, {4, 60})) ==
          MeasureClass::absolutely_continuous);
    // explicit data with a persistent envelope: the tail is unknown
    const SparseSpec open_tail = SparseSpec::from_rule(VRule::explicit_list({0.5, 0.3}), {4, 60},
                                                       EnvelopeRule::power_law(1.0, 0.4));
    CHECK(classify_measure(open_tail) == MeasureClass::inconclusive);
    const SparseSpec closed_tail = SparseSpec::from_rule(VRule::explicit_list({0.5, 0.3}), {4, 60},
                                                         EnvelopeRule::power_law(1.0, 0.8));
    CHECK(classify_measure(closed_tail) == MeasureClass::absolutely_continuous);
    CHECK(std::string(to_string(MeasureClass::singular)) == "singular");
}

TEST_CASE("sparsifier config validation") {
    SparsifierConfig cfg;
    cfg.tolerance_slack = 1.5;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = SparsifierConfig{};
    cfg.probe_multipliers = {2, 4};
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = SparsifierConfig{};
    cfg.ratio_floor = 1.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = SparsifierConfig{};
    CHECK(cfg.ratio_floor_at(0) == cfg.ratio_floor);
    CHECK(cfg.ratio_floor_at(3) == 3.0 * cfg.ratio_floor);
}

TEST_CASE("kappa bound observer fires during certification") {
    SparsifierConfig cfg;
    std::atomic<int> observed{0};
    cfg.state_observer = [&](const VarCoeffs&) { ++observed; };
    MSequence ms = build_m_sequence(SparseSpec::from_rule(VRule::power_law(1.0, 0.5), {}));
    find_gap(0, SparseSpec::free_case(), ms, cfg);
    CHECK(observed.load() > 0);
}
