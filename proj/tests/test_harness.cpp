#include <doctest.h>

#include <atomic>
#include <cmath>
#include <sstream>

#include <Eigen/Dense>

#include "cdbulk/harness.hpp"
#include "cdbulk/parallel.hpp"
#include "cdbulk/serialize.hpp"

using namespace cdbulk;

namespace {

ExperimentConfig free_config() {
    ExperimentConfig cfg;
    cfg.spec = SparseSpec::free_case();
    cfg.x_list = {0.0};
    cfg.ab_grid = {{0.0, 0.0}, {0.0, 1.0}, {-1.0, 1.0}};
    cfg.n_list = {100, 1000};
    return cfg;
}

} // namespace

TEST_CASE("sweep basics and ordering") {
    ExperimentConfig cfg = free_config();
    cfg.x_list = {0.5, -0.5};
    const auto rows = run_universality_sweep(cfg);
    REQUIRE(rows.size() == 2 * 2 * 3);
    // sorted by (x, n, a, b)
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto key = [](const ResultRow& r) {
            return std::tuple(r.x, r.n, r.a, r.b);
        };
        CHECK(key(rows[i - 1]) <= key(rows[i]));
    }
    for (const auto& r : rows) {
        CHECK(r.valid);
        CHECK(r.abs_err == std::abs(r.ratio - cplx(r.target, 0.0)));
        CHECK(r.level == 0);
    }
}

TEST_CASE("single trivial row") {
    ExperimentConfig cfg = free_config();
    cfg.ab_grid = {{0.0, 0.0}};
    cfg.n_list = {1000};
    const auto rows = run_universality_sweep(cfg);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].ratio == cplx(1.0));
    CHECK(rows[0].abs_err == 0.0);
}

TEST_CASE("free-case errors shrink along the n list") {
    ExperimentConfig cfg = free_config();
    cfg.n_list = {1000, 10'000, 100'000};
    cfg.ab_grid = {{0.0, 1.0}};
    const auto rows = run_universality_sweep(cfg);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].abs_err > rows[1].abs_err);
    CHECK(rows[1].abs_err > rows[2].abs_err);
}

TEST_CASE("invalid queries are marked, the sweep continues") {
    ExperimentConfig cfg = free_config();
    cfg.x_list = {1.9};
    cfg.n_list = {10};                     // 1.9 + 2/10 > 2: out of the bulk
    cfg.ab_grid = {{0.0, 0.0}, {0.0, 2.0}};
    const auto rows = run_universality_sweep(cfg);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].valid);
    CHECK(!rows[1].valid);
    CHECK(std::isnan(rows[1].abs_err));
}

TEST_CASE("sweep is deterministic across thread counts") {
    ExperimentConfig cfg = free_config();
    cfg.spec = SparseSpec::explicit_list({0.5, -0.2}, {6, 48});
    cfg.x_list = {-1.0, 0.0, 0.5, 1.0};
    cfg.n_list = {100, 1000, 5000};
    cfg.threads = 1;
    std::ostringstream one;
    emit_rows(run_universality_sweep(cfg), one);
    cfg.threads = 4;
    std::ostringstream four;
    emit_rows(run_universality_sweep(cfg), four);
    CHECK(one.str() == four.str());
}

TEST_CASE("level column counts active sites") {
    ExperimentConfig cfg = free_config();
    cfg.spec = SparseSpec::explicit_list({0.5, -0.2}, {6, 480});
    cfg.n_list = {100, 1000};
    cfg.ab_grid = {{0.0, 0.0}};
    const auto rows = run_universality_sweep(cfg);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].level == 1);
    CHECK(rows[1].level == 2);
}

TEST_CASE("convergence table and thresholds") {
    ExperimentConfig cfg = free_config();
    cfg.n_list = {100, 1000, 10'000};
    cfg.epsilons = {0.5, 1e-3, 1e-12};
    const ConvergenceTable table = run_convergence_table(cfg);
    REQUIRE(table.rows.size() == 3);
    CHECK(table.rows[0].second > table.rows[2].second);
    REQUIRE(table.thresholds.size() == 3);
    CHECK(table.thresholds[0].second == 100); // already met at the smallest n
    CHECK(table.thresholds[1].second == 1000); // error scales like 1/n from ~2e-3 at n=100
    CHECK(!table.thresholds[2].second.has_value());

    ExperimentConfig no_eps = cfg;
    no_eps.epsilons = {};
    CHECK(run_convergence_table(no_eps).thresholds.empty());
}

TEST_CASE("free-case convergence fixture on the I_4 grid") {
    ExperimentConfig cfg;
    cfg.spec = SparseSpec::free_case();
    cfg.x_list = {-1.75, -0.875, 0.0, 0.875, 1.75};
    cfg.ab_grid.clear();
    for (int i = 0; i < 5; ++i) {
        for (int j = 0; j < 5; ++j) {
            cfg.ab_grid.emplace_back(-2.0 + i, -2.0 + j);
        }
    }
    cfg.n_list = {1000, 10'000, 100'000};
    cfg.epsilons = {0.02};
    const ConvergenceTable table = run_convergence_table(cfg);
    REQUIRE(table.thresholds.size() == 1);
    REQUIRE(table.thresholds[0].second.has_value());
    CHECK(*table.thresholds[0].second <= 100'000);
    CHECK(*table.thresholds[0].second == 1000); // frozen reference run
}

TEST_CASE("config validation") {
    ExperimentConfig cfg = free_config();
    cfg.x_list = {2.5};
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = free_config();
    cfg.n_list = {100, 100};
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = free_config();
    cfg.n_list = {1};
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("quadrature small free cases") {
    const JacobiParams free{SparseSpec::free_case(), std::nullopt};
    const QuadratureRule r1 = quadrature_approx(1, free);
    REQUIRE(r1.nodes.size() == 1);
    CHECK(r1.nodes[0] == 0.0);
    CHECK(r1.weights[0] == doctest::Approx(1.0).epsilon(1e-14));

    const QuadratureRule r2 = quadrature_approx(2, free);
    CHECK(r2.nodes[0] == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(r2.nodes[1] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(r2.weights[0] == doctest::Approx(0.5).epsilon(1e-13));
    CHECK(r2.weights[1] == doctest::Approx(0.5).epsilon(1e-13));

    CHECK_THROWS_AS(quadrature_approx(0, free), std::invalid_argument);
    CHECK_THROWS_AS(quadrature_approx(5001, free), std::invalid_argument);
}

TEST_CASE("quadrature against a dense eigensolver oracle") {
    const JacobiParams params{SparseSpec::explicit_list({0.7, -0.4}, {3, 17}), std::nullopt};
    const std::int64_t n = 40;
    const QuadratureRule rule = quadrature_approx(n, params);

    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (std::int64_t i = 0; i < n; ++i) {
        J(i, i) = params.b_at(i + 1);
        if (i + 1 < n) {
            J(i, i + 1) = 1.0;
            J(i + 1, i) = 1.0;
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(J);
    REQUIRE(solver.info() == Eigen::Success);
    for (std::int64_t i = 0; i < n; ++i) {
        CHECK(rule.nodes[std::size_t(i)] == doctest::Approx(solver.eigenvalues()(i)).epsilon(1e-10));
        const double first = solver.eigenvectors().col(i)(0);
        CHECK(rule.weights[std::size_t(i)] == doctest::Approx(first * first).epsilon(1e-8));
    }
}

TEST_CASE("quadrature moments and weight normalization") {
    const JacobiParams params{SparseSpec::explicit_list({0.5}, {2}), std::nullopt};
    for (std::int64_t n : {5, 60, 301}) {
        const QuadratureRule rule = quadrature_approx(n, params);
        double total = 0.0, m1 = 0.0, m2 = 0.0;
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
            CHECK(rule.weights[i] >= 0.0);
            CHECK(std::abs(rule.nodes[i]) <= 2.0 + 0.5 + 1e-12);
            total += rule.weights[i];
            m1 += rule.weights[i] * rule.nodes[i];
            m2 += rule.weights[i] * rule.nodes[i] * rule.nodes[i];
        }
        CHECK(std::abs(total - 1.0) <= 1e-12);
        CHECK(std::abs(m1 - params.b_at(1)) <= 1e-10);                          // = b_1
        CHECK(std::abs(m2 - (1.0 + params.b_at(1) * params.b_at(1))) <= 1e-10); // = a_1^2 + b_1^2
    }
}

TEST_CASE("row emission round trip") {
    ResultRow row;
    row.n = 12345;
    row.x = 0.1234567890123456789;
    row.a = -1.75;
    row.b = std::sqrt(2.0);
    row.ratio = {0.95885107720840601, -3.2e-17};
    row.target = 0.95885107720840601;
    row.abs_err = std::abs(row.ratio - cplx(row.target, 0.0));
    row.level = 2;
    std::ostringstream os;
    emit_rows({row}, os);
    std::istringstream is(os.str());
    std::string header, line;
    std::getline(is, header);
    CHECK(header == std::string(kRowHeader));
    std::getline(is, line);
    const ResultRow back = parse_row(line);
    CHECK(back.n == row.n);
    CHECK(back.x == row.x);
    CHECK(back.a == row.a);
    CHECK(back.b == row.b);
    CHECK(back.ratio == row.ratio);
    CHECK(back.target == row.target);
    CHECK(back.abs_err == row.abs_err);
    CHECK(back.level == row.level);
}

TEST_CASE("empty rows emit a header-only file") {
    std::ostringstream os;
    emit_rows({}, os);
    CHECK(os.str() == std::string(kRowHeader) + "\n");
}

TEST_CASE("table emission produces one line per order") {
    ExperimentConfig cfg = free_config();
    const ConvergenceTable table = run_convergence_table(cfg);
    std::ostringstream os;
    emit_table(table, os);
    std::istringstream is(os.str());
    std::string line;
    std::size_t lines = 0;
    while (std::getline(is, line)) ++lines;
    CHECK(lines == 1 + cfg.n_list.size());
}

TEST_CASE("svg plot emission is well formed") {
    ConvergenceTable table;
    table.rows = {{100, 1e-2}, {1000, 1e-3}, {10000, 1e-4}};
    std::ostringstream os;
    emit_convergence_plot_svg(table, os);
    const std::string svg = os.str();
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("<polyline") != std::string::npos);
    CHECK(svg.find("</svg>") != std::string::npos);
}

TEST_CASE("strip spot check stays small for the free case") {
    ExperimentConfig cfg = free_config();
    cfg.n_list = {2000};
    CHECK(strip_spot_check(cfg) <= 5e-2);
}

TEST_CASE("parallel_for rethrows worker exceptions") {
    std::atomic<int> done{0};
    CHECK_THROWS_AS(parallel_for(16, 4,
                                 [&](std::size_t i) {
                                     if (i == 7) throw std::runtime_error("boom");
                                     ++done;
                                 }),
                    std::runtime_error);
    CHECK(done.load() >= 1); // other tasks still ran
}

TEST_CASE("experiment config document parsing") {
    const std::string doc = R"({
      "spec": {"v_rule": {"kind": "explicit", "values": [0.5]}, "N": [7],
               "envelope_rule": {"kind": "auto"}},
      "grids": {"x": [0.0, 0.5], "ab": {"count": 3, "span": 1.0}, "n_list": [100, 200]},
      "epsilons": [0.1],
      "modes": {"compensated": false, "strip_checks": false, "threads": 2},
      "outputs": {"rows": "", "table": "", "plot": ""}
    })";
    const ExperimentConfig cfg = config_from_json(doc);
    CHECK(cfg.spec.site_count() == 1);
    CHECK(cfg.x_list.size() == 2);
    CHECK(cfg.ab_grid.size() == 9);
    CHECK(cfg.n_list.size() == 2);
    CHECK(cfg.threads == 2);
    cfg.validate();
}
