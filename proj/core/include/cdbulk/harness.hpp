#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cdbulk/jacobi.hpp"

namespace cdbulk {

/// One sweep: for each (x, n) evaluate the renormalized kernel on the (a, b)
/// grid and compare with the sine target. Rows come out sorted by (x, n, a, b)
/// and are byte-identical across thread counts.
struct ExperimentConfig {
    SparseSpec spec{};
    std::optional<std::size_t> level{};
    std::vector<double> x_list{0.0};
    std::vector<std::pair<double, double>> ab_grid{{0.0, 0.0}};
    std::vector<std::int64_t> n_list{1000};
    std::vector<double> epsilons{};
    Precision precision = Precision::standard;
    bool strip_checks = false;
    unsigned threads = 1;
    std::string out_rows{};
    std::string out_table{};
    std::string out_plot{};

    void validate() const;
};

struct ResultRow {
    std::int64_t n = 0;
    double x = 0, a = 0, b = 0;
    cplx ratio{};
    double target = 0;
    double abs_err = 0;
    std::size_t level = 0; // number of active sites at this n
    bool valid = true;     // invalid queries keep their slot with NaN payload
};

std::vector<ResultRow> run_universality_sweep(const ExperimentConfig& cfg);

struct ConvergenceTable {
    std::vector<std::pair<std::int64_t, double>> rows; // (n, sup of abs_err over the grid)
    std::vector<std::pair<double, std::optional<std::int64_t>>> thresholds; // per epsilon
};

ConvergenceTable run_convergence_table(const ExperimentConfig& cfg);

/// Analytic-continuation spot check: deviation of the kernel ratio from the
/// complex sine target at offsets (it, 0) for t in {1/2, 1}. Returns the max
/// over the given (x, n) combinations.
double strip_spot_check(const ExperimentConfig& cfg);

/// Gauss quadrature of the truncated operator: nodes are eigenvalues of the
/// n x n Jacobi matrix, weights the squared first eigenvector components.
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

QuadratureRule quadrature_approx(std::int64_t n, const JacobiParams& params);

/// Delimiter-separated emission, 17 significant digits. The row header is
/// fixed: n,x,a,b,ratio_re,ratio_im,target,abs_err,level
void emit_rows(const std::vector<ResultRow>& rows, std::ostream& os);
void emit_table(const ConvergenceTable& table, std::ostream& os);
void emit_quadrature(const QuadratureRule& rule, std::ostream& os);
/// Standalone SVG line plot of (n, max-error) on log-log axes.
void emit_convergence_plot_svg(const ConvergenceTable& table, std::ostream& os);

void save_rows(const std::vector<ResultRow>& rows, const std::string& path);
void save_table(const ConvergenceTable& table, const std::string& path);
void save_quadrature(const QuadratureRule& rule, const std::string& path);
void save_convergence_plot_svg(const ConvergenceTable& table, const std::string& path);

/// Parses one emitted row (17-digit round trip is bit-exact).
ResultRow parse_row(std::string_view line);

extern const char* const kRowHeader;

} // namespace cdbulk
