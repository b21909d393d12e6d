#include "cdbulk/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "cdbulk/cd_kernel.hpp"
#include "cdbulk/chebyshev.hpp"
#include "cdbulk/parallel.hpp"
#include "cdbulk/tridiag.hpp"

namespace cdbulk {

const char* const kRowHeader = "n,x,a,b,ratio_re,ratio_im,target,abs_err,level";

void ExperimentConfig::validate() const {
    if (x_list.empty()) throw std::invalid_argument("ExperimentConfig: empty x list");
    for (double x : x_list) {
        if (!(std::abs(x) < 2.0)) throw std::invalid_argument("ExperimentConfig: x outside bulk");
    }
    if (n_list.empty()) throw std::invalid_argument("ExperimentConfig: empty n list");
    for (std::size_t i = 0; i < n_list.size(); ++i) {
        if (n_list[i] < 2) throw std::invalid_argument("ExperimentConfig: orders must be >= 2");
        if (i > 0 && n_list[i] <= n_list[i - 1]) {
            throw std::invalid_argument("ExperimentConfig: n list must be strictly increasing");
        }
    }
    if (ab_grid.empty()) throw std::invalid_argument("ExperimentConfig: empty (a,b) grid");
}

namespace {

bool query_in_range(double x, double a, double b, std::int64_t n) {
    const double reach = std::max(std::abs(a), std::abs(b)) / double(n);
    return x - reach > -2.0 && x + reach < 2.0;
}

} // namespace

std::vector<ResultRow> run_universality_sweep(const ExperimentConfig& cfg) {
    cfg.validate();
    std::vector<double> xs = cfg.x_list;
    std::sort(xs.begin(), xs.end());
    std::vector<std::int64_t> ns = cfg.n_list;
    std::vector<std::pair<double, double>> pairs = cfg.ab_grid;
    std::sort(pairs.begin(), pairs.end());

    const JacobiParams params{cfg.spec, cfg.level};
    const std::size_t per_task = pairs.size();
    const std::size_t task_count = xs.size() * ns.size();
    std::vector<ResultRow> rows(task_count * per_task);

    parallel_for(task_count, cfg.threads, [&](std::size_t task) {
        const double x = xs[task / ns.size()];
        const std::int64_t n = ns[task % ns.size()];
        const std::size_t level_at_n = params.sites_up_to(n);
        ResultRow* out = rows.data() + task * per_task;

        std::vector<std::pair<double, double>> valid;
        std::vector<std::size_t> valid_idx;
        valid.reserve(per_task);
        for (std::size_t i = 0; i < per_task; ++i) {
            const auto& [a, b] = pairs[i];
            ResultRow row;
            row.n = n;
            row.x = x;
            row.a = a;
            row.b = b;
            row.level = level_at_n;
            if (query_in_range(x, a, b, n)) {
                valid.push_back(pairs[i]);
                valid_idx.push_back(i);
            } else {
                const double nan = std::numeric_limits<double>::quiet_NaN();
                row.valid = false;
                row.ratio = {nan, nan};
                row.target = nan;
                row.abs_err = nan;
            }
            out[i] = row;
        }
        if (valid.empty()) return;
        const GridKernelResult kernels = cd_kernel_grid(x, n, valid, params, cfg.precision);
        for (std::size_t k = 0; k < valid.size(); ++k) {
            ResultRow& row = out[valid_idx[k]];
            row.ratio = cplx(kernels.K[k] / kernels.K_diag, 0.0);
            row.target = sine_target(x, row.a, row.b);
            row.abs_err = std::abs(row.ratio - cplx(row.target, 0.0));
        }
    });
    return rows;
}

ConvergenceTable run_convergence_table(const ExperimentConfig& cfg) {
    const std::vector<ResultRow> rows = run_universality_sweep(cfg);
    ConvergenceTable table;
    std::vector<std::int64_t> ns = cfg.n_list;
    for (std::int64_t n : ns) {
        double sup = 0.0;
        for (const auto& row : rows) {
            if (row.n == n && row.valid) sup = std::max(sup, row.abs_err);
        }
        table.rows.emplace_back(n, sup);
    }
    for (double eps : cfg.epsilons) {
        std::optional<std::int64_t> least;
        for (const auto& [n, err] : table.rows) {
            if (err <= eps) {
                least = n;
                break;
            }
        }
        table.thresholds.emplace_back(eps, least);
    }
    return table;
}

double strip_spot_check(const ExperimentConfig& cfg) {
    cfg.validate();
    const JacobiParams params{cfg.spec, cfg.level};
    double worst = 0.0;
    for (double x : cfg.x_list) {
        for (std::int64_t n : cfg.n_list) {
            for (double t : {0.5, 1.0}) {
                KernelQuery q{x, cplx(0.0, t), cplx(0.0), n, std::nullopt, true,
                              Precision::standard};
                const KernelValue kv = kernel_ratio(q, params);
                worst = std::max(worst, std::abs(kv.ratio - sine_target(x, cplx(0.0, t), cplx(0.0))));
            }
        }
    }
    return worst;
}

QuadratureRule quadrature_approx(std::int64_t n, const JacobiParams& params) {
    if (n < 1 || n > 5000) throw std::invalid_argument("quadrature_approx: need 1 <= n <= 5000");
    std::vector<double> diag(static_cast<std::size_t>(n), 0.0);
    for (std::int64_t i = 0; i < n; ++i) diag[std::size_t(i)] = params.b_at(i + 1);
    std::vector<double> sub(static_cast<std::size_t>(n - 1), 1.0);
    TridiagEigen eig = tridiag_eigen_first_components(std::move(diag), std::move(sub));
    QuadratureRule rule;
    rule.nodes = std::move(eig.values);
    rule.weights.reserve(std::size_t(n));
    for (double c : eig.first_components) rule.weights.push_back(c * c);
    return rule;
}

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

void emit_rows(const std::vector<ResultRow>& rows, std::ostream& os) {
    os << kRowHeader << '\n';
    for (const auto& r : rows) {
        os << r.n << ',' << fmt17(r.x) << ',' << fmt17(r.a) << ',' << fmt17(r.b) << ','
           << fmt17(r.ratio.real()) << ',' << fmt17(r.ratio.imag()) << ',' << fmt17(r.target)
           << ',' << fmt17(r.abs_err) << ',' << r.level << '\n';
    }
}

void emit_table(const ConvergenceTable& table, std::ostream& os) {
    os << "n,max_abs_err\n";
    for (const auto& [n, err] : table.rows) os << n << ',' << fmt17(err) << '\n';
    for (const auto& [eps, least] : table.thresholds) {
        os << "# N(eps=" << fmt17(eps) << ") = ";
        if (least) os << *least;
        else os << "unreached";
        os << '\n';
    }
}

void emit_quadrature(const QuadratureRule& rule, std::ostream& os) {
    os << "node,weight\n";
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        os << fmt17(rule.nodes[i]) << ',' << fmt17(rule.weights[i]) << '\n';
    }
}

void emit_convergence_plot_svg(const ConvergenceTable& table, std::ostream& os) {
    const int width = 640, height = 480, margin = 56;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
       << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<line x1=\"" << margin << "\" y1=\"" << height - margin << "\" x2=\"" << width - margin
       << "\" y2=\"" << height - margin << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\"" << margin << "\" y2=\""
       << height - margin << "\" stroke=\"black\"/>\n";

    double lx0 = 0, lx1 = 1, ly0 = 0, ly1 = 1;
    bool first = true;
    for (const auto& [n, err] : table.rows) {
        if (n <= 0 || err <= 0) continue;
        const double lx = std::log10(double(n)), ly = std::log10(err);
        if (first) {
            lx0 = lx1 = lx;
            ly0 = ly1 = ly;
            first = false;
        } else {
            lx0 = std::min(lx0, lx);
            lx1 = std::max(lx1, lx);
            ly0 = std::min(ly0, ly);
            ly1 = std::max(ly1, ly);
        }
    }
    if (lx1 == lx0) lx1 = lx0 + 1;
    if (ly1 == ly0) ly1 = ly0 + 1;

    os << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" points=\"";
    char buf[64];
    for (const auto& [n, err] : table.rows) {
        if (n <= 0 || err <= 0) continue;
        const double px =
            margin + (std::log10(double(n)) - lx0) / (lx1 - lx0) * (width - 2 * margin);
        const double py =
            height - margin - (std::log10(err) - ly0) / (ly1 - ly0) * (height - 2 * margin);
        std::snprintf(buf, sizeof(buf), "%.2f,%.2f ", px, py);
        os << buf;
    }
    os << "\"/>\n";
    os << "<text x=\"" << width / 2 << "\" y=\"" << height - margin / 4
       << "\" text-anchor=\"middle\" font-size=\"14\">log10 n</text>\n";
    os << "<text x=\"" << margin / 4 << "\" y=\"" << height / 2
       << "\" text-anchor=\"middle\" font-size=\"14\" transform=\"rotate(-90 " << margin / 4 << ' '
       << height / 2 << ")\">log10 max error</text>\n";
    os << "</svg>\n";
}

namespace {

template <class Fn>
void save_to(const std::string& path, Fn&& writer) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    writer(os);
    os.flush();
    if (!os) throw std::runtime_error("write failed: " + path);
}

} // namespace

void save_rows(const std::vector<ResultRow>& rows, const std::string& path) {
    save_to(path, [&](std::ostream& os) { emit_rows(rows, os); });
}
void save_table(const ConvergenceTable& table, const std::string& path) {
    save_to(path, [&](std::ostream& os) { emit_table(table, os); });
}
void save_quadrature(const QuadratureRule& rule, const std::string& path) {
    save_to(path, [&](std::ostream& os) { emit_quadrature(rule, os); });
}
void save_convergence_plot_svg(const ConvergenceTable& table, const std::string& path) {
    save_to(path, [&](std::ostream& os) { emit_convergence_plot_svg(table, os); });
}

ResultRow parse_row(std::string_view line) {
    ResultRow row;
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (start <= line.size()) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.emplace_back(line.substr(start));
            break;
        }
        fields.emplace_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    if (fields.size() != 9) throw std::invalid_argument("parse_row: expected 9 fields");
    row.n = std::stoll(fields[0]);
    row.x = std::strtod(fields[1].c_str(), nullptr);
    row.a = std::strtod(fields[2].c_str(), nullptr);
    row.b = std::strtod(fields[3].c_str(), nullptr);
    row.ratio = {std::strtod(fields[4].c_str(), nullptr), std::strtod(fields[5].c_str(), nullptr)};
    row.target = std::strtod(fields[6].c_str(), nullptr);
    row.abs_err = std::strtod(fields[7].c_str(), nullptr);
    row.level = std::size_t(std::stoull(fields[8]));
    row.valid = !std::isnan(row.abs_err);
    return row;
}

} // namespace cdbulk
