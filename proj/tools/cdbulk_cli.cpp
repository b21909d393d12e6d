// Command line driver: universality sweeps, convergence tables, adaptive
// sparsification, measure classification and quadrature of sparse Jacobi
// operators.

#include <cstdint>
#include <cstdio>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cdbulk/cd_kernel.hpp"
#include "cdbulk/harness.hpp"
#include "cdbulk/serialize.hpp"
#include "cdbulk/sparsifier.hpp"

namespace {

using namespace cdbulk;

struct SpecSource {
    std::string spec_path;
    std::string rule_text;
    bool free_flag = false;
};

// "power:AMP:EXP", "geometric:AMP:RATIO", "zero",
// "explicit:v1,v2,...@N1,N2,..."
std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        const std::size_t p = s.find(sep, start);
        if (p == std::string::npos) {
            out.push_back(s.substr(start));
            break;
        }
        out.push_back(s.substr(start, p - start));
        start = p + 1;
    }
    return out;
}

VRule parse_rule(const std::string& text) {
    const auto parts = split(text, ':');
    if (parts.empty()) throw CLI::ValidationError("--rule", "empty rule");
    if (parts[0] == "zero") return VRule::zero();
    if (parts[0] == "power") {
        if (parts.size() != 3) throw CLI::ValidationError("--rule", "power:AMP:EXP");
        return VRule::power_law(std::stod(parts[1]), std::stod(parts[2]));
    }
    if (parts[0] == "geometric") {
        if (parts.size() != 3) throw CLI::ValidationError("--rule", "geometric:AMP:RATIO");
        return VRule::geometric(std::stod(parts[1]), std::stod(parts[2]));
    }
    if (parts[0] == "explicit") {
        if (parts.size() != 2) throw CLI::ValidationError("--rule", "explicit:v1,v2,..");
        std::vector<double> vs;
        for (const auto& t : split(parts[1], ',')) vs.push_back(std::stod(t));
        return VRule::explicit_list(std::move(vs));
    }
    throw CLI::ValidationError("--rule", "unknown rule kind '" + parts[0] + "'");
}

SparseSpec resolve_spec(const SpecSource& src) {
    if (!src.spec_path.empty()) return load_spec(src.spec_path).spec;
    if (!src.rule_text.empty()) {
        const auto parts = split(src.rule_text, ':');
        if (parts.size() == 2 && parts[0] == "explicit" &&
            parts[1].find('@') != std::string::npos) {
            const auto halves = split(parts[1], '@');
            std::vector<double> vs;
            for (const auto& t : split(halves[0], ',')) vs.push_back(std::stod(t));
            std::vector<std::int64_t> ns;
            for (const auto& t : split(halves[1], ',')) ns.push_back(std::stoll(t));
            return SparseSpec::explicit_list(std::move(vs), std::move(ns));
        }
        return SparseSpec::from_rule(parse_rule(src.rule_text), {});
    }
    return SparseSpec::free_case(); // --free or nothing
}

// "KxK@S" lattice on [-S,S]^2 or "random:K@S" (seeded).
std::vector<std::pair<double, double>> parse_ab_grid(const std::string& text,
                                                     std::uint64_t seed) {
    std::vector<std::pair<double, double>> grid;
    if (text.rfind("random:", 0) == 0) {
        const auto halves = split(text.substr(7), '@');
        if (halves.size() != 2) throw CLI::ValidationError("--ab-grid", "random:K@S");
        const int count = std::stoi(halves[0]);
        const double span = std::stod(halves[1]);
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> dist(-span, span);
        for (int i = 0; i < count; ++i) {
            const double a = dist(rng);
            const double b = dist(rng);
            grid.emplace_back(a, b);
        }
        return grid;
    }
    const auto halves = split(text, '@');
    if (halves.size() != 2) throw CLI::ValidationError("--ab-grid", "expected KxK@S or random:K@S");
    const auto dims = split(halves[0], 'x');
    if (dims.size() != 2) throw CLI::ValidationError("--ab-grid", "expected KxK@S");
    const int ka = std::stoi(dims[0]);
    const int kb = std::stoi(dims[1]);
    const double span = std::stod(halves[1]);
    for (int i = 0; i < ka; ++i) {
        for (int j = 0; j < kb; ++j) {
            const double a = ka == 1 ? 0.0 : -span + 2.0 * span * i / double(ka - 1);
            const double b = kb == 1 ? 0.0 : -span + 2.0 * span * j / double(kb - 1);
            grid.emplace_back(a, b);
        }
    }
    return grid;
}

void write_rows_output(const std::vector<ResultRow>& rows, const std::string& out) {
    if (out.empty() || out == "-") {
        emit_rows(rows, std::cout);
    } else {
        save_rows(rows, out);
    }
}

int cmd_universality(const SpecSource& src, const std::string& config_path,
                     ExperimentConfig cfg, const std::string& ab_text, std::uint64_t seed,
                     const std::string& out) {
    if (!config_path.empty()) {
        cfg = load_config(config_path);
    } else {
        cfg.spec = resolve_spec(src);
        cfg.ab_grid = parse_ab_grid(ab_text, seed);
        cfg.out_rows = out;
    }
    const auto rows = run_universality_sweep(cfg);
    write_rows_output(rows, cfg.out_rows);
    if (cfg.strip_checks) {
        std::fprintf(stderr, "strip spot-check max deviation: %.6g\n", strip_spot_check(cfg));
    }
    return 0;
}

int cmd_table(const SpecSource& src, const std::string& config_path, ExperimentConfig cfg,
              const std::string& ab_text, std::uint64_t seed, const std::string& out,
              const std::string& plot) {
    if (!config_path.empty()) {
        cfg = load_config(config_path);
    } else {
        cfg.spec = resolve_spec(src);
        cfg.ab_grid = parse_ab_grid(ab_text, seed);
        cfg.out_table = out;
        cfg.out_plot = plot;
    }
    const auto table = run_convergence_table(cfg);
    if (cfg.out_table.empty() || cfg.out_table == "-") {
        emit_table(table, std::cout);
    } else {
        save_table(table, cfg.out_table);
    }
    if (!cfg.out_plot.empty()) save_convergence_plot_svg(table, cfg.out_plot);
    return 0;
}

int cmd_sparsify(const std::string& rule_text, std::size_t levels, SparsifierConfig scfg,
                 const std::string& out) {
    const VRule rule = parse_rule(rule_text);
    SparsifyResult result;
    try {
        result = generate_spec(rule, levels, scfg);
    } catch (const SparsifyCapExceededError& e) {
        std::fprintf(stderr, "error: %s (placed %zu of %zu sites; partial spec follows)\n",
                     e.what(), e.partial.spec.site_count(), levels);
        std::cout << spec_to_json(e.partial.spec, e.partial.certificates);
        return 3;
    }
    std::printf("level  N            v              max_kernel_error  ratio_A_max\n");
    for (std::size_t j = 0; j < result.spec.site_count(); ++j) {
        const auto& cert = result.certificates[j];
        std::printf("%-6zu %-12lld %-14.6g %-17.6g %-12.6g\n", j + 1,
                    static_cast<long long>(result.spec.site(j)), result.spec.coupling(j),
                    cert.max_kernel_error, cert.ratio_A_max);
    }
    std::printf("classification: %s\n", to_string(classify_measure(result.spec)));
    if (!out.empty()) {
        save_spec(result.spec, result.certificates, out);
        std::printf("spec written to %s\n", out.c_str());
    }
    return 0;
}

int cmd_classify(const SpecSource& src) {
    const SparseSpec spec = resolve_spec(src);
    std::printf("%s\n", to_string(classify_measure(spec)));
    return 0;
}

int cmd_quadrature(const SpecSource& src, std::optional<std::size_t> level, std::int64_t n,
                   const std::string& out) {
    const JacobiParams params{resolve_spec(src), level};
    const QuadratureRule rule = quadrature_approx(n, params);
    if (out.empty() || out == "-") {
        emit_quadrature(rule, std::cout);
    } else {
        save_quadrature(rule, out);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sparse Jacobi operators: Christoffel-Darboux kernels, sine-kernel bulk "
                 "universality checks, adaptive gap certification"};
    app.require_subcommand(1);

    SpecSource src;
    ExperimentConfig cfg;
    std::string config_path, ab_text = "7x7@1", out, plot;
    std::uint64_t seed = 12345;
    int level_flag = -1;

    const auto add_spec_flags = [&](CLI::App* cmd) {
        cmd->add_option("--spec", src.spec_path, "spec JSON file");
        cmd->add_option("--rule", src.rule_text,
                        "inline rule: power:AMP:EXP | geometric:AMP:RATIO | zero | "
                        "explicit:v1,..@N1,..");
        cmd->add_flag("--free", src.free_flag, "free operator (no perturbation)");
        cmd->add_option("--level", level_flag, "truncation level (keep first L sites)");
    };

    auto* uni = app.add_subcommand("universality", "kernel-ratio sweep against the sine target");
    add_spec_flags(uni);
    uni->add_option("--config", config_path, "full experiment config JSON (overrides flags)");
    uni->add_option("--x", cfg.x_list, "base points x in (-2,2)")->delimiter(',');
    uni->add_option("--ab-grid", ab_text, "offset grid: KxK@S or random:K@S");
    uni->add_option("--n-list", cfg.n_list, "kernel orders, increasing")->delimiter(',');
    uni->add_option("--out", out, "rows CSV path (default stdout)");
    bool compensated = false;
    uni->add_flag("--compensated", compensated, "double-double recurrences");
    uni->add_flag("--strip-checks", cfg.strip_checks, "complex-offset spot checks to stderr");
    uni->add_option("--threads", cfg.threads, "worker threads");
    uni->add_option("--seed", seed, "seed for random offset grids");

    auto* tab = app.add_subcommand("table", "convergence table n -> sup error");
    add_spec_flags(tab);
    tab->add_option("--config", config_path, "full experiment config JSON (overrides flags)");
    tab->add_option("--x", cfg.x_list, "base points x in (-2,2)")->delimiter(',');
    tab->add_option("--ab-grid", ab_text, "offset grid: KxK@S or random:K@S");
    tab->add_option("--n-list", cfg.n_list, "kernel orders, increasing")->delimiter(',');
    tab->add_option("--epsilon", cfg.epsilons, "targets for the least-n report")->delimiter(',');
    tab->add_option("--out", out, "table CSV path (default stdout)");
    tab->add_option("--plot", plot, "SVG plot path");
    tab->add_flag("--compensated", compensated, "double-double recurrences");
    tab->add_option("--threads", cfg.threads, "worker threads");
    tab->add_option("--seed", seed, "seed for random offset grids");

    SparsifierConfig scfg;
    std::string sparsify_rule = "power:1:0.5";
    std::size_t levels = 3;
    std::string sparsify_out;
    auto* spa = app.add_subcommand("sparsify", "place sites adaptively with gap certificates");
    spa->add_option("--rule", sparsify_rule, "coupling rule (power:AMP:EXP | geometric:AMP:RATIO)");
    spa->add_option("--levels", levels, "number of sites to place");
    spa->add_option("--out", sparsify_out, "write spec+certificates JSON here");
    spa->add_option("--tolerance-slack", scfg.tolerance_slack, "certified error <= slack/level");
    spa->add_option("--ratio-floor", scfg.ratio_floor, "minimum N_{l+1}/N_l");
    spa->add_option("--x-grid-size", scfg.x_grid_size, "certification x grid points");
    spa->add_option("--ab-grid-size", scfg.ab_grid_size, "certification offset grid (K -> KxK)");
    spa->add_option("--probes", scfg.probe_multipliers, "probe multipliers, e.g. 1,2,4,8")
        ->delimiter(',');
    spa->add_option("--n-cap", scfg.n_cap, "hard ceiling on searched N");
    spa->add_option("--threads", scfg.threads, "worker threads");
    bool flat_ratio = false;
    spa->add_flag("--flat-ratio-floor", flat_ratio, "disable the per-level ratio schedule");

    auto* cls = app.add_subcommand("classify", "sum v_j^2 dichotomy verdict");
    add_spec_flags(cls);

    std::int64_t quad_n = 64;
    auto* qua = app.add_subcommand("quadrature", "nodes/weights of the truncated operator");
    add_spec_flags(qua);
    qua->add_option("--n", quad_n, "truncation size (1..5000)");
    qua->add_option("--out", out, "CSV path (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (level_flag >= 0) cfg.level = std::size_t(level_flag);
        if (compensated) cfg.precision = Precision::compensated;
        if (uni->parsed()) return cmd_universality(src, config_path, cfg, ab_text, seed, out);
        if (tab->parsed()) return cmd_table(src, config_path, cfg, ab_text, seed, out, plot);
        if (spa->parsed()) {
            scfg.per_level_ratio_schedule = !flat_ratio;
            return cmd_sparsify(sparsify_rule, levels, scfg, sparsify_out);
        }
        if (cls->parsed()) return cmd_classify(src);
        if (qua->parsed()) {
            return cmd_quadrature(src, level_flag >= 0
                                           ? std::optional<std::size_t>(std::size_t(level_flag))
                                           : std::nullopt,
                                  quad_n, out);
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 1;
}
