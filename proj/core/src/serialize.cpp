#include "cdbulk/serialize.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace cdbulk {

using nlohmann::json;

namespace {

json vrule_to_json(const VRule& v) {
    switch (v.kind) {
    case VRule::Kind::zero: return {{"kind", "zero"}};
    case VRule::Kind::power_law:
        return {{"kind", "power"}, {"amplitude", v.amplitude}, {"exponent", v.exponent}};
    case VRule::Kind::geometric:
        return {{"kind", "geometric"}, {"amplitude", v.amplitude}, {"ratio", v.ratio}};
    case VRule::Kind::explicit_list: return {{"kind", "explicit"}, {"values", v.values}};
    }
    throw std::logic_error("vrule_to_json: unknown kind");
}

VRule vrule_from_json(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "zero") return VRule::zero();
    if (kind == "power") {
        return VRule::power_law(j.at("amplitude").get<double>(), j.at("exponent").get<double>());
    }
    if (kind == "geometric") {
        return VRule::geometric(j.at("amplitude").get<double>(), j.at("ratio").get<double>());
    }
    if (kind == "explicit") {
        return VRule::explicit_list(j.at("values").get<std::vector<double>>());
    }
    throw std::invalid_argument("v_rule: unknown kind '" + kind + "'");
}

json envelope_to_json(const EnvelopeRule& e) {
    switch (e.kind) {
    case EnvelopeRule::Kind::auto_from_v: return {{"kind", "auto"}};
    case EnvelopeRule::Kind::power_law:
        return {{"kind", "power"}, {"amplitude", e.amplitude}, {"exponent", e.exponent}};
    case EnvelopeRule::Kind::geometric:
        return {{"kind", "geometric"}, {"amplitude", e.amplitude}, {"ratio", e.ratio}};
    case EnvelopeRule::Kind::explicit_list: return {{"kind", "explicit"}, {"values", e.values}};
    case EnvelopeRule::Kind::constant: return {{"kind", "constant"}, {"value", e.level}};
    }
    throw std::logic_error("envelope_to_json: unknown kind");
}

EnvelopeRule envelope_from_json(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "auto") return EnvelopeRule::auto_from_v();
    if (kind == "power") {
        return EnvelopeRule::power_law(j.at("amplitude").get<double>(),
                                       j.at("exponent").get<double>());
    }
    if (kind == "geometric") {
        return EnvelopeRule::geometric(j.at("amplitude").get<double>(),
                                       j.at("ratio").get<double>());
    }
    if (kind == "explicit") {
        return EnvelopeRule::explicit_list(j.at("values").get<std::vector<double>>());
    }
    if (kind == "constant") return EnvelopeRule::constant(j.at("value").get<double>());
    throw std::invalid_argument("envelope_rule: unknown kind '" + kind + "'");
}

json spec_body_to_json(const SparseSpec& spec) {
    json body;
    body["v_rule"] = vrule_to_json(spec.v_rule());
    if (spec.adaptive() && spec.site_count() == 0) {
        body["N"] = "adaptive";
    } else {
        body["N"] = spec.sites();
    }
    body["envelope_rule"] = envelope_to_json(spec.envelope_rule());
    if (spec.ratio_sparse()) body["ratio_sparse"] = true;
    return body;
}

SparseSpec spec_body_from_json(const json& body) {
    VRule rule = vrule_from_json(body.at("v_rule"));
    EnvelopeRule env = body.contains("envelope_rule") ? envelope_from_json(body.at("envelope_rule"))
                                                      : EnvelopeRule::auto_from_v();
    std::vector<std::int64_t> sites;
    bool adaptive = false;
    const json& nfield = body.at("N");
    if (nfield.is_string()) {
        if (nfield.get<std::string>() != "adaptive") {
            throw std::invalid_argument("spec: N must be an array or \"adaptive\"");
        }
        adaptive = true;
    } else {
        sites = nfield.get<std::vector<std::int64_t>>();
    }
    SparseSpec spec = SparseSpec::from_rule(std::move(rule), std::move(sites), std::move(env),
                                            adaptive);
    if (body.value("ratio_sparse", false)) spec.set_ratio_sparse(true);
    return spec;
}

json certificate_to_json(const GapCertificate& c) {
    json probes = json::array();
    for (const auto& [n, err] : c.probes) probes.push_back(json::array({n, err}));
    return {{"level", c.level},
            {"N_hat", c.N_hat},
            {"max_kernel_error", c.max_kernel_error},
            {"max_ratio_error", c.max_ratio_error},
            {"ratio_A_max", c.ratio_A_max},
            {"probes", probes}};
}

GapCertificate certificate_from_json(const json& j) {
    GapCertificate c;
    c.level = j.at("level").get<std::size_t>();
    c.N_hat = j.at("N_hat").get<std::int64_t>();
    c.max_kernel_error = j.at("max_kernel_error").get<double>();
    c.max_ratio_error = j.value("max_ratio_error", 0.0);
    c.ratio_A_max = j.at("ratio_A_max").get<double>();
    for (const auto& p : j.at("probes")) {
        c.probes.emplace_back(p.at(0).get<std::int64_t>(), p.at(1).get<double>());
    }
    return c;
}

} // namespace

std::string spec_to_json(const SparseSpec& spec, const std::vector<GapCertificate>& certificates) {
    json doc;
    doc["spec"] = spec_body_to_json(spec);
    if (!certificates.empty()) {
        json arr = json::array();
        for (const auto& c : certificates) arr.push_back(certificate_to_json(c));
        doc["certificates"] = arr;
    }
    return doc.dump(2) + "\n";
}

LoadedSpec spec_from_json(const std::string& text) {
    const json doc = json::parse(text);
    LoadedSpec out;
    out.spec = spec_body_from_json(doc.contains("spec") ? doc.at("spec") : doc);
    if (doc.contains("certificates")) {
        for (const auto& c : doc.at("certificates")) {
            out.certificates.push_back(certificate_from_json(c));
        }
    }
    return out;
}

void save_spec(const SparseSpec& spec, const std::vector<GapCertificate>& certificates,
               const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    os << spec_to_json(spec, certificates);
    os.flush();
    if (!os) throw std::runtime_error("write failed: " + path);
}

LoadedSpec load_spec(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open: " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return spec_from_json(ss.str());
}

ExperimentConfig config_from_json(const std::string& text) {
    const json doc = json::parse(text);
    ExperimentConfig cfg;
    if (doc.contains("spec_file")) {
        cfg.spec = load_spec(doc.at("spec_file").get<std::string>()).spec;
    } else if (doc.contains("spec")) {
        cfg.spec = spec_body_from_json(doc.at("spec"));
    } else if (doc.value("free", false)) {
        cfg.spec = SparseSpec::free_case();
    } else {
        throw std::invalid_argument("config: one of spec, spec_file, free is required");
    }
    if (doc.contains("level")) cfg.level = doc.at("level").get<std::size_t>();

    const json& grids = doc.at("grids");
    cfg.x_list = grids.at("x").get<std::vector<double>>();
    cfg.n_list = grids.at("n_list").get<std::vector<std::int64_t>>();
    const json& ab = grids.at("ab");
    cfg.ab_grid.clear();
    if (ab.is_object()) {
        const int count = ab.at("count").get<int>();
        const double span = ab.at("span").get<double>();
        for (int i = 0; i < count; ++i) {
            for (int j = 0; j < count; ++j) {
                const double a = count == 1 ? 0.0 : -span + 2.0 * span * i / double(count - 1);
                const double b = count == 1 ? 0.0 : -span + 2.0 * span * j / double(count - 1);
                cfg.ab_grid.emplace_back(a, b);
            }
        }
    } else {
        for (const auto& p : ab) {
            cfg.ab_grid.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
        }
    }
    if (doc.contains("epsilons")) cfg.epsilons = doc.at("epsilons").get<std::vector<double>>();
    if (doc.contains("modes")) {
        const json& modes = doc.at("modes");
        if (modes.value("compensated", false)) cfg.precision = Precision::compensated;
        cfg.strip_checks = modes.value("strip_checks", false);
        cfg.threads = modes.value("threads", 1u);
    }
    if (doc.contains("outputs")) {
        const json& outputs = doc.at("outputs");
        cfg.out_rows = outputs.value("rows", "");
        cfg.out_table = outputs.value("table", "");
        cfg.out_plot = outputs.value("plot", "");
    }
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open: " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return config_from_json(ss.str());
}

} // namespace cdbulk
