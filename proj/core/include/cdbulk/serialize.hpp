#pragma once

#include <string>
#include <vector>

#include "cdbulk/harness.hpp"
#include "cdbulk/jacobi.hpp"
#include "cdbulk/sparsifier.hpp"

namespace cdbulk {

/// Spec documents are JSON with a fixed schema (see README): a `spec` object
/// holding `v_rule`, `N` (array or "adaptive"), `envelope_rule`, and an
/// optional `certificates` array. Doubles round-trip losslessly.
struct LoadedSpec {
    SparseSpec spec;
    std::vector<GapCertificate> certificates;
};

std::string spec_to_json(const SparseSpec& spec,
                         const std::vector<GapCertificate>& certificates = {});
LoadedSpec spec_from_json(const std::string& text);

void save_spec(const SparseSpec& spec, const std::vector<GapCertificate>& certificates,
               const std::string& path);
LoadedSpec load_spec(const std::string& path);

/// Experiment configuration document: `spec` (inline object, `spec_file`
/// path, or `free`), `grids`, `outputs`, `modes`, `epsilons`.
ExperimentConfig config_from_json(const std::string& text);
ExperimentConfig load_config(const std::string& path);

} // namespace cdbulk
