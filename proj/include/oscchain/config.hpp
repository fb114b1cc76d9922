#pragma once

#include <string>
#include <vector>

#include "oscchain/chain.hpp"
#include "oscchain/spectral_solver.hpp"
#include "oscchain/time_domain.hpp"

namespace oscchain {

// Declarative potential description, kept so a parsed run can be
// serialized back to an equivalent config.
struct PotentialSpec {
    std::string type = "none";
    int n = 1;
    double alpha = 1.0;
    double delta = 1.0;
    double k = 1.0;
};

Potential make_potential(const PotentialSpec& spec);

struct SweepAxis {
    std::string key;
    std::vector<double> values;
};

// Everything needed to reproduce a run: physics, solver and integrator
// settings, output location, seed, and an optional sweep grid.
struct RunSpec {
    ChainConfig cfg;
    PotentialSpec pin_spec;
    PotentialSpec coupling_spec;
    std::string method = "both";  // series | fixed | both
    spectral::SolverOptions solver;
    timedomain::IntegratorConfig integrator;
    std::string initial = "solution";  // integrate start: zero | solution | perturbed
    double perturbation = 1e-3;
    std::string out_dir = "out";
    std::vector<SweepAxis> sweep;
};

// Parses the sectioned key-value config format; throws ConfigError with
// line/column positions for syntax errors and field names for semantic
// ones.
RunSpec parse_config(const std::string& text);

// Canonical round-trippable serialization (numbers at 17 significant
// digits).
std::string serialize(const RunSpec& spec);

// Applies one sweep override (e.g. "chain.nu") to a spec.
void apply_override(RunSpec& spec, const std::string& key, double value);

}  // namespace oscchain
