#pragma once

#include <stdexcept>
#include <string>

namespace oscchain {

// Exit codes used by the CLI: 2 config, 3 resonance gate, 4 non-convergence,
// 5 internal oracle failure.

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Resonance gates and spectral-domain violations (band membership, branch
// cuts, degenerate boundary systems).  `harmonic` names the offending mode
// when one exists, otherwise INT_MIN.
struct ResonanceError : std::runtime_error {
    explicit ResonanceError(const std::string& msg, int m = kNoHarmonic)
        : std::runtime_error(msg), harmonic(m) {}
    static constexpr int kNoHarmonic = -2147483647;
    int harmonic;
};

struct ConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct OracleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace oscchain
