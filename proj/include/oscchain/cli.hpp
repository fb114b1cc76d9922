#pragma once

#include <string>
#include <vector>

namespace oscchain::cli {

// Runs the command-line front end in-process.  Returns the process exit
// code: 0 ok, 2 config error, 3 resonance gate, 4 non-convergence,
// 5 internal oracle failure.
int run(const std::vector<std::string>& args);

}  // namespace oscchain::cli
