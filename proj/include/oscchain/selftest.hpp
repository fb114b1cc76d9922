#pragma once

#include <ostream>

namespace oscchain::selftest {

// Embedded oracle suites: dense Green's-function oracle, quadrature oracle
// for the lattice resolvent, RK4 order check, and the N=0 closed forms.
// Prints one line per suite; returns the number of failed suites.
int run(std::ostream& log);

}  // namespace oscchain::selftest
