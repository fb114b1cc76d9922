#pragma once

#include <string>
#include <vector>

#include "oscchain/config.hpp"
#include "oscchain/diagnostics.hpp"
#include "oscchain/greens.hpp"
#include "oscchain/spectral_solver.hpp"
#include "oscchain/time_domain.hpp"

namespace oscchain::io {

std::string format_g17(double v);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

// Harmonics CSV (site, m, Re, Im) with a commented metadata header.
void write_solution_csv(const std::string& path,
                        const spectral::PeriodicSolution& sol);
spectral::PeriodicSolution read_solution_csv(const std::string& path,
                                             const ChainConfig& cfg);

// Strobe rows (k, t, site, q, p).
void write_trajectory_csv(const std::string& path,
                          const timedomain::Trajectory& traj);

// Per-period distances to the reference periodic point (k, t, distance).
void write_strobe_csv(const std::string& path,
                      const std::vector<double>& distances, double theta);

// Kernel tables as (m, x, y, Re, Im).
void write_greens_csv(const std::string& path,
                      const greens::GreensKernelSet& set);

// JSON renderings.  Volatile fields (wall time) are excluded so identical
// runs serialize byte-identically.
std::string report_json(const spectral::ConvergenceReport& rep);
std::string diagnostics_json(const diagnostics::DiagnosticsReport& rep);
std::string trajectory_json(const timedomain::Trajectory& traj,
                            const std::vector<double>& strobe_distances,
                            double balance_residual);

// Human-readable aligned-text rendering of a diagnostics report.
std::string diagnostics_text(const diagnostics::DiagnosticsReport& rep);

}  // namespace oscchain::io
