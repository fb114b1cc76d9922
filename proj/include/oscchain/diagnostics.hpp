#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "oscchain/spectral_solver.hpp"
#include "oscchain/time_domain.hpp"

namespace oscchain::diagnostics {

// Period-averaged power injected by the forcing, evaluated spectrally at
// the forced site: W_N = sum_m i m w F_{-m} q~_0(m).
double work_per_period(const spectral::PeriodicSolution& sol);

// (gamma/theta) int_0^theta p_{+-N}^2 dt, split per boundary, evaluated
// spectrally.  .first is the left (-N) boundary.
std::pair<double, double> boundary_dissipation_split(
    const spectral::PeriodicSolution& sol);
double boundary_dissipation(const spectral::PeriodicSolution& sol);

// Steady state: | gamma int (p_-N^2 + p_N^2) - theta W_N |.
double energy_balance_residual(const spectral::PeriodicSolution& sol);

// Trajectory: max over strobes of |H(t) - H(0) + dissipated - work|.
double energy_balance_residual(const timedomain::Trajectory& traj);

struct DecayFit {
    double amplitude_q = 0.0, rate_q = 0.0, r2_q = 0.0;
    double amplitude_p = 0.0, rate_p = 0.0, r2_p = 0.0;
    std::vector<double> profile_q;  // max_t |q_x(t)| per site
    std::vector<double> profile_p;  // int_0^theta p_x^2 dt per site
};

// Log-linear fit of the spatial profiles over 2 <= |x| <= N-2.
DecayFit decay_fit(const spectral::PeriodicSolution& sol);

// (1/theta) int_0^theta H_N dt; quadratic parts spectrally, anharmonic
// parts by the collocation-grid mean.
double mean_hamiltonian(const spectral::PeriodicSolution& sol);

struct ScanRow {
    int half_width = 0;
    double work = 0.0;
    double dissipation = 0.0;
    double balance_residual = 0.0;
    double mean_energy = 0.0;
    double decay_rate = 0.0;      // NaN when the fit range is empty
    double stability_rate = 0.0;  // lambda_N from the drift spectrum
    double rate_shape = 0.0;      // lambda_N * N^3, the lower-bound shape
};

// Re-solves the same physics across system sizes.
std::vector<ScanRow> size_scan(const ChainConfig& base,
                               std::span<const int> sizes,
                               const spectral::SolverOptions& opts = {});

// Desk-scale localization proxy: injected work decays across the scan and
// the last row sits below a tenth of the first.
bool work_localizes(std::span<const ScanRow> rows);

// Period-mean energy stays bounded: no row exceeds the largest size's
// value by more than 5%.
bool mean_energy_saturates(std::span<const ScanRow> rows);

struct DiagnosticsReport {
    int half_width = 0;
    double nu = 0.0;
    double delta_star = 0.0, delta_bar = 0.0, nu0 = 0.0, nu0_bar = 0.0;
    // N = 0 damped-gap variants, present only for single-site chains.
    std::optional<std::pair<double, double>> oscillator_gaps;
    double work = 0.0;
    double dissipation_left = 0.0, dissipation_right = 0.0;
    double balance_residual = 0.0;
    double even_residual = 0.0;
    double mean_energy = 0.0;
    std::optional<DecayFit> decay;
    std::vector<ScanRow> scan;
};

DiagnosticsReport build_report(const spectral::PeriodicSolution& sol,
                               std::span<const int> scan_sizes = {},
                               const spectral::SolverOptions& opts = {});

}  // namespace oscchain::diagnostics
