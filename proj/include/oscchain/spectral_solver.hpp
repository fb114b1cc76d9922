#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "oscchain/chain.hpp"
#include "oscchain/collocation.hpp"
#include "oscchain/greens.hpp"
#include "oscchain/harmonic_field.hpp"

namespace oscchain::spectral {

// delta_*: distance of the nearest (m w)^2, m integer, to the squared band
// [w0^2, w0^2+4].  Zero signals resonance.
double resonance_gap(const ChainConfig& cfg);

// Odd-multiples-only variant delta_bar_* (m = 0 excluded).
double odd_resonance_gap(const ChainConfig& cfg);

struct CouplingRadius {
    double delta_star = 0.0;
    double delta_bar = 0.0;
    double nu0 = 0.0;
    double nu0_bar = 0.0;
    bool unbounded = false;  // curvature bound 0: radius is infinite
};
CouplingRadius coupling_radius(const ChainConfig& cfg);

struct SolverOptions {
    double tol = 1e-10;
    int max_order = 400;       // series truncation guard
    int max_iterations = 400;  // Picard iteration guard
    int max_harmonic = 0;      // 0 = adaptive refinement
    int grid_size = 0;         // 0 = derived from max_harmonic
    std::uint64_t seed = 12345;
};

struct ConvergenceReport {
    std::string method;
    int iterations = 0;
    std::vector<double> norms;   // per order / per iterate
    std::vector<double> ratios;  // successive ratios of the above
    double final_residual = 0.0;  // relative harmonic-domain defect
    double tail_bound = 0.0;      // analytic series tail at the stop order
    double wall_seconds = 0.0;    // console diagnostics only, never serialized
    int max_harmonic = 0;
    int grid_size = 0;
    double delta_star = 0.0;
    double nu0 = 0.0;
    double nu0_bar = 0.0;
    double contraction_measured = -1.0;  // fixed-point probe; -1 = not run
    double solution_norm = 0.0;     // |||q_p|||
    double solution_norm_h1 = 0.0;  // |||q_p|||_{N,1}, one time derivative
    bool odd_projection = false;
    bool converged = false;
    std::string note;
};

struct PeriodicSolution {
    ChainConfig cfg;
    HarmonicField field;
};

// Exact nu = 0 periodic solution: q~_x(m) = F_m H_m(x, 0).
HarmonicField harmonic_base_solution(const ChainConfig& cfg,
                                     const greens::GreensKernelSet& kernels,
                                     int max_harmonic, int grid_size);

// Harmonic coefficients of -W_x(Q(t)) by pseudo-spectral collocation
// (synthesize, evaluate pointwise, transform back, truncate to M).
HarmonicField nonlinearity_harmonics(const HarmonicField& Q,
                                     const ChainConfig& cfg,
                                     const Collocation& colloc);

// Per-harmonic kernel application (out row m = H_m * in row m), optionally
// projecting onto the odd-harmonic subspace.
HarmonicField apply_kernels(const greens::GreensKernelSet& kernels,
                            const HarmonicField& v, bool odd_only = false);

// Relative l2 defect of the harmonic-coefficient system for the field,
// normalized by the forcing amplitude.
double harmonic_defect(const HarmonicField& field, const ChainConfig& cfg);

// The perturbative scheme, one order at a time.  step() computes
// q^(L) = H (*) v_{L-1} with v_{L-1} the order-(L-1) increment of the
// nonlinearity harmonics, and accumulates the partial sum Q^(L).
class SeriesSolver {
  public:
    SeriesSolver(const ChainConfig& cfg, const greens::GreensKernelSet& kernels,
                 int max_harmonic, int grid_size, bool odd_projection = false);
    ~SeriesSolver();

    const HarmonicField& order(int l) const { return orders_.at(l); }
    const HarmonicField& partial_sum() const { return partial_; }
    int current_order() const { return static_cast<int>(orders_.size()) - 1; }
    double order_norm(int l) const { return norms_.at(l); }
    const std::vector<double>& order_norms() const { return norms_; }

    // Computes the next order and folds nu^L q^(L) into the partial sum;
    // returns |||nu^L q^(L)|||, the increment just added.
    double step();

  private:
    const ChainConfig& cfg_;
    const greens::GreensKernelSet& kernels_;
    Collocation colloc_;
    bool odd_projection_;
    std::vector<HarmonicField> orders_;
    std::vector<double> norms_;
    HarmonicField partial_;
    HarmonicField prev_nonlin_;  // nonlinearity harmonics of Q^(L-1)
    double nu_pow_ = 1.0;        // nu^L
};

std::pair<PeriodicSolution, ConvergenceReport> series_solve(
    const ChainConfig& cfg, const SolverOptions& opts = {});

std::pair<PeriodicSolution, ConvergenceReport> fixed_point_solve(
    const ChainConfig& cfg, const SolverOptions& opts = {});

// Time-domain samples of a spectral field on an arbitrary grid; momenta use
// exact spectral differentiation.
struct TimeSamples {
    int sites = 0;
    int count = 0;
    std::vector<double> q, p;  // site-major: value(x, k) = q[(x+N)*count + k]
    double qs(int site_index, int k) const {
        return q[static_cast<std::size_t>(site_index) * count + k];
    }
    double ps(int site_index, int k) const {
        return p[static_cast<std::size_t>(site_index) * count + k];
    }
};
TimeSamples synthesize(const HarmonicField& field, double theta,
                       std::span<const double> times);

// (q(t), p(t)) of a solution as a chain state.
ChainState solution_state(const PeriodicSolution& sol, double t);

// max over sites and even m != 0 of |q~_x(m)|, normalized by the field's
// l2 norm.
double even_harmonic_residual(const PeriodicSolution& sol);

}  // namespace oscchain::spectral
