#pragma once

#include <Eigen/Dense>
#include <functional>
#include <utility>
#include <vector>

#include "oscchain/chain.hpp"
#include "oscchain/spectral_solver.hpp"

namespace oscchain::timedomain {

struct IntegratorConfig {
    int steps_per_period = 1024;  // power of two, >= 256
    int periods = 200;
    void validate() const;
};

// Stroboscopic RK4 output with energy-balance accounting: work_in[k] is
// the cumulative forcing work up to k*theta, dissipated[k] the cumulative
// boundary friction loss, both integrated inside the RK4 stages.
struct Trajectory {
    double theta = 0.0;
    std::vector<double> strobe_times;
    std::vector<ChainState> strobe_states;  // index 0 is the initial state
    std::vector<double> work_in;
    std::vector<double> dissipated;
    std::vector<double> energy;
    bool blew_up = false;
    double last_finite_time = 0.0;
};

using SampleSink = std::function<void(const ChainState&)>;

Trajectory integrate(const ChainConfig& cfg, const ChainState& initial,
                     const IntegratorConfig& icfg,
                     const SampleSink& dense_sink = nullptr);

// Explicit solution of the N=0 linear oscillator with single-mode cosine
// forcing; handles underdamped/overdamped/degenerate cases through complex
// arithmetic and series limits.
void single_oscillator_exact(const ChainConfig& cfg, double q0, double p0,
                             double t, double& q, double& p);

// Damped single-oscillator gaps (delta_*, delta_bar_*) in closed form,
// cross-checked internally against a brute scan.
std::pair<double, double> single_oscillator_gap(const ChainConfig& cfg);

// Block drift matrix of the damped linear dynamics.
Eigen::MatrixXd drift_matrix(const ChainConfig& cfg);

// lambda_N: negated spectral abscissa of A.
double decay_rate(const Eigen::MatrixXd& A);

// Periodic initial point of the nu = 0 dynamics via the monodromy solve
// z* = (I - e^{A theta})^{-1} int_0^theta e^{A(theta-s)} F(s) ds, evaluated
// with a scaling-and-squaring exponential and panelwise Gauss-Legendre
// quadrature.
ChainState linear_periodic_point(const ChainConfig& cfg);

// Flow over `periods` periods together with the variational (monodromy)
// matrix of the period map.
ChainState flow_with_monodromy(const ChainConfig& cfg, const ChainState& z0,
                               const IntegratorConfig& icfg,
                               Eigen::MatrixXd* monodromy);

// d_k = ||q(k theta) - q_p(0)|| + ||p(k theta) - p_p(0)||.
std::vector<double> stroboscopic_distance(const Trajectory& traj,
                                          const spectral::PeriodicSolution& sol);

// Newton refinement of a fixed point of the period map, with the Jacobian
// from variational integration.
ChainState newton_periodic(const ChainConfig& cfg, const ChainState& guess,
                           double tol, const IntegratorConfig& icfg);

}  // namespace oscchain::timedomain
