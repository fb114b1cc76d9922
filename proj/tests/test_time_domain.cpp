#include <doctest.h>

#include <cmath>
#include <random>

#include "oscchain/diagnostics.hpp"
#include "oscchain/spectral_solver.hpp"
#include "oscchain/time_domain.hpp"

using namespace oscchain;
using namespace oscchain::timedomain;

namespace {

ChainConfig make_cfg(int N, double nu, double gamma = 0.5, double omega = 3.0) {
    ChainConfig cfg;
    cfg.half_width = N;
    cfg.omega0 = 1.0;
    cfg.gamma = gamma;
    cfg.nu = nu;
    cfg.theta = 2.0 * M_PI / omega;
    cfg.pin = potentials::sin_pow(1);
    cfg.coupling = potentials::zero();
    cfg.forcing.modes = {{1, cplx(0.25, 0.0)}};
    return cfg;
}

ChainState zero_state(int n) {
    return ChainState{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0),
                      0.0};
}

}  // namespace

TEST_CASE("integrator config validation") {
    IntegratorConfig icfg;
    icfg.steps_per_period = 300;  // not a power of two
    CHECK_THROWS_AS(icfg.validate(), ConfigError);
    icfg.steps_per_period = 128;  // below the floor
    CHECK_THROWS_AS(icfg.validate(), ConfigError);
    icfg.steps_per_period = 1024;
    icfg.periods = 0;
    CHECK_THROWS_AS(icfg.validate(), ConfigError);
}

TEST_CASE("damped free chain: strobe norm decays monotonically") {
    ChainConfig cfg = make_cfg(2, 0.0, 1.0);
    cfg.pin = potentials::zero();
    cfg.forcing.modes.clear();
    IntegratorConfig icfg;
    icfg.steps_per_period = 256;
    icfg.periods = 80;
    ChainState init = zero_state(cfg.sites());
    init.q = {0.3, -0.1, 0.8, 0.2, -0.4};
    init.p = {0.0, 0.5, -0.2, 0.1, 0.0};
    const Trajectory traj = integrate(cfg, init, icfg);
    // the state norm oscillates inside a decaying envelope; compare across
    // a window longer than the beat period
    std::vector<double> norms;
    for (const ChainState& st : traj.strobe_states)
        norms.push_back(site_norm(st.q) + site_norm(st.p));
    for (std::size_t k = 2; k + 10 < norms.size(); ++k)
        CHECK(norms[k + 10] < norms[k]);
    CHECK(norms.back() < 0.1 * norms.front());
    // energy non-increasing for the unforced damped chain
    for (std::size_t k = 1; k < traj.energy.size(); ++k)
        CHECK(traj.energy[k] <= traj.energy[k - 1] * (1.0 + 1e-12));
}

TEST_CASE("single-oscillator closed form: steady amplitude and periodic orbit") {
    // gamma = 0.5, omega0 = 1, omega = 2, F = 1: amplitude 1/sqrt(13)
    ChainConfig cfg;
    cfg.half_width = 0;
    cfg.omega0 = 1.0;
    cfg.gamma = 0.5;
    cfg.nu = 0.0;
    cfg.theta = M_PI;  // omega = 2
    cfg.pin = potentials::zero();
    cfg.coupling = potentials::zero();
    cfg.forcing.modes = {{1, cplx(0.5, 0.0)}};  // F cos(wt), F = 1

    const double R = 9.0 + 4.0;  // (1-4)^2 + 4*0.25*4
    const double qs = -3.0 / R, ps = 2.0 * 0.5 * 4.0 / R;
    double amp = 0.0;
    for (int k = 0; k < 2000; ++k) {
        double q, p;
        single_oscillator_exact(cfg, qs, ps, cfg.theta * k / 2000.0, q, p);
        amp = std::max(amp, std::abs(q));
    }
    CHECK(amp == doctest::Approx(1.0 / std::sqrt(13.0)).epsilon(1e-6));

    // gamma = 0: q0 = F/(w0^2-w^2), p0 = 0 gives an exactly periodic orbit
    ChainConfig und = cfg;
    und.gamma = 0.0;
    const double q0 = 1.0 / (1.0 - 4.0);
    double q, p;
    single_oscillator_exact(und, q0, 0.0, und.theta, q, p);
    CHECK(q == doctest::Approx(q0).epsilon(1e-12));
    CHECK(std::abs(p) < 1e-12);

    // gamma > 0: the transient decays like e^{-gamma t} (underdamped)
    double q1, p1, q2, p2, qs1, ps1, qs2, ps2;
    single_oscillator_exact(cfg, qs + 1.0, ps, 6.0, q1, p1);
    single_oscillator_exact(cfg, qs, ps, 6.0, qs1, ps1);
    single_oscillator_exact(cfg, qs + 1.0, ps, 12.0, q2, p2);
    single_oscillator_exact(cfg, qs, ps, 12.0, qs2, ps2);
    const double d1 = std::hypot(q1 - qs1, p1 - ps1);
    const double d2 = std::hypot(q2 - qs2, p2 - ps2);
    CHECK(d2 / d1 <= std::exp(-0.5 * 6.0) * 10.0);

    // degenerate gamma = omega0 limit stays finite and correct
    ChainConfig crit = cfg;
    crit.gamma = 1.0;
    double qc, pc;
    single_oscillator_exact(crit, 0.3, -0.2, 2.0, qc, pc);
    CHECK(std::isfinite(qc));
    CHECK(std::isfinite(pc));
    ChainConfig near_crit = cfg;
    near_crit.gamma = 1.0 + 1e-9;
    double qn, pn;
    single_oscillator_exact(near_crit, 0.3, -0.2, 2.0, qn, pn);
    CHECK(qc == doctest::Approx(qn).epsilon(1e-6));

    ChainConfig bad = cfg;
    bad.half_width = 1;
    double qq, pp;
    CHECK_THROWS_AS(single_oscillator_exact(bad, 0, 0, 1.0, qq, pp),
                    ConfigError);
}

TEST_CASE("single-oscillator damped gaps") {
    ChainConfig cfg;
    cfg.half_width = 0;
    cfg.omega0 = 1.0;
    cfg.gamma = 1.0;
    cfg.theta = 2.0 * M_PI / 2.0;
    cfg.pin = potentials::zero();
    cfg.coupling = potentials::zero();
    // omega0 <= sqrt(2) gamma: delta* = omega0^2
    CHECK(single_oscillator_gap(cfg).first == doctest::Approx(1.0));

    ChainConfig c2 = cfg;
    c2.omega0 = 2.0;
    c2.gamma = 0.1;
    c2.theta = 2.0 * M_PI / 3.0;
    // m* = 0: min(phi(0), phi(1)) = min(4, sqrt(25.36)) = 4
    CHECK(single_oscillator_gap(c2).first == doctest::Approx(4.0));

    ChainConfig c3 = cfg;
    c3.omega0 = 1.0;
    c3.gamma = 0.5;
    c3.theta = 2.0 * M_PI / 2.0;
    // omega0 < sqrt(omega^2 + 2 gamma^2): delta_bar = sqrt((4-1)^2+4*0.25*4)
    CHECK(single_oscillator_gap(c3).second ==
          doctest::Approx(std::sqrt(13.0)));
}

TEST_CASE("drift matrix and decay rate") {
    ChainConfig c0 = make_cfg(0, 0.0);
    const Eigen::MatrixXd A0 = drift_matrix(c0);
    CHECK(A0.rows() == 2);
    CHECK(A0(0, 1) == 1.0);
    CHECK(A0(1, 0) == doctest::Approx(-1.0));
    CHECK(A0(1, 1) == doctest::Approx(-1.0));  // friction 2 gamma = 1
    CHECK(decay_rate(A0) == doctest::Approx(0.5).epsilon(1e-12));

    ChainConfig free = make_cfg(3, 0.0, 0.0);
    CHECK(std::abs(decay_rate(drift_matrix(free))) < 1e-10);

    double prev = 1e300;
    for (int N : {2, 4, 8, 16}) {
        ChainConfig cfg = make_cfg(N, 0.0);
        const double rate = decay_rate(drift_matrix(cfg));
        CHECK(rate > 0.0);
        CHECK(rate < prev);
        prev = rate;
    }
}

TEST_CASE("drift matrix block structure") {
    ChainConfig cfg = make_cfg(2, 0.0, 0.7);
    const int n = cfg.sites();
    const Eigen::MatrixXd A = drift_matrix(cfg);
    std::vector<double> unit(n, 0.0), col(n);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            CHECK(A(i, j + n) == (i == j ? 1.0 : 0.0));  // top-right identity
            CHECK(A(i, j) == 0.0);                       // top-left zero
        }
        unit[j] = 1.0;
        neumann_laplacian(std::span<const double>(unit), std::span<double>(col));
        unit[j] = 0.0;
        for (int i = 0; i < n; ++i) {
            const double expect = col[i] - (i == j ? 1.0 : 0.0);  // Delta - w0^2
            CHECK(A(n + i, j) == doctest::Approx(expect));
        }
    }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double expect =
                (i == j && (i == 0 || i == n - 1)) ? -cfg.gamma : 0.0;
            CHECK(A(n + i, n + j) == doctest::Approx(expect));
        }
}

TEST_CASE("variational flow matches a finite-difference period map") {
    ChainConfig cfg = make_cfg(2, 0.3);
    cfg.coupling = potentials::cosine();
    IntegratorConfig icfg;
    icfg.steps_per_period = 512;
    icfg.periods = 1;
    ChainState z = zero_state(cfg.sites());
    z.q = {0.1, -0.2, 0.3, 0.05, -0.1};
    z.p = {0.0, 0.1, -0.05, 0.2, 0.0};

    Eigen::MatrixXd M;
    flow_with_monodromy(cfg, z, icfg, &M);

    const int dim = 2 * cfg.sites();
    const double h = 1e-6;
    for (int j = 0; j < dim; ++j) {
        ChainState zp = z, zm = z;
        double& vp = j < cfg.sites() ? zp.q[j] : zp.p[j - cfg.sites()];
        double& vm = j < cfg.sites() ? zm.q[j] : zm.p[j - cfg.sites()];
        vp += h;
        vm -= h;
        const ChainState fp = flow_with_monodromy(cfg, zp, icfg, nullptr);
        const ChainState fm = flow_with_monodromy(cfg, zm, icfg, nullptr);
        for (int i = 0; i < dim; ++i) {
            const double up = i < cfg.sites() ? fp.q[i] : fp.p[i - cfg.sites()];
            const double um = i < cfg.sites() ? fm.q[i] : fm.p[i - cfg.sites()];
            CHECK(M(i, j) == doctest::Approx((up - um) / (2 * h)).epsilon(1e-5));
        }
    }
}

TEST_CASE("monodromy eigenvalues inside the unit circle for gamma > 0") {
    ChainConfig cfg = make_cfg(3, 0.0);
    const Eigen::MatrixXd A = drift_matrix(cfg);
    Eigen::MatrixXd M;
    IntegratorConfig icfg;
    icfg.steps_per_period = 512;
    icfg.periods = 1;
    flow_with_monodromy(cfg, zero_state(cfg.sites()), icfg, &M);
    const Eigen::VectorXcd ev = Eigen::EigenSolver<Eigen::MatrixXd>(M)
                                    .eigenvalues();
    for (int i = 0; i < ev.size(); ++i) CHECK(std::abs(ev(i)) < 1.0);
    // consistency: the same rate as the drift spectrum
    const double rho = ev.cwiseAbs().maxCoeff();
    CHECK(-std::log(rho) / cfg.theta ==
          doctest::Approx(decay_rate(A)).epsilon(1e-6));
}

TEST_CASE("linear periodic point: zero forcing, fixed point, spectral match") {
    ChainConfig cfg = make_cfg(2, 0.0);
    ChainConfig quiet = cfg;
    quiet.forcing.modes.clear();
    const ChainState z0 = linear_periodic_point(quiet);
    CHECK(site_norm(z0.q) + site_norm(z0.p) < 1e-13);

    const ChainState z = linear_periodic_point(cfg);
    IntegratorConfig icfg;
    icfg.steps_per_period = 4096;
    icfg.periods = 1;
    const Trajectory traj = integrate(cfg, z, icfg);
    const ChainState& z1 = traj.strobe_states.back();
    double drift = 0.0;
    for (int i = 0; i < cfg.sites(); ++i)
        drift += std::hypot(z1.q[i] - z.q[i], z1.p[i] - z.p[i]);
    CHECK(drift < 1e-10);

    auto [sol, rep] = spectral::fixed_point_solve(cfg);
    const ChainState zs = spectral::solution_state(sol, 0.0);
    double diff = 0.0;
    for (int i = 0; i < cfg.sites(); ++i)
        diff += std::hypot(zs.q[i] - z.q[i], zs.p[i] - z.p[i]);
    CHECK(diff < 1e-8);

    ChainConfig undamped = cfg;
    undamped.gamma = 0.0;
    CHECK_THROWS_AS(linear_periodic_point(undamped), ConfigError);
    ChainConfig nonlinear = cfg;
    nonlinear.nu = 0.1;
    CHECK_THROWS_AS(linear_periodic_point(nonlinear), ConfigError);
}

TEST_CASE("stroboscopic attraction at N=2 and rate against lambda_N") {
    ChainConfig cfg = make_cfg(2, 0.2);
    auto [sol, rep] = spectral::fixed_point_solve(cfg);

    // starting on the periodic orbit keeps the distance at solver accuracy
    IntegratorConfig icfg;
    icfg.steps_per_period = 1024;
    icfg.periods = 20;
    const ChainState on = spectral::solution_state(sol, 0.0);
    const Trajectory traj0 = integrate(cfg, on, icfg);
    for (double d : stroboscopic_distance(traj0, sol)) CHECK(d < 1e-7);

    // generic start converges below 1e-6 within a cfg-dependent horizon
    icfg.periods = 420;
    ChainState init = zero_state(cfg.sites());
    init.q[1] = 0.4;
    const Trajectory traj = integrate(cfg, init, icfg);
    const std::vector<double> d = stroboscopic_distance(traj, sol);
    CHECK(d.back() < 1e-6);
    // eventually monotone on the envelope (mode beats wobble per period)
    for (std::size_t k = 30; k + 16 < d.size() && d[k] > 1e-9; ++k)
        CHECK(d[k + 16] < d[k]);

    // nu = 0 decay-rate fit against the drift spectrum (within 20%)
    ChainConfig lin = make_cfg(2, 0.0);
    auto [lsol, lrep] = spectral::fixed_point_solve(lin);
    const Trajectory ltraj = integrate(lin, init, icfg);
    const std::vector<double> ld = stroboscopic_distance(ltraj, lsol);
    const double lambda = decay_rate(drift_matrix(lin));
    // fit log d over the late window where the slowest mode dominates
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int cnt = 0;
    for (std::size_t k = 100; k < ld.size() && ld[k] > 1e-10; ++k) {
        const double x = lin.theta * k, y = std::log(ld[k]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++cnt;
    }
    const double slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
    CHECK(-slope == doctest::Approx(lambda).epsilon(0.2));
}

TEST_CASE("newton on the period map: linear case and local uniqueness") {
    ChainConfig lin = make_cfg(2, 0.0);
    IntegratorConfig icfg;
    icfg.steps_per_period = 1024;
    icfg.periods = 1;
    const ChainState target = linear_periodic_point(lin);
    std::mt19937_64 rng(83);
    std::normal_distribution<double> d(0.0, 1.0);
    ChainState guess = zero_state(lin.sites());
    for (double& v : guess.q) v = d(rng);
    for (double& v : guess.p) v = d(rng);
    const ChainState z = newton_periodic(lin, guess, 1e-11, icfg);
    double diff = 0.0;
    for (int i = 0; i < lin.sites(); ++i)
        diff += std::hypot(z.q[i] - target.q[i], z.p[i] - target.p[i]);
    CHECK(diff < 1e-9);

    // anharmonic: several random seeds land on the same orbit as the solver
    ChainConfig cfg = make_cfg(2, 0.2);
    auto [sol, rep] = spectral::fixed_point_solve(cfg);
    const ChainState zs = spectral::solution_state(sol, 0.0);
    for (int seed = 0; seed < 5; ++seed) {
        ChainState g = zero_state(cfg.sites());
        for (double& v : g.q) v = 0.5 * d(rng);
        for (double& v : g.p) v = 0.5 * d(rng);
        const ChainState zz = newton_periodic(cfg, g, 1e-11, icfg);
        double dd = 0.0;
        for (int i = 0; i < cfg.sites(); ++i)
            dd += std::hypot(zz.q[i] - zs.q[i], zz.p[i] - zs.p[i]);
        CHECK(dd < 1e-8);
    }

    ChainConfig undamped = make_cfg(2, 0.0, 0.0);
    CHECK_THROWS_AS(newton_periodic(undamped, guess, 1e-10, icfg),
                    ConfigError);
}

TEST_CASE("double-well regime: a second periodic orbit exists") {
    // cos pinning: curvature bound 1, delta* = 1, delta_bar = 4, so
    // nu = 2 sits between nu0 and nu0_bar and the effective potential
    // w0^2 q^2/2 + nu cos(q) has a second minimum at qbar with
    // qbar = 2 sin(qbar).
    ChainConfig cfg = make_cfg(2, 2.0);
    cfg.pin = potentials::cosine();
    cfg.forcing.modes = {{1, cplx(0.025, 0.0)}};  // small odd forcing

    auto [sol, rep] = spectral::series_solve(cfg);
    CHECK(rep.converged);
    CHECK(rep.odd_projection);
    const ChainState zs = spectral::solution_state(sol, 0.0);

    double qbar = 1.9;
    for (int it = 0; it < 60; ++it)
        qbar = qbar - (qbar - 2.0 * std::sin(qbar)) / (1.0 - 2.0 * std::cos(qbar));
    CHECK(qbar == doctest::Approx(1.8954942670339809).epsilon(1e-12));

    IntegratorConfig icfg;
    icfg.steps_per_period = 1024;
    icfg.periods = 1;
    ChainState seed = zero_state(cfg.sites());
    for (double& v : seed.q) v = qbar;
    const ChainState z2 = newton_periodic(cfg, seed, 1e-10, icfg);

    // genuine fixed point of the period map
    const Trajectory check = integrate(cfg, z2, icfg);
    const ChainState& z2b = check.strobe_states.back();
    double drift = 0.0, dist = 0.0;
    for (int i = 0; i < cfg.sites(); ++i) {
        drift += std::hypot(z2b.q[i] - z2.q[i], z2b.p[i] - z2.p[i]);
        dist += std::hypot(z2.q[i] - zs.q[i], z2.p[i] - zs.p[i]);
    }
    CHECK(drift < 1e-8);
    CHECK(dist > 0.1);  // distinct from the series orbit
}

TEST_CASE("energy-balance residual shrinks like h^4") {
    ChainConfig cfg = make_cfg(2, 0.3);
    cfg.coupling = potentials::cosine();  // exercise the interaction terms
    ChainState init = zero_state(cfg.sites());
    init.q[0] = 0.5;
    auto residual = [&](int spp) {
        IntegratorConfig icfg;
        icfg.steps_per_period = spp;
        icfg.periods = 5;
        const Trajectory traj = integrate(cfg, init, icfg);
        return diagnostics::energy_balance_residual(traj);
    };
    const double r1 = residual(256), r2 = residual(512);
    CHECK(r1 / r2 > 8.0);
    CHECK(r1 / r2 < 40.0);
}
