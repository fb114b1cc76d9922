#include "oscchain/selftest.hpp"

#include <cmath>
#include <complex>
#include <functional>
#include <random>

#include "oscchain/chain.hpp"
#include "oscchain/greens.hpp"
#include "oscchain/time_domain.hpp"

namespace oscchain::selftest {

namespace {

using cplx = std::complex<double>;

cplx simpson(double a, double b, cplx fa, cplx fm, cplx fb) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

cplx adaptive(const std::function<cplx(double)>& f, double a, double b,
              cplx fa, cplx fm, cplx fb, cplx whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const cplx flm = f(0.5 * (a + m)), frm = f(0.5 * (m + b));
    const cplx left = simpson(a, m, fa, flm, fm);
    const cplx right = simpson(m, b, fm, frm, fb);
    const cplx delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return adaptive(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

cplx integrate_complex(const std::function<cplx(double)>& f, double a,
                       double b, double tol) {
    const cplx fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const cplx whole = simpson(a, b, fa, fm, fb);
    return adaptive(f, a, b, fa, fm, fb, whole, tol, 48);
}

double table_diff(const greens::ComplexTable& a, const greens::ComplexTable& b) {
    double maxdiff = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        maxdiff = std::max(maxdiff, std::abs(a.data[i] - b.data[i]));
        scale = std::max(scale, std::abs(a.data[i]));
    }
    return maxdiff / std::max(scale, 1e-300);
}

// Random spectral points with a safe distance from the band.
cplx random_lambda(std::mt19937_64& rng, double omega0) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double w0sq = omega0 * omega0;
    for (;;) {
        const double re = -w0sq - 8.0 + 16.0 * u(rng);
        const double im = -4.0 + 8.0 * u(rng);
        const cplx lambda(re, im);
        greens::SpectralPoint pt{lambda, 0.0, 0};
        if (pt.band_distance(omega0) > 0.1) return lambda;
    }
}

bool dense_greens_suite(std::ostream& log) {
    std::mt19937_64 rng(20250901);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    for (int trial = 0; trial < 60; ++trial) {
        const double omega0 = 0.5 + 1.5 * u(rng);
        const int N = static_cast<int>(u(rng) * 6.999);
        const cplx lambda = random_lambda(rng, omega0);
        const double sigma = -3.0 + 6.0 * u(rng);
        const auto H = greens::dissipative_greens(lambda, sigma, omega0, N);
        const auto D = greens::dense_helmholtz_inverse(lambda, sigma, omega0, N);
        worst = std::max(worst, table_diff(H, D));
    }
    const bool ok = worst < 1e-12;
    log << (ok ? "PASS" : "FAIL")
        << "  dense Green's-function oracle (worst rel. diff = " << worst
        << ")\n";
    return ok;
}

bool quadrature_suite(std::ostream& log) {
    std::mt19937_64 rng(20250902);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const double omega0 = 0.5 + 1.5 * u(rng);
        const cplx lambda = random_lambda(rng, omega0);
        const int x = static_cast<int>(u(rng) * 4.999);
        const cplx byquad = integrate_complex(
            [&](double s) {
                const double sn = std::sin(M_PI * s);
                return std::cos(2.0 * M_PI * s * x) /
                       (lambda + 4.0 * sn * sn + omega0 * omega0);
            },
            0.0, 1.0, 1e-13);
        const cplx closed = greens::infinite_greens(lambda, x, omega0);
        worst = std::max(worst, std::abs(byquad - closed) /
                                    std::max(std::abs(closed), 1e-300));
    }
    const bool ok = worst < 1e-10;
    log << (ok ? "PASS" : "FAIL")
        << "  lattice resolvent quadrature oracle (worst rel. diff = "
        << worst << ")\n";
    return ok;
}

ChainConfig n0_config() {
    ChainConfig cfg;
    cfg.half_width = 0;
    cfg.omega0 = 1.0;
    cfg.gamma = 0.5;
    cfg.nu = 0.0;
    cfg.theta = 2.0 * M_PI / 2.0;  // omega = 2
    cfg.pin = potentials::zero();
    cfg.coupling = potentials::zero();
    cfg.forcing.modes = {{1, cplx(0.25, 0.0)}};
    return cfg;
}

bool rk4_order_suite(std::ostream& log) {
    const ChainConfig cfg = n0_config();
    const double q0 = 0.3, p0 = -0.1;
    const double tend = 10.0 * cfg.theta;
    double qe, pe;
    timedomain::single_oscillator_exact(cfg, q0, p0, tend, qe, pe);

    auto global_error = [&](int spp) {
        timedomain::IntegratorConfig icfg;
        icfg.steps_per_period = spp;
        icfg.periods = 10;
        ChainState init{{q0}, {p0}, 0.0};
        const auto traj = timedomain::integrate(cfg, init, icfg);
        const ChainState& fin = traj.strobe_states.back();
        return std::hypot(fin.q[0] - qe, fin.p[0] - pe);
    };
    const double e1 = global_error(256);
    const double e2 = global_error(512);
    const double ratio = e1 / e2;
    const bool ok = ratio > 12.0 && ratio < 20.0;
    log << (ok ? "PASS" : "FAIL")
        << "  RK4 order check (halving ratio = " << ratio << ")\n";
    return ok;
}

bool closed_form_suite(std::ostream& log) {
    const ChainConfig cfg = n0_config();
    // steady amplitude F / sqrt((w0^2-w^2)^2 + 4 g^2 w^2) with F = 0.5
    const double amp = 0.5 / std::sqrt(13.0);
    double worst = std::abs(1.0 / std::sqrt(13.0) - 2.0 * amp);

    // closed form versus a fine integration from a generic start
    timedomain::IntegratorConfig icfg;
    icfg.steps_per_period = 4096;
    icfg.periods = 5;
    ChainState init{{0.7}, {0.2}, 0.0};
    const auto traj = timedomain::integrate(cfg, init, icfg);
    for (std::size_t k = 0; k < traj.strobe_states.size(); ++k) {
        double qe, pe;
        timedomain::single_oscillator_exact(cfg, 0.7, 0.2,
                                            traj.strobe_times[k], qe, pe);
        worst = std::max(worst, std::hypot(traj.strobe_states[k].q[0] - qe,
                                           traj.strobe_states[k].p[0] - pe));
    }
    const bool ok = worst < 1e-8;
    log << (ok ? "PASS" : "FAIL")
        << "  N=0 closed forms (worst deviation = " << worst << ")\n";
    return ok;
}

}  // namespace

int run(std::ostream& log) {
    int failures = 0;
    if (!dense_greens_suite(log)) ++failures;
    if (!quadrature_suite(log)) ++failures;
    if (!rk4_order_suite(log)) ++failures;
    if (!closed_form_suite(log)) ++failures;
    return failures;
}

}  // namespace oscchain::selftest
