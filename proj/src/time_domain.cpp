#include "oscchain/time_domain.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>

#include "oscchain/kernels.hpp"

namespace oscchain::timedomain {

namespace {

using RhsFn = std::function<void(double, const double*, double*)>;

// Classic fixed-step RK4 over a flat state vector.
class Rk4 {
  public:
    Rk4(std::size_t dim, RhsFn rhs)
        : dim_(dim), rhs_(std::move(rhs)), k1_(dim), k2_(dim), k3_(dim),
          k4_(dim), tmp_(dim) {}

    void step(double t, double h, double* y) {
        const auto& ops = kernels::active();
        rhs_(t, y, k1_.data());
        ops.xpay(y, 0.5 * h, k1_.data(), tmp_.data(), dim_);
        rhs_(t + 0.5 * h, tmp_.data(), k2_.data());
        ops.xpay(y, 0.5 * h, k2_.data(), tmp_.data(), dim_);
        rhs_(t + 0.5 * h, tmp_.data(), k3_.data());
        ops.xpay(y, h, k3_.data(), tmp_.data(), dim_);
        rhs_(t + h, tmp_.data(), k4_.data());
        ops.axpy(h / 6.0, k1_.data(), y, dim_);
        ops.axpy(h / 3.0, k2_.data(), y, dim_);
        ops.axpy(h / 3.0, k3_.data(), y, dim_);
        ops.axpy(h / 6.0, k4_.data(), y, dim_);
    }

  private:
    std::size_t dim_;
    RhsFn rhs_;
    std::vector<double> k1_, k2_, k3_, k4_, tmp_;
};

bool all_finite(const double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        if (!std::isfinite(y[i])) return false;
    return true;
}

// Tangent map of the force field W at configuration q: out = DW(q) u.
// Tridiagonal; the reflecting boundary differences are constants and drop
// out of the derivative.
void force_jacobian_apply(const ChainConfig& cfg, const double* q,
                          const double* u, double* out, int n) {
    for (int x = 0; x < n; ++x)
        out[x] = cfg.pin.is_zero ? 0.0 : cfg.pin.d2(q[x]) * u[x];
    if (!cfg.coupling.is_zero) {
        for (int x = 0; x + 1 < n; ++x) {
            const double c = cfg.coupling.d2(q[x + 1] - q[x]);
            const double d = c * (u[x + 1] - u[x]);
            out[x] -= d;      // -U''(d_{x+1}) (u_{x+1}-u_x)
            out[x + 1] += d;  // +U''(d_{x+1}) (u_{x+1}-u_x) seen from x+1
        }
    }
}

}  // namespace

void IntegratorConfig::validate() const {
    if (steps_per_period < 256 ||
        (steps_per_period & (steps_per_period - 1)) != 0)
        throw ConfigError(
            "steps_per_period must be a power of two >= 256 so strobe "
            "samples land on period multiples");
    if (periods < 1) throw ConfigError("horizon must be >= 1 period");
}

Trajectory integrate(const ChainConfig& cfg, const ChainState& initial,
                     const IntegratorConfig& icfg, const SampleSink& sink) {
    cfg.validate();
    icfg.validate();
    const int n = cfg.sites();
    if (static_cast<int>(initial.q.size()) != n ||
        static_cast<int>(initial.p.size()) != n)
        throw ConfigError("initial state size does not match the chain");

    // State layout: q | p | work integral | raw boundary-momentum integral.
    const std::size_t dim = 2 * static_cast<std::size_t>(n) + 2;
    std::vector<double> y(dim);
    std::copy(initial.q.begin(), initial.q.end(), y.begin());
    std::copy(initial.p.begin(), initial.p.end(), y.begin() + n);
    y[2 * n] = 0.0;
    y[2 * n + 1] = 0.0;

    RhsFn rhs = [&cfg, n](double t, const double* s, double* ds) {
        std::span<const double> q(s, n), p(s + n, n);
        for (int i = 0; i < n; ++i) ds[i] = p[i];
        eom_accel(cfg, t, q, p, std::span<double>(ds + n, n));
        ds[2 * n] = p[cfg.half_width] * cfg.forcing.value(t, cfg.omega());
        ds[2 * n + 1] = p[0] * p[0] + p[n - 1] * p[n - 1];
    };
    Rk4 stepper(dim, rhs);

    const double h = cfg.theta / icfg.steps_per_period;
    Trajectory traj;
    traj.theta = cfg.theta;
    auto record = [&](double t) {
        ChainState st;
        st.t = t;
        st.q.assign(y.begin(), y.begin() + n);
        st.p.assign(y.begin() + n, y.begin() + 2 * n);
        traj.strobe_times.push_back(t);
        traj.work_in.push_back(y[2 * n]);
        traj.dissipated.push_back(cfg.gamma * y[2 * n + 1]);
        traj.energy.push_back(hamiltonian(st, cfg));
        traj.strobe_states.push_back(std::move(st));
    };
    record(0.0);

    for (int k = 0; k < icfg.periods; ++k) {
        const double t0 = k * cfg.theta;
        for (int j = 0; j < icfg.steps_per_period; ++j) {
            stepper.step(t0 + j * h, h, y.data());
            if (!all_finite(y.data(), dim)) {
                traj.blew_up = true;
                traj.last_finite_time = t0 + j * h;
                throw ConvergenceError(
                    "trajectory blew up at t = " +
                    std::to_string(traj.last_finite_time));
            }
            if (sink) {
                ChainState st;
                st.t = t0 + (j + 1) * h;
                st.q.assign(y.begin(), y.begin() + n);
                st.p.assign(y.begin() + n, y.begin() + 2 * n);
                sink(st);
            }
        }
        record((k + 1) * cfg.theta);
    }
    traj.last_finite_time = traj.strobe_times.back();
    return traj;
}

void single_oscillator_exact(const ChainConfig& cfg, double q0, double p0,
                             double t, double& q, double& p) {
    if (cfg.half_width != 0 || cfg.nu != 0.0)
        throw ConfigError("closed form requires N = 0 and nu = 0");
    if (cfg.forcing.modes.size() != 1 || cfg.forcing.modes[0].m != 1 ||
        std::abs(cfg.forcing.modes[0].amp.imag()) >
            1e-12 * std::abs(cfg.forcing.modes[0].amp))
        throw ConfigError("closed form requires forcing F cos(w t)");
    const double F = 2.0 * cfg.forcing.modes[0].amp.real();
    const double w = cfg.omega(), w0 = cfg.omega0, g = cfg.gamma;
    const double w0sq = w0 * w0, wsq = w * w;
    const double R = (w0sq - wsq) * (w0sq - wsq) + 4.0 * g * g * wsq;

    if (R <= 1e-14 * (w0sq * w0sq + wsq * wsq)) {
        // gamma = 0, w -> w0: resonant limit of (cos wt - cos w0 t)/(w0^2-w^2)
        q = q0 * std::cos(w0 * t) + p0 / w0 * std::sin(w0 * t) +
            F * t * std::sin(w0 * t) / (2.0 * w0);
        p = -q0 * w0 * std::sin(w0 * t) + p0 * std::cos(w0 * t) +
            F * (std::sin(w0 * t) + w0 * t * std::cos(w0 * t)) / (2.0 * w0);
        return;
    }

    const double qs = F * (w0sq - wsq) / R;       // steady position at t = 0
    const double ps = 2.0 * g * wsq * F / R;      // steady momentum at t = 0
    const double qst = F / R * ((w0sq - wsq) * std::cos(w * t) +
                                2.0 * g * w * std::sin(w * t));
    const double pst = F / R * (-w * (w0sq - wsq) * std::sin(w * t) +
                                2.0 * g * wsq * std::cos(w * t));

    const double P = q0 - qs;
    const double Pp = p0 - ps;
    const std::complex<double> s = std::sqrt(std::complex<double>(g * g - w0sq));
    const std::complex<double> st = s * t;
    std::complex<double> ch, shs;  // cosh(st), sinh(st)/s
    if (std::abs(st) < 1e-4) {
        const std::complex<double> z = st * st;
        ch = 1.0 + z * (0.5 + z / 24.0);
        shs = t * (1.0 + z * (1.0 / 6.0 + z / 120.0));
    } else {
        ch = std::cosh(st);
        shs = std::sinh(st) / s;
    }
    const double E = std::exp(-g * t);
    const std::complex<double> hom = E * (P * ch + (g * P + Pp) * shs);
    const std::complex<double> dhom =
        E * (-g * (P * ch + (g * P + Pp) * shs) + P * (s * s) * shs +
             (g * P + Pp) * ch);
    q = qst + hom.real();
    p = pst + dhom.real();
}

std::pair<double, double> single_oscillator_gap(const ChainConfig& cfg) {
    if (cfg.half_width != 0)
        throw ConfigError("single-oscillator gap requires N = 0");
    const double w = cfg.omega(), w0sq = cfg.omega0 * cfg.omega0,
                 g = cfg.gamma;
    auto phi = [&](double m) {
        const double s = (m * w) * (m * w);
        return std::sqrt((w0sq - s) * (w0sq - s) + 4.0 * g * g * s);
    };

    double dstar;
    if (w0sq > 2.0 * g * g) {
        const double mc = std::sqrt(w0sq - 2.0 * g * g) / w;
        const double mflr = std::floor(mc);
        dstar = std::min(phi(mflr), phi(mflr + 1.0));
    } else {
        dstar = w0sq;
    }

    double dbar;
    if (w0sq >= w * w + 2.0 * g * g) {
        const double mc = std::sqrt(w0sq - 2.0 * g * g) / w;  // >= 1
        double modd = std::floor(mc);
        if (std::fmod(modd, 2.0) < 1.0) modd -= 1.0;  // largest odd <= mc
        modd = std::max(modd, 1.0);
        dbar = std::min(phi(modd), phi(modd + 2.0));
    } else {
        dbar = phi(1.0);
    }

    // Brute scan sanity check of both closed forms over m <= 1e6.
    double scan_star = std::numeric_limits<double>::infinity();
    double scan_bar = std::numeric_limits<double>::infinity();
    for (long m = 0; m <= 1000000; ++m) {
        const double v = phi(static_cast<double>(m));
        scan_star = std::min(scan_star, v);
        if (m % 2 == 1) scan_bar = std::min(scan_bar, v);
    }
    if (std::abs(scan_star - dstar) > 1e-10 * (1.0 + dstar) ||
        std::abs(scan_bar - dbar) > 1e-10 * (1.0 + dbar))
        throw OracleError("single-oscillator gap closed form disagrees with scan");
    return {dstar, dbar};
}

Eigen::MatrixXd drift_matrix(const ChainConfig& cfg) {
    const int n = cfg.sites();
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    std::vector<double> unit(n, 0.0), col(n);
    for (int j = 0; j < n; ++j) {
        unit[j] = 1.0;
        neumann_laplacian(std::span<const double>(unit),
                          std::span<double>(col));
        unit[j] = 0.0;
        for (int i = 0; i < n; ++i) A(n + i, j) = col[i];
        A(n + j, j) -= cfg.omega0 * cfg.omega0;
        A(j, n + j) = 1.0;
    }
    A(n, n) -= cfg.gamma;                  // site -N momentum row
    A(2 * n - 1, 2 * n - 1) -= cfg.gamma;  // site +N (same row when N = 0)
    return A;
}

double decay_rate(const Eigen::MatrixXd& A) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(A, /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success)
        throw ConvergenceError("drift matrix eigensolver failed");
    return -es.eigenvalues().real().maxCoeff();
}

ChainState linear_periodic_point(const ChainConfig& cfg) {
    cfg.validate();
    if (cfg.nu != 0.0)
        throw ConfigError("monodromy route is defined for nu = 0");
    if (!(cfg.gamma > 0.0))
        throw ConfigError("singular monodromy: gamma = 0");
    const int n = cfg.sites();
    const int dim = 2 * n;
    const Eigen::MatrixXd A = drift_matrix(cfg);
    const Eigen::MatrixXd Eth = (A * cfg.theta).exp();

    // Gauss-Legendre 4-node panels for int_0^theta e^{A(theta-s)} F(s) ds.
    const int K = 128;
    const double h = cfg.theta / K;
    static const double gx[4] = {-0.8611363115940526, -0.3399810435848563,
                                 0.3399810435848563, 0.8611363115940526};
    static const double gw[4] = {0.3478548451374538, 0.6521451548625461,
                                 0.6521451548625461, 0.3478548451374538};
    Eigen::MatrixXd node_exp[4];
    for (int i = 0; i < 4; ++i) {
        const double c = 0.5 * (1.0 + gx[i]);
        node_exp[i] = (A * ((1.0 - c) * h)).exp();
    }
    const Eigen::MatrixXd step = (A * h).exp();

    Eigen::VectorXd P = Eigen::VectorXd::Zero(dim);
    Eigen::MatrixXd acc = Eigen::MatrixXd::Identity(dim, dim);
    // acc = e^{A (K-1-j) h}, starting from the last panel.
    for (int j = K - 1; j >= 0; --j) {
        Eigen::VectorXd vj = Eigen::VectorXd::Zero(dim);
        for (int i = 0; i < 4; ++i) {
            const double c = 0.5 * (1.0 + gx[i]);
            const double s = (j + c) * h;
            Eigen::VectorXd f = Eigen::VectorXd::Zero(dim);
            f(n + cfg.half_width) = cfg.forcing.value(s, cfg.omega());
            vj += (0.5 * gw[i] * h) * (node_exp[i] * f);
        }
        P += acc * vj;
        if (j > 0) acc = acc * step;
    }

    const Eigen::MatrixXd M = Eigen::MatrixXd::Identity(dim, dim) - Eth;
    Eigen::VectorXd z = Eigen::PartialPivLU<Eigen::MatrixXd>(M).solve(P);
    ChainState st;
    st.t = 0.0;
    st.q.assign(z.data(), z.data() + n);
    st.p.assign(z.data() + n, z.data() + dim);
    return st;
}

ChainState flow_with_monodromy(const ChainConfig& cfg, const ChainState& z0,
                               const IntegratorConfig& icfg,
                               Eigen::MatrixXd* monodromy) {
    cfg.validate();
    icfg.validate();
    const int n = cfg.sites();
    const int dim = 2 * n;
    const bool want_mono = monodromy != nullptr;
    const std::size_t total = want_mono
                                  ? static_cast<std::size_t>(dim) * (1 + dim)
                                  : static_cast<std::size_t>(dim);
    std::vector<double> y(total, 0.0);
    std::copy(z0.q.begin(), z0.q.end(), y.begin());
    std::copy(z0.p.begin(), z0.p.end(), y.begin() + n);
    if (want_mono)
        for (int c = 0; c < dim; ++c) y[dim + c * dim + c] = 1.0;

    std::vector<double> dwu(n);
    RhsFn rhs = [&](double t, const double* s, double* ds) {
        std::span<const double> q(s, n), p(s + n, n);
        for (int i = 0; i < n; ++i) ds[i] = p[i];
        eom_accel(cfg, t, q, p, std::span<double>(ds + n, n));
        if (!want_mono) return;
        // Variational columns: dPhi = J(t, q) Phi with
        // J = [[0, I], [Delta - w0^2 - nu DW(q), -gamma E]].
        for (int c = 0; c < dim; ++c) {
            const double* u = s + dim + c * dim;    // column: (uq, up)
            double* du = ds + dim + c * dim;
            for (int i = 0; i < n; ++i) du[i] = u[n + i];
            neumann_laplacian(std::span<const double>(u, n),
                              std::span<double>(du + n, n));
            for (int i = 0; i < n; ++i)
                du[n + i] -= cfg.omega0 * cfg.omega0 * u[i];
            if (cfg.nu != 0.0) {
                force_jacobian_apply(cfg, s, u, dwu.data(), n);
                for (int i = 0; i < n; ++i) du[n + i] -= cfg.nu * dwu[i];
            }
            du[n] -= cfg.gamma * u[n];
            du[2 * n - 1] -= cfg.gamma * u[2 * n - 1];
        }
    };

    Rk4 stepper(total, rhs);
    const double h = cfg.theta / icfg.steps_per_period;
    for (int k = 0; k < icfg.periods; ++k) {
        const double t0 = k * cfg.theta;
        for (int j = 0; j < icfg.steps_per_period; ++j)
            stepper.step(t0 + j * h, h, y.data());
    }
    if (!all_finite(y.data(), total))
        throw ConvergenceError("variational flow blew up");

    if (want_mono) {
        monodromy->resize(dim, dim);
        for (int c = 0; c < dim; ++c)
            for (int r = 0; r < dim; ++r)
                (*monodromy)(r, c) = y[dim + c * dim + r];
    }
    ChainState out;
    out.t = icfg.periods * cfg.theta;
    out.q.assign(y.begin(), y.begin() + n);
    out.p.assign(y.begin() + n, y.begin() + dim);
    return out;
}

std::vector<double> stroboscopic_distance(
    const Trajectory& traj, const spectral::PeriodicSolution& sol) {
    const ChainState ref = spectral::solution_state(sol, 0.0);
    std::vector<double> d;
    d.reserve(traj.strobe_states.size());
    std::vector<double> dq(ref.q.size()), dp(ref.q.size());
    for (const ChainState& st : traj.strobe_states) {
        for (std::size_t i = 0; i < ref.q.size(); ++i) {
            dq[i] = st.q[i] - ref.q[i];
            dp[i] = st.p[i] - ref.p[i];
        }
        d.push_back(site_norm(dq) + site_norm(dp));
    }
    return d;
}

ChainState newton_periodic(const ChainConfig& cfg, const ChainState& guess,
                           double tol, const IntegratorConfig& icfg) {
    cfg.validate();
    if (!(cfg.gamma > 0.0))
        throw ConfigError("period-map Newton requires gamma > 0");
    const int n = cfg.sites();
    const int dim = 2 * n;
    IntegratorConfig one = icfg;
    one.periods = 1;

    ChainState z = guess;
    z.t = 0.0;
    for (int it = 0; it < 60; ++it) {
        Eigen::MatrixXd M;
        const ChainState Pz = flow_with_monodromy(cfg, z, one, &M);
        Eigen::VectorXd G(dim);
        for (int i = 0; i < n; ++i) {
            G(i) = Pz.q[i] - z.q[i];
            G(n + i) = Pz.p[i] - z.p[i];
        }
        if (G.norm() < tol) return z;
        Eigen::MatrixXd J = M - Eigen::MatrixXd::Identity(dim, dim);
        Eigen::FullPivLU<Eigen::MatrixXd> lu(J);
        if (!lu.isInvertible())
            throw ConvergenceError(
                "singular period-map Jacobian (I - monodromy not invertible)");
        const Eigen::VectorXd delta = lu.solve(-G);
        for (int i = 0; i < n; ++i) {
            z.q[i] += delta(i);
            z.p[i] += delta(n + i);
        }
        if (!all_finite(z.q.data(), n) || !all_finite(z.p.data(), n))
            throw ConvergenceError("Newton iterate left the finite domain");
    }
    throw ConvergenceError("period-map Newton did not converge");
}

}  // namespace oscchain::timedomain
