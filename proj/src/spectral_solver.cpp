#include "oscchain/spectral_solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>

#include "oscchain/kernels.hpp"

namespace oscchain::spectral {

namespace {

int scan_limit(const ChainConfig& cfg) {
    return static_cast<int>(std::ceil(cfg.band_top() / cfg.omega())) + 1;
}

}  // namespace

double resonance_gap(const ChainConfig& cfg) {
    const double w = cfg.omega();
    double best = std::numeric_limits<double>::infinity();
    const int mmax = scan_limit(cfg);
    for (int m = 0; m <= mmax; ++m)
        best = std::min(best, greens::band_distance(cfg.omega0, (m * w) * (m * w)));
    return best;
}

double odd_resonance_gap(const ChainConfig& cfg) {
    const double w = cfg.omega();
    double best = std::numeric_limits<double>::infinity();
    const int mmax = scan_limit(cfg) + 2;
    for (int m = 1; m <= mmax; m += 2)
        best = std::min(best, greens::band_distance(cfg.omega0, (m * w) * (m * w)));
    return best;
}

CouplingRadius coupling_radius(const ChainConfig& cfg) {
    CouplingRadius r;
    r.delta_star = resonance_gap(cfg);
    r.delta_bar = odd_resonance_gap(cfg);
    const double curv = cfg.curvature_bound();
    if (curv <= 0.0) {
        r.unbounded = true;
        r.nu0 = std::numeric_limits<double>::infinity();
        r.nu0_bar = std::numeric_limits<double>::infinity();
    } else {
        r.nu0 = r.delta_star / curv;
        r.nu0_bar = r.delta_bar / curv;
    }
    return r;
}

HarmonicField harmonic_base_solution(const ChainConfig& cfg,
                                     const greens::GreensKernelSet& kernels,
                                     int max_harmonic, int grid_size) {
    if (cfg.forcing.max_mode() > kernels.max_harmonic ||
        cfg.forcing.max_mode() > max_harmonic)
        throw ConfigError("kernel set does not cover all forced harmonics");
    HarmonicField f =
        HarmonicField::zeros(cfg.half_width, max_harmonic, grid_size);
    const int N = cfg.half_width;
    for (const auto& mode : cfg.forcing.modes) {
        const greens::ComplexTable& H = kernels.table(mode.m);
        cplx* row = f.row(mode.m);
        for (int x = -N; x <= N; ++x) row[x + N] = mode.amp * H.at(x, 0);
    }
    return f;
}

HarmonicField nonlinearity_harmonics(const HarmonicField& Q,
                                     const ChainConfig& cfg,
                                     const Collocation& colloc) {
    const int M = Q.max_harmonic;
    const int T = colloc.grid_size();
    if (T < 8 * (2 * M + 1))
        throw ConfigError("collocation grid violates the anti-aliasing margin");
    const int n = Q.sites();
    HarmonicField out = HarmonicField::zeros(Q.half_width, M, Q.grid_size);
    if (cfg.pin.is_zero && cfg.coupling.is_zero) return out;

    std::vector<double> grid(static_cast<std::size_t>(n) * T);
    std::vector<cplx> scratch(M + 1);
    for (int i = 0; i < n; ++i) {
        for (int m = 0; m <= M; ++m) scratch[m] = Q.row(m)[i];
        colloc.synthesize(scratch, M,
                          std::span<double>(grid.data() + static_cast<std::size_t>(i) * T, T));
    }

    std::vector<double> v(static_cast<std::size_t>(n) * T);
    // v = -W pointwise: -V'(f_x) + U'(f_{x+1}-f_x) - U'(f_x-f_{x-1}),
    // with zero boundary differences from the reflecting extension.
    if (!cfg.pin.is_zero) {
        for (std::size_t j = 0; j < v.size(); ++j) v[j] = -cfg.pin.deriv1(grid[j]);
    }
    if (!cfg.coupling.is_zero) {
        const double u0 = cfg.coupling.deriv1(0.0);
        std::vector<double> left(T, u0), right(T);
        for (int i = 0; i < n; ++i) {
            const double* gi = grid.data() + static_cast<std::size_t>(i) * T;
            double* vi = v.data() + static_cast<std::size_t>(i) * T;
            if (i + 1 < n) {
                const double* gn = gi + T;
                for (int k = 0; k < T; ++k)
                    right[k] = cfg.coupling.deriv1(gn[k] - gi[k]);
            } else {
                std::fill(right.begin(), right.end(), u0);
            }
            for (int k = 0; k < T; ++k) vi[k] += right[k] - left[k];
            std::swap(left, right);
        }
    }

    for (int i = 0; i < n; ++i) {
        colloc.analyze(
            std::span<const double>(v.data() + static_cast<std::size_t>(i) * T, T),
            M, scratch);
        for (int m = 0; m <= M; ++m) out.row(m)[i] = scratch[m];
    }
    return out;
}

HarmonicField apply_kernels(const greens::GreensKernelSet& kernels,
                            const HarmonicField& v, bool odd_only) {
    const int n = v.sites();
    HarmonicField out = HarmonicField::zeros(v.half_width, v.max_harmonic,
                                             v.grid_size);
    for (int m = 0; m <= v.max_harmonic; ++m) {
        if (odd_only && m % 2 == 0) continue;
        kernels::cmatvec(kernels.table(m).data.data(), v.row(m), out.row(m),
                         static_cast<std::size_t>(n));
    }
    return out;
}

double harmonic_defect(const HarmonicField& field, const ChainConfig& cfg) {
    const int n = field.sites();
    const int N = cfg.half_width;
    const int M = field.max_harmonic;
    const double w = cfg.omega();
    const double w0sq = cfg.omega0 * cfg.omega0;

    HarmonicField vtil = HarmonicField::zeros(N, M, field.grid_size);
    if (cfg.nu != 0.0 && !(cfg.pin.is_zero && cfg.coupling.is_zero)) {
        Collocation colloc(field.grid_size);
        vtil = nonlinearity_harmonics(field, cfg, colloc);
    }

    std::vector<cplx> lap(n), res(n);
    double sum = 0.0;
    for (int m = 0; m <= M; ++m) {
        const cplx* row = field.row(m);
        neumann_laplacian(std::span<const cplx>(row, n),
                          std::span<cplx>(lap.data(), n));
        const double msq = (m * w) * (m * w);
        const cplx fric{0.0, -cfg.gamma * m * w};
        for (int i = 0; i < n; ++i)
            res[i] = (msq - w0sq) * row[i] + lap[i] + cfg.nu * vtil.row(m)[i];
        res[0] += fric * row[0];
        res[n - 1] += fric * row[n - 1];
        res[N] += cfg.forcing.coeff(m);
        const double part = kernels::active().sum_sq_c(res.data(), n);
        sum += (m == 0) ? part : 2.0 * part;
    }
    double fscale_sq = 0.0;
    for (const auto& mode : cfg.forcing.modes)
        fscale_sq += 2.0 * std::norm(mode.amp);
    return std::sqrt(sum) / std::max(std::sqrt(fscale_sq), 1e-300);
}

SeriesSolver::SeriesSolver(const ChainConfig& cfg,
                           const greens::GreensKernelSet& kernels,
                           int max_harmonic, int grid_size, bool odd_projection)
    : cfg_(cfg),
      kernels_(kernels),
      colloc_(grid_size),
      odd_projection_(odd_projection) {
    orders_.push_back(
        harmonic_base_solution(cfg, kernels, max_harmonic, grid_size));
    partial_ = orders_.front();
    norms_.push_back(l2_norm(partial_));
    prev_nonlin_ =
        HarmonicField::zeros(cfg.half_width, max_harmonic, grid_size);
}

SeriesSolver::~SeriesSolver() = default;

double SeriesSolver::step() {
    const int L = current_order() + 1;
    HarmonicField cur = nonlinearity_harmonics(partial_, cfg_, colloc_);
    HarmonicField v = cur;
    add_scaled(v, -1.0, prev_nonlin_);
    if (L >= 2) {
        if (cfg_.nu == 0.0) {
            std::fill(v.coeff.begin(), v.coeff.end(), cplx(0.0, 0.0));
        } else {
            const double inv = 1.0 / nu_pow_;  // nu_pow_ = nu^(L-1) here
            for (cplx& c : v.coeff) c *= inv;
        }
    }
    HarmonicField qL = apply_kernels(kernels_, v, odd_projection_);
    nu_pow_ *= cfg_.nu;
    add_scaled(partial_, nu_pow_, qL);
    norms_.push_back(l2_norm(qL));
    orders_.push_back(std::move(qL));
    prev_nonlin_ = std::move(cur);
    return std::abs(nu_pow_) * norms_.back();
}

namespace {

struct GateDecision {
    bool project = false;
    double radius_eff = 0.0;  // 0 = unbounded
    std::string note;
};

GateDecision gate(const ChainConfig& cfg, const CouplingRadius& r,
                  bool hard_error) {
    GateDecision g;
    if (r.delta_star <= 0.0) {
        // name the resonant harmonic
        const double w = cfg.omega();
        const int mmax =
            static_cast<int>(std::ceil(cfg.band_top() / w)) + 1;
        for (int m = 0; m <= mmax; ++m)
            if (greens::band_distance(cfg.omega0, (m * w) * (m * w)) <= 0.0)
                throw ResonanceError(
                    "resonant forcing: m*omega lies in the band "
                    "[omega0, omega_u] at m = " + std::to_string(m),
                    m);
    }
    const double anu = std::abs(cfg.nu);
    if (r.unbounded || anu == 0.0) {
        g.radius_eff = r.unbounded ? 0.0 : r.nu0;
        return g;
    }
    if (anu < r.nu0) {
        g.radius_eff = r.nu0;
        return g;
    }
    if (cfg.odd_mode_hypothesis() && anu < r.nu0_bar) {
        g.project = true;
        g.radius_eff = r.nu0_bar;
        g.note =
            "warning: |nu| >= nu0; proceeding in the odd-harmonic subspace "
            "(even potentials, odd forcing)";
        return g;
    }
    if (hard_error)
        throw ResonanceError(
            "|nu| outside the convergence radius (nu0 = " +
            std::to_string(r.nu0) + ", odd-mode nu0 = " +
            std::to_string(r.nu0_bar) + ")");
    g.radius_eff = 0.0;
    g.note = "warning: |nu| outside guaranteed contraction; iterating with "
             "divergence detection";
    return g;
}

double top_octave_fraction(const HarmonicField& f) {
    const auto& ops = kernels::active();
    const int n = f.sites();
    const double total = l2_norm_sq(f);
    if (total <= 0.0) return 0.0;
    double top = 0.0;
    for (int m = f.max_harmonic / 2 + 1; m <= f.max_harmonic; ++m)
        top += 2.0 * ops.sum_sq_c(f.row(m), n);
    return top / total;
}

void run_series(const ChainConfig& cfg, const greens::GreensKernelSet& kernels,
                int M, int T, const SolverOptions& opts,
                const GateDecision& g, HarmonicField& out,
                ConvergenceReport& rep) {
    SeriesSolver solver(cfg, kernels, M, T, g.project);
    rep.method = "series";
    rep.norms = {solver.order_norm(0)};
    const double nu_hat =
        (g.radius_eff > 0.0) ? std::abs(cfg.nu) / g.radius_eff : 0.0;

    if (cfg.nu == 0.0) {
        out = solver.partial_sum();
        rep.iterations = 0;
        rep.tail_bound = 0.0;
        rep.final_residual = harmonic_defect(out, cfg);
        rep.converged = rep.final_residual <= 10.0 * opts.tol;
        if (!rep.converged)
            throw ConvergenceError("base solution defect above tolerance");
        return;
    }

    for (int L = 1; L <= opts.max_order; ++L) {
        const double increment = solver.step();
        rep.norms.push_back(solver.order_norm(L));
        rep.ratios.push_back(solver.order_norm(L) /
                             std::max(solver.order_norm(L - 1), 1e-300));
        double tail = 0.0;
        if (nu_hat > 0.0 && nu_hat < 1.0)
            tail = std::pow(nu_hat, L + 1) * solver.order_norm(0) /
                   (1.0 - nu_hat);
        const bool candidate =
            (nu_hat > 0.0 && nu_hat < 1.0 && tail <= opts.tol) ||
            increment <= opts.tol;
        if (!candidate) continue;
        const double defect = harmonic_defect(solver.partial_sum(), cfg);
        if (defect <= 10.0 * opts.tol) {
            out = solver.partial_sum();
            rep.iterations = L;
            rep.tail_bound = tail;
            rep.final_residual = defect;
            rep.converged = true;
            return;
        }
    }
    throw ConvergenceError("series did not converge within the order limit");
}

HarmonicField random_probe(const HarmonicField& around, double amp,
                           std::mt19937_64& rng) {
    std::normal_distribution<double> dist(0.0, 1.0);
    HarmonicField f = around;
    const int n = f.sites();
    for (int i = 0; i < n; ++i) f.row(0)[i] += amp * dist(rng);  // m=0 stays real
    for (int m = 1; m <= f.max_harmonic; ++m)
        for (int i = 0; i < n; ++i)
            f.row(m)[i] += amp * cplx(dist(rng), dist(rng));
    return f;
}

void run_fixed(const ChainConfig& cfg, const greens::GreensKernelSet& kernels,
               int M, int T, const SolverOptions& opts, const GateDecision& g,
               HarmonicField& out, ConvergenceReport& rep) {
    Collocation colloc(T);
    rep.method = "fixed-point";
    const HarmonicField base =
        harmonic_base_solution(cfg, kernels, M, T);
    auto map = [&](const HarmonicField& f) {
        if (cfg.nu == 0.0) return base;
        HarmonicField Tf = base;
        HarmonicField kv = apply_kernels(
            kernels, nonlinearity_harmonics(f, cfg, colloc), g.project);
        add_scaled(Tf, cfg.nu, kv);
        return Tf;
    };

    HarmonicField f = base;
    rep.norms = {l2_norm(f)};
    double inc_prev = std::numeric_limits<double>::infinity();
    int grow = 0;
    double tol_inc = opts.tol;
    bool done = false;
    for (int it = 1; it <= opts.max_iterations; ++it) {
        HarmonicField Tf = map(f);
        const double inc = l2_distance(Tf, f);
        f = std::move(Tf);
        rep.norms.push_back(l2_norm(f));
        if (std::isfinite(inc_prev) && inc_prev > 0.0)
            rep.ratios.push_back(inc / inc_prev);
        rep.iterations = it;
        if (!std::isfinite(inc) ||
            rep.norms.back() > 1e12 * (1.0 + rep.norms.front()))
            throw ConvergenceError("fixed-point iteration blew up");
        grow = (inc > inc_prev) ? grow + 1 : 0;
        if (grow >= 5)
            throw ConvergenceError(
                "divergence: increment grew over 5 consecutive iterations");
        inc_prev = inc;
        if (inc <= tol_inc) {
            const double defect = harmonic_defect(f, cfg);
            if (defect <= 10.0 * opts.tol) {
                rep.final_residual = defect;
                rep.converged = true;
                done = true;
                break;
            }
            if (inc <= 1e-3 * std::numeric_limits<double>::epsilon() *
                           std::max(1.0, rep.norms.back()))
                throw ConvergenceError(
                    "iteration stagnated before reaching the defect target");
            tol_inc *= 0.25;
        }
    }
    if (!done)
        throw ConvergenceError(
            "fixed-point iteration did not converge within the limit");

    // Contraction probe on a random pair near the solution; only meaningful
    // inside the guaranteed radius.
    if (cfg.nu != 0.0 && g.radius_eff > 0.0 && !g.project &&
        std::abs(cfg.nu) < g.radius_eff) {
        std::mt19937_64 rng(opts.seed);
        const double amp = 1e-6 * std::max(1.0, rep.norms.back());
        HarmonicField f1 = random_probe(f, amp, rng);
        HarmonicField f2 = random_probe(f, amp, rng);
        const double df = l2_distance(f2, f1);
        if (df > 0.0)
            rep.contraction_measured = l2_distance(map(f2), map(f1)) / df;
    }
    out = std::move(f);
}

std::pair<PeriodicSolution, ConvergenceReport> solve_impl(
    const ChainConfig& cfg, const SolverOptions& opts, bool series) {
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();
    const CouplingRadius radius = coupling_radius(cfg);
    const GateDecision g = gate(cfg, radius, /*hard_error=*/series);

    const int MF = cfg.forcing.max_mode();
    int M = opts.max_harmonic > 0 ? opts.max_harmonic
                                  : std::max(4 * MF, 16);
    if (M < MF)
        throw ConfigError("max_harmonic override below the forcing bandwidth");

    HarmonicField field;
    ConvergenceReport rep;
    for (;;) {
        const int T = opts.grid_size > 0 ? opts.grid_size
                                         : collocation_grid_size(M);
        if (T < 8 * (2 * M + 1))
            throw ConfigError("grid_size violates the anti-aliasing margin");
        greens::GreensKernelSet kernels = greens::build_kernel_set(cfg, M);
        rep = ConvergenceReport{};
        if (series)
            run_series(cfg, kernels, M, T, opts, g, field, rep);
        else
            run_fixed(cfg, kernels, M, T, opts, g, field, rep);
        rep.max_harmonic = M;
        rep.grid_size = T;
        if (opts.max_harmonic > 0 || top_octave_fraction(field) < 1e-12) break;
        M *= 2;
        if (M > 2048)
            throw ConvergenceError(
                "harmonic truncation did not saturate below M = 2048");
    }
    rep.delta_star = radius.delta_star;
    rep.nu0 = radius.nu0;
    rep.nu0_bar = radius.nu0_bar;
    rep.solution_norm = l2_norm(field);
    rep.solution_norm_h1 = sobolev_norm(field, cfg.omega(), 1);
    rep.odd_projection = g.project;
    rep.note = g.note;
    rep.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    return {PeriodicSolution{cfg, std::move(field)}, std::move(rep)};
}

}  // namespace

std::pair<PeriodicSolution, ConvergenceReport> series_solve(
    const ChainConfig& cfg, const SolverOptions& opts) {
    return solve_impl(cfg, opts, true);
}

std::pair<PeriodicSolution, ConvergenceReport> fixed_point_solve(
    const ChainConfig& cfg, const SolverOptions& opts) {
    return solve_impl(cfg, opts, false);
}

TimeSamples synthesize(const HarmonicField& field, double theta,
                       std::span<const double> times) {
    const int n = field.sites();
    const int M = field.max_harmonic;
    const double w = 2.0 * M_PI / theta;
    TimeSamples s;
    s.sites = n;
    s.count = static_cast<int>(times.size());
    s.q.assign(static_cast<std::size_t>(n) * s.count, 0.0);
    s.p.assign(static_cast<std::size_t>(n) * s.count, 0.0);
    for (int k = 0; k < s.count; ++k) {
        const cplx e1 = std::polar(1.0, w * times[k]);
        for (int i = 0; i < n; ++i) {
            cplx e{1.0, 0.0};
            double q = field.row(0)[i].real();
            double p = 0.0;
            for (int m = 1; m <= M; ++m) {
                e *= e1;
                const cplx ce = field.row(m)[i] * e;
                q += 2.0 * ce.real();
                p += -2.0 * m * w * ce.imag();
            }
            s.q[static_cast<std::size_t>(i) * s.count + k] = q;
            s.p[static_cast<std::size_t>(i) * s.count + k] = p;
        }
    }
    return s;
}

ChainState solution_state(const PeriodicSolution& sol, double t) {
    const double tt[1] = {t};
    TimeSamples s = synthesize(sol.field, sol.cfg.theta, tt);
    ChainState st;
    st.t = t;
    st.q.resize(s.sites);
    st.p.resize(s.sites);
    for (int i = 0; i < s.sites; ++i) {
        st.q[i] = s.qs(i, 0);
        st.p[i] = s.ps(i, 0);
    }
    return st;
}

double even_harmonic_residual(const PeriodicSolution& sol) {
    const HarmonicField& f = sol.field;
    const double norm = l2_norm(f);
    if (norm <= 0.0) return 0.0;
    double worst = 0.0;
    for (int m = 2; m <= f.max_harmonic; m += 2) {
        const cplx* row = f.row(m);
        for (int i = 0; i < f.sites(); ++i)
            worst = std::max(worst, std::abs(row[i]));
    }
    return worst / norm;
}

}  // namespace oscchain::spectral
