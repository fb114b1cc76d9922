#include "oscchain/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace oscchain::diagnostics {

double work_per_period(const spectral::PeriodicSolution& sol) {
    const double w = sol.cfg.omega();
    double work = 0.0;
    for (const auto& mode : sol.cfg.forcing.modes) {
        const cplx z = std::conj(mode.amp) * sol.field.get(0, mode.m);
        work += -2.0 * mode.m * w * z.imag();
    }
    return work;
}

std::pair<double, double> boundary_dissipation_split(
    const spectral::PeriodicSolution& sol) {
    const double w = sol.cfg.omega();
    const int N = sol.cfg.half_width;
    double left = 0.0, right = 0.0;
    for (int m = 1; m <= sol.field.max_harmonic; ++m) {
        const double wt = 2.0 * (m * w) * (m * w);
        left += wt * std::norm(sol.field.get(-N, m));
        right += wt * std::norm(sol.field.get(N, m));
    }
    return {sol.cfg.gamma * left, sol.cfg.gamma * right};
}

double boundary_dissipation(const spectral::PeriodicSolution& sol) {
    const auto [l, r] = boundary_dissipation_split(sol);
    return l + r;
}

double energy_balance_residual(const spectral::PeriodicSolution& sol) {
    const double theta = sol.cfg.theta;
    return std::abs(theta * boundary_dissipation(sol) -
                    theta * work_per_period(sol));
}

double energy_balance_residual(const timedomain::Trajectory& traj) {
    double worst = 0.0;
    const double h0 = traj.energy.front();
    for (std::size_t k = 0; k < traj.energy.size(); ++k)
        worst = std::max(worst, std::abs(traj.energy[k] - h0 +
                                         traj.dissipated[k] - traj.work_in[k]));
    return worst;
}

namespace {

struct LineFit {
    double intercept = 0.0, slope = 0.0, r2 = 1.0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
        syy += y[i] * y[i];
    }
    LineFit f;
    const double denom = n * sxx - sx * sx;
    f.slope = (n * sxy - sx * sy) / denom;
    f.intercept = (sy - f.slope * sx) / n;
    const double sstot = syy - sy * sy / n;
    double ssres = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double e = y[i] - (f.intercept + f.slope * x[i]);
        ssres += e * e;
    }
    f.r2 = sstot > 0.0 ? 1.0 - ssres / sstot : 1.0;
    return f;
}

}  // namespace

DecayFit decay_fit(const spectral::PeriodicSolution& sol) {
    const int N = sol.cfg.half_width;
    if (N < 8) throw ConfigError("decay fit needs N >= 8");
    const HarmonicField& f = sol.field;
    const int n = f.sites();
    const int T = f.grid_size;

    std::vector<double> times(T);
    for (int k = 0; k < T; ++k) times[k] = sol.cfg.theta * k / T;
    const spectral::TimeSamples samples =
        spectral::synthesize(f, sol.cfg.theta, times);

    DecayFit fit;
    fit.profile_q.resize(n);
    fit.profile_p.resize(n);
    const double w = sol.cfg.omega();
    for (int i = 0; i < n; ++i) {
        double mx = 0.0;
        for (int k = 0; k < T; ++k)
            mx = std::max(mx, std::abs(samples.qs(i, k)));
        fit.profile_q[i] = mx;
        double psum = 0.0;
        for (int m = 1; m <= f.max_harmonic; ++m)
            psum += 2.0 * (m * w) * (m * w) * std::norm(f.get(i - N, m));
        fit.profile_p[i] = sol.cfg.theta * psum;  // int_0^theta p_x^2 dt
    }

    std::vector<double> xs, yq, yp;
    bool any = false;
    for (int x = -N + 2; x <= N - 2; ++x) {
        if (std::abs(x) < 2) continue;
        const double pq = fit.profile_q[x + N], pp = fit.profile_p[x + N];
        if (pq < 1e-300 || pp < 1e-300) continue;
        any = true;
        xs.push_back(std::abs(x));
        yq.push_back(std::log(pq));
        yp.push_back(std::log(pp));
    }
    if (!any || xs.size() < 4)
        throw ConvergenceError("degenerate decay profile (underflow guard)");

    const LineFit lq = fit_line(xs, yq);
    const LineFit lp = fit_line(xs, yp);
    fit.amplitude_q = std::exp(lq.intercept);
    fit.rate_q = -lq.slope;
    fit.r2_q = lq.r2;
    fit.amplitude_p = std::exp(lp.intercept);
    fit.rate_p = -lp.slope;
    fit.r2_p = lp.r2;
    return fit;
}

double mean_hamiltonian(const spectral::PeriodicSolution& sol) {
    const HarmonicField& f = sol.field;
    const ChainConfig& cfg = sol.cfg;
    const int n = f.sites();
    const double w = cfg.omega();

    double kin = 0.0, bond = 0.0;
    for (int m = 1; m <= f.max_harmonic; ++m) {
        const double msq = (m * w) * (m * w);
        for (int i = 0; i < n; ++i)
            kin += 2.0 * msq * std::norm(f.row(m)[i]);
    }
    for (int m = 0; m <= f.max_harmonic; ++m) {
        const double mult = (m == 0) ? 1.0 : 2.0;
        for (int i = 1; i < n; ++i)
            bond += mult * std::norm(f.row(m)[i] - f.row(m)[i - 1]);
    }
    double mean = 0.5 * kin + 0.5 * bond +
                  0.5 * cfg.omega0 * cfg.omega0 * l2_norm_sq(f);

    if (cfg.nu != 0.0 && (!cfg.pin.is_zero || !cfg.coupling.is_zero)) {
        const int T = f.grid_size;
        std::vector<double> times(T);
        for (int k = 0; k < T; ++k) times[k] = cfg.theta * k / T;
        const spectral::TimeSamples s = spectral::synthesize(f, cfg.theta, times);
        double pot = 0.0;
        for (int k = 0; k < T; ++k) {
            double v = 0.0;
            for (int i = 0; i < n; ++i) v += cfg.pin.energy(s.qs(i, k));
            if (!cfg.coupling.is_zero) {
                v += cfg.coupling.energy(0.0);  // ghost bond
                for (int i = 1; i < n; ++i)
                    v += cfg.coupling.energy(s.qs(i, k) - s.qs(i - 1, k));
            }
            pot += v;
        }
        mean += cfg.nu * pot / T;
    }
    return mean;
}

std::vector<ScanRow> size_scan(const ChainConfig& base,
                               std::span<const int> sizes,
                               const spectral::SolverOptions& opts) {
    std::vector<ScanRow> rows;
    for (int N : sizes) {
        ChainConfig cfg = base;
        cfg.half_width = N;
        auto [sol, rep] = spectral::fixed_point_solve(cfg, opts);
        ScanRow row;
        row.half_width = N;
        row.work = work_per_period(sol);
        row.dissipation = boundary_dissipation(sol);
        row.balance_residual = energy_balance_residual(sol);
        row.mean_energy = mean_hamiltonian(sol);
        row.decay_rate = std::numeric_limits<double>::quiet_NaN();
        if (N >= 8) row.decay_rate = decay_fit(sol).rate_q;
        row.stability_rate = timedomain::decay_rate(timedomain::drift_matrix(cfg));
        row.rate_shape = row.stability_rate * std::pow(N, 3);
        rows.push_back(row);
    }
    return rows;
}

bool work_localizes(std::span<const ScanRow> rows) {
    if (rows.size() < 2) return false;
    bool trend = rows.front().work > 0.0;
    // the site-evaluated work has an absolute rounding floor, so the
    // strict comparison applies to the resolvable prefix
    for (std::size_t i = 1; i < rows.size(); ++i)
        if (rows[i - 1].work > 1e-12 && rows[i].work > 1e-12 &&
            rows[i].work >= rows[i - 1].work)
            trend = false;
    return trend && std::abs(rows.back().work) < 0.1 * rows.front().work;
}

bool mean_energy_saturates(std::span<const ScanRow> rows) {
    if (rows.empty()) return false;
    double maxE = 0.0;
    for (const ScanRow& r : rows) maxE = std::max(maxE, r.mean_energy);
    return maxE <= 1.05 * rows.back().mean_energy;
}

DiagnosticsReport build_report(const spectral::PeriodicSolution& sol,
                               std::span<const int> scan_sizes,
                               const spectral::SolverOptions& opts) {
    DiagnosticsReport rep;
    rep.half_width = sol.cfg.half_width;
    rep.nu = sol.cfg.nu;
    const spectral::CouplingRadius r = spectral::coupling_radius(sol.cfg);
    rep.delta_star = r.delta_star;
    rep.delta_bar = r.delta_bar;
    rep.nu0 = r.nu0;
    rep.nu0_bar = r.nu0_bar;
    if (sol.cfg.half_width == 0)
        rep.oscillator_gaps = timedomain::single_oscillator_gap(sol.cfg);
    rep.work = work_per_period(sol);
    const auto [l, rr] = boundary_dissipation_split(sol);
    rep.dissipation_left = l;
    rep.dissipation_right = rr;
    rep.balance_residual = energy_balance_residual(sol);
    rep.even_residual = spectral::even_harmonic_residual(sol);
    rep.mean_energy = mean_hamiltonian(sol);
    if (sol.cfg.half_width >= 8) rep.decay = decay_fit(sol);
    if (!scan_sizes.empty()) rep.scan = size_scan(sol.cfg, scan_sizes, opts);
    return rep;
}

}  // namespace oscchain::diagnostics
