#include "oscchain/chain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "oscchain/kernels.hpp"

namespace oscchain {

namespace {

// Adaptive Simpson quadrature; used to recover potential values from the
// stored first derivative when no closed form is attached.
double simpson(double a, double b, double fa, double fm, double fb) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double fa, double fm, double fb, double whole,
                        double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = simpson(a, m, fa, flm, fm);
    const double right = simpson(m, b, fm, frm, fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double integrate_derivative(const std::function<double(double)>& f, double q) {
    if (q == 0.0) return 0.0;
    const double a = 0.0, b = q;
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = simpson(a, b, fa, fm, fb);
    const double tol = 1e-13 * std::max(1.0, std::abs(whole));
    return adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 40);
}

}  // namespace

double Potential::energy(double q) const {
    if (is_zero) return 0.0;
    if (closed_form) return closed_form(q);
    return integrate_derivative(deriv1, q);
}

namespace potentials {

Potential zero() {
    Potential p;
    p.name = "none";
    p.even = true;
    p.is_zero = true;
    p.deriv2_bound = 0.0;
    return p;
}

Potential sin_pow(int n) {
    if (n < 1) throw ConfigError("sin_pow requires n >= 1");
    Potential p;
    p.name = "sin_pow";
    p.is_zero = false;
    p.even = true;
    const double dn = n;
    p.closed_form = [n](double q) { return std::pow(std::sin(q), 2 * n); };
    p.deriv1 = [n](double q) {
        return 2.0 * n * std::pow(std::sin(q), 2 * n - 1) * std::cos(q);
    };
    p.deriv2 = [n](double q) {
        const double s = std::sin(q), c = std::cos(q);
        return 2.0 * n *
               ((2 * n - 1) * std::pow(s, 2 * n - 2) * c * c -
                std::pow(s, 2 * n));
    };
    // sup over u = sin^2 q of 2n|(2n-1)u^{n-1}(1-u) - u^n|: the boundary
    // u=1 gives 2n; the interior stationary point u* gives the other
    // candidate.
    double interior = 0.0;
    if (n >= 2) {
        const double ustar = (2 * dn - 1) * (dn - 1) / (2 * dn * dn);
        interior = std::pow(ustar, n - 1) * (2 * dn - 1) / dn;
    } else {
        interior = 1.0;  // n=1: |1-2u| attains 1 at u=0
    }
    p.deriv2_bound = 2.0 * dn * std::max(1.0, interior);
    return p;
}

Potential rational_well(int n, double alpha) {
    if (n < 1) throw ConfigError("rational_well requires n >= 1");
    if (alpha <= 0.0) throw ConfigError("rational_well requires alpha > 0");
    Potential p;
    p.name = "rational_well";
    p.is_zero = false;
    p.even = true;
    p.closed_form = [n, alpha](double q) {
        const double t = std::pow(q, 2 * n);
        return t / (1.0 + alpha * t);
    };
    p.deriv1 = [n, alpha](double q) {
        const double t = std::pow(q, 2 * n);
        const double d = 1.0 + alpha * t;
        return 2.0 * n * std::pow(q, 2 * n - 1) / (d * d);
    };
    auto d2 = [n, alpha](double q) {
        const double t = std::pow(q, 2 * n);
        const double d = 1.0 + alpha * t;
        return 2.0 * n * std::pow(q, 2 * n - 2) *
               ((2 * n - 1) - (2 * n + 1) * alpha * t) / (d * d * d);
    };
    p.deriv2 = d2;
    // Stationary points of V'' in w = alpha q^{2n} solve
    //   B(n+1) w^2 + (2 - 8n^2) w + (n-1)A = 0,  A = 2n-1, B = 2n+1.
    const double A = 2.0 * n - 1.0, B = 2.0 * n + 1.0, dn = n;
    double bound = (n == 1) ? 2.0 : 0.0;  // w -> 0 limit
    const double qa = B * (dn + 1.0), qb = 2.0 - 8.0 * dn * dn,
                 qc = (dn - 1.0) * A;
    const double disc = qb * qb - 4.0 * qa * qc;
    if (disc >= 0.0) {
        for (double sgn : {-1.0, 1.0}) {
            const double w = (-qb + sgn * std::sqrt(disc)) / (2.0 * qa);
            if (w <= 0.0) continue;
            const double q = std::pow(w / alpha, 1.0 / (2.0 * dn));
            bound = std::max(bound, std::abs(d2(q)));
        }
    }
    p.deriv2_bound = bound;
    return p;
}

Potential soft_well(double alpha, double delta) {
    if (alpha <= 0.0) throw ConfigError("soft_well requires alpha > 0");
    if (delta <= 0.0 || delta >= 2.0)
        throw ConfigError("soft_well requires delta in (0,2)");
    Potential p;
    p.name = "soft_well";
    p.is_zero = false;
    p.even = true;
    p.closed_form = [alpha, delta](double q) {
        return std::pow(1.0 + alpha * q * q, 0.5 * delta);
    };
    p.deriv1 = [alpha, delta](double q) {
        return delta * alpha * q * std::pow(1.0 + alpha * q * q, 0.5 * delta - 1.0);
    };
    auto d2 = [alpha, delta](double q) {
        const double w = alpha * q * q;
        return delta * alpha * std::pow(1.0 + w, 0.5 * delta - 2.0) *
               (1.0 + (delta - 1.0) * w);
    };
    p.deriv2 = d2;
    double bound = delta * alpha;  // w = 0
    if (delta < 1.0) {
        const double wstar = 3.0 / (1.0 - delta);
        bound = std::max(bound, 2.0 * delta * alpha *
                                    std::pow(1.0 + wstar, 0.5 * delta - 2.0));
    }
    p.deriv2_bound = bound;
    return p;
}

Potential cosine() {
    Potential p;
    p.name = "cosine";
    p.is_zero = false;
    p.even = true;
    p.closed_form = [](double q) { return std::cos(q); };
    p.deriv1 = [](double q) { return -std::sin(q); };
    p.deriv2 = [](double q) { return -std::cos(q); };
    p.deriv2_bound = 1.0;
    return p;
}

Potential sine() {
    Potential p;
    p.name = "sine";
    p.is_zero = false;
    p.even = false;
    p.closed_form = [](double q) { return std::sin(q); };
    p.deriv1 = [](double q) { return std::cos(q); };
    p.deriv2 = [](double q) { return -std::sin(q); };
    p.deriv2_bound = 1.0;
    return p;
}

Potential quadratic(double k) {
    Potential p;
    p.name = "quadratic";
    p.is_zero = false;
    p.even = true;
    p.closed_form = [k](double q) { return 0.5 * k * q * q; };
    p.deriv1 = [k](double q) { return k * q; };
    p.deriv2 = [k](double) { return k; };
    p.deriv2_bound = std::abs(k);
    return p;
}

Potential quartic(double k) {
    // Unbounded second derivative: the curvature bound is infinite, so no
    // convergence radius exists and the series gate always refuses.  The
    // fixed-point map may still be iterated with divergence detection.
    Potential p;
    p.name = "quartic";
    p.is_zero = false;
    p.even = true;
    p.closed_form = [k](double q) { return 0.25 * k * q * q * q * q; };
    p.deriv1 = [k](double q) { return k * q * q * q; };
    p.deriv2 = [k](double q) { return 3.0 * k * q * q; };
    p.deriv2_bound = std::numeric_limits<double>::infinity();
    return p;
}

}  // namespace potentials

int ForcingSpectrum::max_mode() const {
    return modes.empty() ? 0 : modes.back().m;
}

cplx ForcingSpectrum::coeff(int m) const {
    if (m == 0) return {0.0, 0.0};
    const int a = std::abs(m);
    for (const Mode& mode : modes) {
        if (mode.m == a) return m > 0 ? mode.amp : std::conj(mode.amp);
        if (mode.m > a) break;
    }
    return {0.0, 0.0};
}

double ForcingSpectrum::value(double t, double omega) const {
    double f = 0.0;
    for (const Mode& mode : modes) {
        const double ph = mode.m * omega * t;
        f += 2.0 * (mode.amp.real() * std::cos(ph) -
                    mode.amp.imag() * std::sin(ph));
    }
    return f;
}

bool ForcingSpectrum::odd_only() const {
    for (const Mode& mode : modes)
        if (mode.m % 2 == 0 && std::abs(mode.amp) != 0.0) return false;
    return true;
}

double ForcingSpectrum::weighted_power() const {
    double s = 0.0;
    for (const Mode& mode : modes) {
        const double t = mode.m * std::abs(mode.amp);
        s += 2.0 * t * t;  // both signs of m
    }
    return s;
}

void ForcingSpectrum::validate() const {
    int prev = 0;
    for (const Mode& mode : modes) {
        if (mode.m == 0)
            throw ConfigError("forcing mode m=0 rejected: F0 = 0 is required");
        if (mode.m < 0)
            throw ConfigError(
                "forcing modes are stored for m >= 1; negative m follows by "
                "conjugation");
        if (mode.m <= prev) throw ConfigError("duplicate forcing mode entry");
        prev = mode.m;
    }
    // Strict positivity of sum (m|F_m|)^2 is a config-level requirement;
    // library operations accept the F = 0 degenerate case (zero response).
}

void ChainConfig::validate() const {
    if (half_width < 0) throw ConfigError("half_width must be >= 0");
    if (!(omega0 > 0.0)) throw ConfigError("omega0 must be > 0");
    if (!(theta > 0.0)) throw ConfigError("theta must be > 0");
    if (gamma < 0.0) throw ConfigError("gamma must be >= 0");
    forcing.validate();
}

namespace {

template <class T>
void laplacian_impl(std::span<const T> f, std::span<T> out) {
    const std::size_t n = f.size();
    if (n == 0) throw ConfigError("empty field");
    if (n == 1) {
        out[0] = T(0);
        return;
    }
    // reflecting extension: f[-1] = f[0], f[n] = f[n-1]
    out[0] = f[1] - f[0];
    for (std::size_t x = 1; x + 1 < n; ++x)
        out[x] = f[x + 1] + f[x - 1] - 2.0 * f[x];
    out[n - 1] = f[n - 2] - f[n - 1];
}

}  // namespace

void neumann_laplacian(std::span<const double> f, std::span<double> out) {
    laplacian_impl(f, out);
}

void neumann_laplacian(std::span<const cplx> f, std::span<cplx> out) {
    laplacian_impl(f, out);
}

void force_field(std::span<const double> f, const ChainConfig& cfg,
                 std::span<double> out) {
    const std::size_t n = f.size();
    if (n == 0) throw ConfigError("empty field");
    for (std::size_t x = 0; x < n; ++x) out[x] = cfg.pin.d1(f[x]);
    if (!cfg.coupling.is_zero) {
        const double u0 = cfg.coupling.d1(0.0);
        double left = u0;  // U'(f_x - f_{x-1}) with the ghost bond
        for (std::size_t x = 0; x < n; ++x) {
            const double right =
                (x + 1 < n) ? cfg.coupling.d1(f[x + 1] - f[x]) : u0;
            out[x] -= right - left;
            left = right;
        }
    }
}

void eom_accel(const ChainConfig& cfg, double t, std::span<const double> q,
               std::span<const double> p, std::span<double> accel) {
    const std::size_t n = q.size();
    neumann_laplacian(q, accel);
    for (std::size_t x = 0; x < n; ++x)
        accel[x] -= cfg.omega0 * cfg.omega0 * q[x];
    accel[0] -= cfg.gamma * p[0];
    accel[n - 1] -= cfg.gamma * p[n - 1];
    if (cfg.nu != 0.0 && (!cfg.pin.is_zero || !cfg.coupling.is_zero)) {
        std::vector<double> w(n);
        force_field(q, cfg, w);
        for (std::size_t x = 0; x < n; ++x) accel[x] -= cfg.nu * w[x];
    }
    accel[cfg.half_width] += cfg.forcing.value(t, cfg.omega());
}

void eom_rhs(const ChainState& s, const ChainConfig& cfg,
             std::span<double> accel) {
    eom_accel(cfg, s.t, s.q, s.p, accel);
}

double hamiltonian(const ChainState& s, const ChainConfig& cfg) {
    const std::size_t n = s.q.size();
    double h = 0.5 * kernels::active().sum_sq(s.p.data(), n);
    h += 0.5 * cfg.omega0 * cfg.omega0 * kernels::active().sum_sq(s.q.data(), n);
    for (std::size_t x = 1; x < n; ++x) {
        const double d = s.q[x] - s.q[x - 1];
        h += 0.5 * d * d;
    }
    if (cfg.nu != 0.0) {
        double pot = 0.0;
        for (std::size_t x = 0; x < n; ++x) pot += cfg.pin.energy(s.q[x]);
        if (!cfg.coupling.is_zero) {
            pot += cfg.coupling.energy(0.0);  // ghost bond at x = -N
            for (std::size_t x = 1; x < n; ++x)
                pot += cfg.coupling.energy(s.q[x] - s.q[x - 1]);
        }
        h += cfg.nu * pot;
    }
    return h;
}

double site_norm(std::span<const double> f) {
    if (f.empty()) throw ConfigError("empty field");
    return std::sqrt(kernels::active().sum_sq(f.data(), f.size()));
}

double period_mean_norm(std::span<const double> samples, std::size_t rows,
                        std::size_t cols) {
    if (rows == 0 || cols == 0 || samples.size() != rows * cols)
        throw ConfigError("empty or inconsistent sample grid");
    const double s = kernels::active().sum_sq(samples.data(), samples.size());
    return std::sqrt(s / static_cast<double>(rows));
}

}  // namespace oscchain
