#include "oscchain/greens.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace oscchain::greens {

namespace {

// zeta(lambda) = (2 + omega0^2 + lambda)/2 maps the band [-w_u^2,-w_0^2]
// (in -lambda) onto the cut [-1, 1].
cplx chi(cplx lambda, double omega0) {
    return 0.5 * (2.0 + omega0 * omega0 + lambda);
}

cplx cpow_uint(cplx base, unsigned k) {
    cplx r{1.0, 0.0};
    while (k) {
        if (k & 1u) r *= base;
        base *= base;
        k >>= 1u;
    }
    return r;
}

double ipow_sign(double base, unsigned k) {
    double r = 1.0;
    while (k) {
        if (k & 1u) r *= base;
        base *= base;
        k >>= 1u;
    }
    return r;
}

struct LatticeKernel {
    cplx phi;   // Joukowski image, |phi| > 1
    cplx winv;  // 1/phi
    cplx den;   // 2(phi - zeta) = {(l+w0^2)(l+wu^2)}^{1/2} on the right branch

    cplx value(long d) const {
        const unsigned a = static_cast<unsigned>(d < 0 ? -d : d);
        return cpow_uint(winv, a) / den;
    }
};

LatticeKernel make_lattice_kernel(cplx lambda, double omega0) {
    const cplx zeta = chi(lambda, omega0);
    const cplx phi = joukowski_inverse(zeta);
    return {phi, 1.0 / phi, 2.0 * (phi - zeta)};
}

}  // namespace

double band_distance(double omega0, double s) {
    const double lo = omega0 * omega0, hi = lo + 4.0;
    if (s < lo) return lo - s;
    if (s > hi) return s - hi;
    return 0.0;
}

double SpectralPoint::band_distance(double omega0) const {
    const double lo = omega0 * omega0, hi = lo + 4.0;
    const double x = -lambda.real(), y = -lambda.imag();
    double dx = 0.0;
    if (x < lo)
        dx = lo - x;
    else if (x > hi)
        dx = x - hi;
    return std::hypot(dx, y);
}

cplx joukowski_inverse(cplx zeta) {
    if (std::abs(zeta.imag()) <= 1e-14 && zeta.real() >= -1.0 - 1e-14 &&
        zeta.real() <= 1.0 + 1e-14)
        throw ResonanceError("joukowski_inverse: zeta on the cut [-1,1]");
    const cplx s = std::sqrt(zeta * zeta - 1.0);
    const cplx z1 = zeta + s, z2 = zeta - s;
    return std::abs(z1) >= std::abs(z2) ? z1 : z2;
}

cplx infinite_greens(cplx lambda, int x, double omega0) {
    const LatticeKernel k = make_lattice_kernel(lambda, omega0);
    return k.value(x);
}

double real_frequency_kernel(double Omega, int x, double omega0) {
    const double w0sq = omega0 * omega0;
    const double wusq = w0sq + 4.0;
    const double s = Omega * Omega;
    if (s >= w0sq && s <= wusq)
        throw ResonanceError("frequency inside the spectral band");
    const double D = std::sqrt((w0sq - s) * (wusq - s));
    const unsigned a = static_cast<unsigned>(x < 0 ? -x : x);
    if (s < w0sq) {
        const double xi = 1.0 + 0.5 * (w0sq - s + D);
        return 1.0 / (ipow_sign(xi, a) * D);
    }
    const double xi = 1.0 + 0.5 * (w0sq - s - D);  // < -1
    return -1.0 / (ipow_sign(xi, a) * D);
}

cplx neumann_greens_images(cplx lambda, double omega0, int N, int x, int y) {
    const LatticeKernel k = make_lattice_kernel(lambda, omega0);
    const long P = 2L * N + 1;
    cplx sum = k.value(x - y) + k.value(x + y + P) + k.value(x + y - P);
    for (long r = 1; r < 100000; ++r) {
        const cplx ring = k.value(x - y + 2 * r * P) +
                          k.value(x - y - 2 * r * P) +
                          k.value(x + y + (2 * r + 1) * P) +
                          k.value(x + y - (2 * r + 1) * P);
        sum += ring;
        if (std::abs(ring) < 1e-16 * std::abs(sum)) return sum;
    }
    throw ConvergenceError("image sum did not converge (gap too small)");
}

cplx neumann_greens_eigen(cplx lambda, double omega0, int N, int x, int y) {
    const int n = 2 * N + 1;
    cplx sum{0.0, 0.0};
    for (int j = 0; j < n; ++j) {
        // -Delta cos(pi j (2x+1)/(2n)) = 4 sin^2(pi j / (2n)) * (same)
        const double sj = std::sin(0.5 * M_PI * j / n);
        const double mu = omega0 * omega0 + 4.0 * sj * sj;  // omega_j^2
        const cplx denom = lambda + mu;
        if (std::abs(denom) <= 1e-12 * (1.0 + std::abs(lambda)))
            throw ResonanceError("eigenmode pole lambda = -omega_j^2");
        double px, py;
        if (j == 0) {
            px = py = std::sqrt(1.0 / n);
        } else {
            const double c = std::sqrt(2.0 / n);
            px = c * std::cos(0.5 * M_PI * j * (2.0 * (x + N) + 1.0) / n);
            py = c * std::cos(0.5 * M_PI * j * (2.0 * (y + N) + 1.0) / n);
        }
        sum += px * py / denom;
    }
    return sum;
}

ComplexTable neumann_table(cplx lambda, double omega0, int N) {
    const int n = 2 * N + 1;
    const LatticeKernel k = make_lattice_kernel(lambda, omega0);
    // Small gaps make the image series impractical; use the dense route.
    if (n * std::log(std::abs(k.phi)) < 0.2)
        return dense_helmholtz_inverse(lambda, 0.0, omega0, N);

    ComplexTable G(N);
    const long P = n;
    // Number of image rings for a 1e-18 tail, plus slack.
    const double lw = std::log(std::abs(k.winv));  // negative
    const long rings =
        std::max<long>(2, static_cast<long>(std::ceil(-42.0 / (2 * P * lw))) + 2);
    std::vector<cplx> pw(static_cast<std::size_t>(2 * rings + 3) * P + 2 * n);
    pw[0] = {1.0, 0.0};
    for (std::size_t i = 1; i < pw.size(); ++i) pw[i] = pw[i - 1] * k.winv;
    auto val = [&](long d) {
        return pw[static_cast<std::size_t>(d < 0 ? -d : d)] / k.den;
    };
    for (int x = -N; x <= N; ++x)
        for (int y = x; y <= N; ++y) {
            cplx sum = val(x - y) + val(x + y + P) + val(x + y - P);
            for (long r = 1; r <= rings; ++r) {
                const cplx ring =
                    val(x - y + 2 * r * P) + val(x - y - 2 * r * P) +
                    val(x + y + (2 * r + 1) * P) + val(x + y - (2 * r + 1) * P);
                sum += ring;
                if (std::abs(ring) < 1e-16 * std::abs(sum)) break;
            }
            G.at(x, y) = sum;
            G.at(y, x) = sum;
        }
    return G;
}

ComplexTable dissipative_greens(cplx lambda, double sigma, double omega0,
                                int N) {
    ComplexTable G = neumann_table(lambda, omega0, N);
    if (sigma == 0.0) return G;
    const cplx I{0.0, 1.0};
    const cplx g = G.at(N, N);    // = G(-N,-N) by mirror symmetry
    const cplx h = G.at(-N, N);   // = G(N,-N)
    const cplx a = 1.0 + I * sigma * g;
    const cplx QN = a * a + sigma * sigma * h * h;
    const double scale = std::norm(1.0 + std::abs(sigma) * std::abs(g)) +
                         sigma * sigma * std::norm(h);
    if (std::abs(QN) < 1e-13 * scale)
        throw ResonanceError("degenerate boundary system (Q_N ~ 0)");

    const int n = G.n();
    ComplexTable H(N);
    std::vector<cplx> qm(n), qp(n);  // Q(-N, y), Q(N, y)
    for (int y = -N; y <= N; ++y) {
        qm[y + N] = (a * G.at(-N, y) - I * sigma * h * G.at(N, y)) / QN;
        qp[y + N] = (a * G.at(N, y) - I * sigma * h * G.at(-N, y)) / QN;
    }
    for (int x = -N; x <= N; ++x) {
        const cplx gm = G.at(x, -N), gp = G.at(x, N);
        for (int y = -N; y <= N; ++y)
            H.at(x, y) = G.at(x, y) -
                         I * sigma * (gm * qm[y + N] + gp * qp[y + N]);
    }
    return H;
}

ComplexTable dissipative_greens(const SpectralPoint& pt, double omega0) {
    return dissipative_greens(pt.lambda, pt.sigma, omega0, pt.half_width);
}

ComplexTable dense_helmholtz_inverse(cplx lambda, double sigma, double omega0,
                                     int N) {
    const int n = 2 * N + 1;
    Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(n, n);
    const cplx I{0.0, 1.0};
    for (int i = 0; i < n; ++i) {
        A(i, i) = lambda + omega0 * omega0;
        // -Delta with the reflecting extension
        if (n == 1) {
            // Delta vanishes on a single site
        } else if (i == 0 || i == n - 1) {
            A(i, i) += 1.0;
            A(i, i == 0 ? 1 : n - 2) -= 1.0;
        } else {
            A(i, i) += 2.0;
            A(i, i - 1) -= 1.0;
            A(i, i + 1) -= 1.0;
        }
    }
    A(0, 0) += I * sigma;
    A(n - 1, n - 1) += I * sigma;  // site 0 twice when N = 0
    Eigen::MatrixXcd inv =
        Eigen::PartialPivLU<Eigen::MatrixXcd>(A).solve(
            Eigen::MatrixXcd::Identity(n, n));
    ComplexTable H(N);
    for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y)
            H.data[static_cast<std::size_t>(x) * n + y] = inv(x, y);
    return H;
}

GreensKernelSet build_kernel_set(const ChainConfig& cfg, int max_harmonic) {
    const double w = cfg.omega();
    GreensKernelSet set;
    set.half_width = cfg.half_width;
    set.max_harmonic = max_harmonic;
    set.omega0 = cfg.omega0;
    set.gamma = cfg.gamma;
    set.omega = w;
    set.tables.reserve(max_harmonic + 1);
    for (int m = 0; m <= max_harmonic; ++m) {
        const double s = (m * w) * (m * w);
        if (!(band_distance(cfg.omega0, s) > 0.0))
            throw ResonanceError(
                "resonant harmonic: m*omega inside the band [omega0, omega_u] "
                "at m = " + std::to_string(m),
                m);
        set.tables.push_back(dissipative_greens(-s, cfg.gamma * m * w,
                                                cfg.omega0, cfg.half_width));
    }
    return set;
}

}  // namespace oscchain::greens
