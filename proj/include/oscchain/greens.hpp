#pragma once

#include <complex>
#include <vector>

#include "oscchain/chain.hpp"

namespace oscchain::greens {

// Dense per-harmonic kernel table over the interval lattice, indexed by
// site coordinates x, y in [-N, N].
struct ComplexTable {
    int half_width = 0;
    std::vector<cplx> data;  // (2N+1)^2 row-major

    ComplexTable() = default;
    explicit ComplexTable(int N)
        : half_width(N),
          data(static_cast<std::size_t>(2 * N + 1) * (2 * N + 1)) {}
    int n() const { return 2 * half_width + 1; }
    cplx& at(int x, int y) {
        return data[static_cast<std::size_t>(x + half_width) * n() +
                    (y + half_width)];
    }
    const cplx& at(int x, int y) const {
        return data[static_cast<std::size_t>(x + half_width) * n() +
                    (y + half_width)];
    }
    const cplx* row(int x) const {
        return data.data() + static_cast<std::size_t>(x + half_width) * n();
    }
};

// Spectral location of one harmonic: the kernel of
// lambda + omega0^2 - Delta + i sigma (delta_{-N} + delta_N).
// In solver use lambda = -(m w)^2 and sigma = gamma m w.
struct SpectralPoint {
    cplx lambda{0.0, 0.0};
    double sigma = 0.0;
    int half_width = 0;

    // Distance of -lambda (as a point of the complex plane) to the real
    // segment [omega0^2, omega0^2 + 4].
    double band_distance(double omega0) const;
    bool valid(double omega0, double delta) const {
        return band_distance(omega0) >= delta;
    }
};

// Distance of the real number s to [omega0^2, omega0^2+4]; 0 inside.
double band_distance(double omega0, double s);

// Exterior inverse of the Joukowski map: returns z with (z + 1/z)/2 = zeta
// and |z| > 1.  Throws ResonanceError within 1e-14 of the cut [-1, 1].
cplx joukowski_inverse(cplx zeta);

// Green's function of lambda + omega0^2 - Delta on the infinite lattice.
cplx infinite_greens(cplx lambda, int x, double omega0);

// Real-frequency form G_{-Omega^2}(x) valid off the band [omega0, omega_u].
double real_frequency_kernel(double Omega, int x, double omega0);

// Neumann-interval Green's function, two independent routes.
cplx neumann_greens_images(cplx lambda, double omega0, int N, int x, int y);
cplx neumann_greens_eigen(cplx lambda, double omega0, int N, int x, int y);

// Full Neumann table; image sums with a dense-solve fallback when the
// off-band gap is too small for the series to be practical.
ComplexTable neumann_table(cplx lambda, double omega0, int N);

// Green's function of lambda + omega0^2 - Delta + i sigma (d_{-N} + d_N)
// via the boundary-correction formula; sigma = 0 reduces to the Neumann
// table.
ComplexTable dissipative_greens(cplx lambda, double sigma, double omega0,
                                int N);
ComplexTable dissipative_greens(const SpectralPoint& pt, double omega0);

// Dense LU inverse of the same operator; the test oracle.
ComplexTable dense_helmholtz_inverse(cplx lambda, double sigma, double omega0,
                                     int N);

// Immutable per-harmonic kernel collection H_m for m = 0..M; negative m by
// conjugation.
struct GreensKernelSet {
    int half_width = 0;
    int max_harmonic = 0;
    double omega0 = 0.0;
    double gamma = 0.0;
    double omega = 0.0;
    std::vector<ComplexTable> tables;  // index m = 0..M

    const ComplexTable& table(int m) const { return tables[m < 0 ? -m : m]; }
};

GreensKernelSet build_kernel_set(const ChainConfig& cfg, int max_harmonic);

}  // namespace oscchain::greens
