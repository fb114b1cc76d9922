#pragma once

#include <complex>
#include <vector>

#include "oscchain/chain.hpp"

namespace oscchain {

// Spectral representation of a theta-periodic chain field: coefficients
// q~_x(m) for x in [-N, N] and m = 0..M; negative m is implied by the
// reality symmetry q~_x(-m) = conj(q~_x(m)).
struct HarmonicField {
    int half_width = 0;
    int max_harmonic = 0;
    int grid_size = 0;  // collocation samples tied to this field
    std::vector<cplx> coeff;  // (M+1) rows of 2N+1 sites

    static HarmonicField zeros(int N, int M, int T);

    int sites() const { return 2 * half_width + 1; }
    cplx* row(int m) {
        return coeff.data() + static_cast<std::size_t>(m) * sites();
    }
    const cplx* row(int m) const {
        return coeff.data() + static_cast<std::size_t>(m) * sites();
    }
    cplx get(int x, int m) const {
        const int a = m < 0 ? -m : m;
        if (a > max_harmonic) return {0.0, 0.0};
        const cplx v = row(a)[x + half_width];
        return m < 0 ? std::conj(v) : v;
    }
    void set(int x, int m, cplx v) { row(m)[x + half_width] = v; }
};

// a += alpha * b (must share shape)
void add_scaled(HarmonicField& a, double alpha, const HarmonicField& b);

// ||f||_{l2,N}^2 = sum_x |f_x(0)|^2 + 2 sum_{m>=1} sum_x |f_x(m)|^2;
// equals |||f|||^2 by the Plancherel identity.
double l2_norm_sq(const HarmonicField& f);
double l2_norm(const HarmonicField& f);
double l2_distance(const HarmonicField& a, const HarmonicField& b);

// Sobolev norm |||f|||_{N,k}: time derivatives become (m w)^l factors.
double sobolev_norm(const HarmonicField& f, double omega, int k);

}  // namespace oscchain
