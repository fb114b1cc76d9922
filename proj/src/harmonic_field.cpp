#include "oscchain/harmonic_field.hpp"

#include <cmath>

#include "oscchain/kernels.hpp"

namespace oscchain {

HarmonicField HarmonicField::zeros(int N, int M, int T) {
    HarmonicField f;
    f.half_width = N;
    f.max_harmonic = M;
    f.grid_size = T;
    f.coeff.assign(static_cast<std::size_t>(M + 1) * (2 * N + 1),
                   cplx(0.0, 0.0));
    return f;
}

void add_scaled(HarmonicField& a, double alpha, const HarmonicField& b) {
    const double* src = reinterpret_cast<const double*>(b.coeff.data());
    double* dst = reinterpret_cast<double*>(a.coeff.data());
    kernels::active().axpy(alpha, src, dst, 2 * a.coeff.size());
}

double l2_norm_sq(const HarmonicField& f) {
    const auto& k = kernels::active();
    const int n = f.sites();
    double s = k.sum_sq_c(f.row(0), n);
    for (int m = 1; m <= f.max_harmonic; ++m)
        s += 2.0 * k.sum_sq_c(f.row(m), n);
    return s;
}

double l2_norm(const HarmonicField& f) { return std::sqrt(l2_norm_sq(f)); }

double l2_distance(const HarmonicField& a, const HarmonicField& b) {
    const int n = a.sites();
    double s = 0.0;
    std::vector<cplx> diff(n);
    for (int m = 0; m <= a.max_harmonic; ++m) {
        const cplx* ra = a.row(m);
        const cplx* rb = (m <= b.max_harmonic) ? b.row(m) : nullptr;
        for (int i = 0; i < n; ++i) diff[i] = rb ? ra[i] - rb[i] : ra[i];
        const double part = kernels::active().sum_sq_c(diff.data(), n);
        s += (m == 0) ? part : 2.0 * part;
    }
    return std::sqrt(s);
}

double sobolev_norm(const HarmonicField& f, double omega, int k) {
    const auto& ops = kernels::active();
    const int n = f.sites();
    double s = 0.0;
    for (int m = 0; m <= f.max_harmonic; ++m) {
        double weight = 1.0, pw = 1.0;
        const double msq = (m * omega) * (m * omega);
        for (int l = 1; l <= k; ++l) {
            pw *= msq;
            weight += pw;
        }
        const double part = weight * ops.sum_sq_c(f.row(m), n);
        s += (m == 0) ? part : 2.0 * part;
    }
    return std::sqrt(s);
}

}  // namespace oscchain
