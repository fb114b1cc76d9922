#include "oscchain/kernels.hpp"

#include <cstdlib>

namespace oscchain::kernels {

namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

double sum_sq_scalar(const double* a, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * a[i];
    return s;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void xpay_scalar(const double* x, double alpha, const double* y, double* out,
                 std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = x[i] + alpha * y[i];
}

cplx cdotu_scalar(const cplx* a, const cplx* b, std::size_t n) {
    double re = 0.0, im = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        re += a[i].real() * b[i].real() - a[i].imag() * b[i].imag();
        im += a[i].real() * b[i].imag() + a[i].imag() * b[i].real();
    }
    return {re, im};
}

double sum_sq_c_scalar(const cplx* a, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        s += a[i].real() * a[i].real() + a[i].imag() * a[i].imag();
    return s;
}

const Ops scalar_ops = {
    "scalar",   dot_scalar,  sum_sq_scalar,    axpy_scalar,
    xpay_scalar, cdotu_scalar, sum_sq_c_scalar,
};

const Ops* pick_active() {
    const char* env = std::getenv("OSCCHAIN_NO_SIMD");
    if (env && env[0] != '\0' && env[0] != '0') return &scalar_ops;
    if (const Ops* v = avx2()) return v;
    return &scalar_ops;
}

}  // namespace

const Ops& scalar() { return scalar_ops; }

const Ops& active() {
    static const Ops* chosen = pick_active();
    return *chosen;
}

void cmatvec(const cplx* A, const cplx* x, cplx* y, std::size_t n) {
    const Ops& k = active();
    for (std::size_t r = 0; r < n; ++r) y[r] = k.cdotu(A + r * n, x, n);
}

#if !defined(OSCCHAIN_HAVE_AVX2_TU)
const Ops* avx2() { return nullptr; }
#endif

}  // namespace oscchain::kernels
