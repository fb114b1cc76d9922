// AVX2+FMA kernel variants.  This translation unit is compiled with
// -mavx2 -mfma and must only be entered after the runtime CPU check in
// avx2() below.

#include "oscchain/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

namespace oscchain::kernels {

namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
    double s = hsum(acc);
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

double sum_sq_avx2(const double* a, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d v = _mm256_loadu_pd(a + i);
        acc = _mm256_fmadd_pd(v, v, acc);
    }
    double s = hsum(acc);
    for (; i < n; ++i) s += a[i] * a[i];
    return s;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vy = _mm256_loadu_pd(y + i);
        vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy);
        _mm256_storeu_pd(y + i, vy);
    }
    for (; i < n; ++i) y[i] += alpha * x[i];
}

void xpay_avx2(const double* x, double alpha, const double* y, double* out,
               std::size_t n) {
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d v = _mm256_fmadd_pd(va, _mm256_loadu_pd(y + i),
                                    _mm256_loadu_pd(x + i));
        _mm256_storeu_pd(out + i, v);
    }
    for (; i < n; ++i) out[i] = x[i] + alpha * y[i];
}

cplx cdotu_avx2(const cplx* a, const cplx* b, std::size_t n) {
    // Interleaved (re,im) pairs, two complex numbers per 256-bit lane.
    // acc1 accumulates a_re*b_re / a_im*b_im, acc2 accumulates the
    // cross products; the horizontal combine applies the signs.
    const double* pa = reinterpret_cast<const double*>(a);
    const double* pb = reinterpret_cast<const double*>(b);
    __m256d acc1 = _mm256_setzero_pd();
    __m256d acc2 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        __m256d va = _mm256_loadu_pd(pa + 2 * i);
        __m256d vb = _mm256_loadu_pd(pb + 2 * i);
        __m256d vbs = _mm256_permute_pd(vb, 0x5);  // swap re/im in each pair
        acc1 = _mm256_fmadd_pd(va, vb, acc1);
        acc2 = _mm256_fmadd_pd(va, vbs, acc2);
    }
    alignas(32) double t1[4], t2[4];
    _mm256_store_pd(t1, acc1);
    _mm256_store_pd(t2, acc2);
    double re = (t1[0] - t1[1]) + (t1[2] - t1[3]);
    double im = (t2[0] + t2[1]) + (t2[2] + t2[3]);
    for (; i < n; ++i) {
        re += a[i].real() * b[i].real() - a[i].imag() * b[i].imag();
        im += a[i].real() * b[i].imag() + a[i].imag() * b[i].real();
    }
    return {re, im};
}

double sum_sq_c_avx2(const cplx* a, std::size_t n) {
    return sum_sq_avx2(reinterpret_cast<const double*>(a), 2 * n);
}

const Ops avx2_ops = {
    "avx2",    dot_avx2,  sum_sq_avx2,    axpy_avx2,
    xpay_avx2, cdotu_avx2, sum_sq_c_avx2,
};

}  // namespace

const Ops* avx2() {
    static const Ops* ops = []() -> const Ops* {
        if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma"))
            return &avx2_ops;
        return nullptr;
    }();
    return ops;
}

}  // namespace oscchain::kernels

#else

namespace oscchain::kernels {
const Ops* avx2() { return nullptr; }
}  // namespace oscchain::kernels

#endif
