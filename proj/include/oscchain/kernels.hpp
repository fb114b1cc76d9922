#pragma once

#include <complex>
#include <cstddef>

// Data-parallel arithmetic primitives used by the hot loops (norm
// reductions, RK4 state updates, per-harmonic kernel matvecs).
//
// Every operation exists as a scalar reference implementation and, on
// x86-64 hardware with AVX2+FMA, as a vectorized variant selected at
// runtime.  Within one process a single variant stays active, so all
// reductions are deterministic and runs reproduce bit-for-bit
// regardless of how many sweep workers execute them.
//
// Set OSCCHAIN_NO_SIMD=1 in the environment to force the scalar path.

namespace oscchain::kernels {

using cplx = std::complex<double>;

struct Ops {
    const char* name;
    // sum_i a[i]*b[i]
    double (*dot)(const double* a, const double* b, std::size_t n);
    // sum_i a[i]^2
    double (*sum_sq)(const double* a, std::size_t n);
    // y[i] += alpha*x[i]
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
    // out[i] = x[i] + alpha*y[i]
    void (*xpay)(const double* x, double alpha, const double* y, double* out,
                 std::size_t n);
    // unconjugated complex dot: sum_i a[i]*b[i]
    cplx (*cdotu)(const cplx* a, const cplx* b, std::size_t n);
    // sum_i |a[i]|^2
    double (*sum_sq_c)(const cplx* a, std::size_t n);
};

// Scalar reference kernels (always available).
const Ops& scalar();

// AVX2+FMA kernels; nullptr when the build or the CPU lacks them.
const Ops* avx2();

// The variant selected at process start.
const Ops& active();

// y = A*x for a row-major dense n-by-n complex matrix.
void cmatvec(const cplx* A, const cplx* x, cplx* y, std::size_t n);

}  // namespace oscchain::kernels
