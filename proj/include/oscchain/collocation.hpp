#pragma once

#include <complex>
#include <span>

#include "oscchain/errors.hpp"

// Forward declarations so fftw3.h stays out of the public header.
struct fftw_plan_s;

namespace oscchain {

// Uniform-grid trigonometric collocation over one period.  Coefficients use
// the convention f(t_k) = sum_{|m| <= M} c(m) e^{2 pi i m k / T} with
// c(-m) = conj(c(m)); only m >= 0 is passed around.
//
// Owns FFTW scratch buffers, so one instance must not be shared across
// threads; plan creation is serialized internally.
class Collocation {
  public:
    explicit Collocation(int grid_size);
    ~Collocation();
    Collocation(const Collocation&) = delete;
    Collocation& operator=(const Collocation&) = delete;

    int grid_size() const { return size_; }

    // out[k] = c(0) + sum_{m=1..M} 2 Re[c(m) e^{2 pi i m k/T}]
    void synthesize(std::span<const std::complex<double>> coeff, int M,
                    std::span<double> out) const;

    // out[m] = (1/T) sum_k in[k] e^{-2 pi i m k/T}, m = 0..M
    void analyze(std::span<const double> in, int M,
                 std::span<std::complex<double>> out) const;

  private:
    int size_;
    double* real_buf_;
    std::complex<double>* spec_buf_;  // size_/2 + 1 bins
    fftw_plan_s* fwd_;
    fftw_plan_s* bwd_;
};

// Smallest power of two >= 8(2M+1); the anti-aliasing margin used
// throughout the spectral solver.
int collocation_grid_size(int max_harmonic);

}  // namespace oscchain
