#include "oscchain/collocation.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cstring>
#include <mutex>

namespace oscchain {

namespace {
std::mutex& plan_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace

int collocation_grid_size(int max_harmonic) {
    const int need = 8 * (2 * max_harmonic + 1);
    int t = 16;
    while (t < need) t *= 2;
    return t;
}

Collocation::Collocation(int grid_size) : size_(grid_size) {
    if (grid_size < 4 || (grid_size & (grid_size - 1)) != 0)
        throw ConfigError("collocation grid size must be a power of two >= 4");
    real_buf_ = fftw_alloc_real(size_);
    spec_buf_ = reinterpret_cast<std::complex<double>*>(
        fftw_alloc_complex(size_ / 2 + 1));
    std::lock_guard<std::mutex> lock(plan_mutex());
    fwd_ = fftw_plan_dft_r2c_1d(size_, real_buf_,
                                reinterpret_cast<fftw_complex*>(spec_buf_),
                                FFTW_ESTIMATE);
    bwd_ = fftw_plan_dft_c2r_1d(size_,
                                reinterpret_cast<fftw_complex*>(spec_buf_),
                                real_buf_, FFTW_ESTIMATE);
}

Collocation::~Collocation() {
    {
        std::lock_guard<std::mutex> lock(plan_mutex());
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(bwd_);
    }
    fftw_free(real_buf_);
    fftw_free(spec_buf_);
}

void Collocation::synthesize(std::span<const std::complex<double>> coeff,
                             int M, std::span<double> out) const {
    if (M >= size_ / 2)
        throw ConfigError("harmonic count exceeds collocation bandwidth");
    const int bins = size_ / 2 + 1;
    std::fill(spec_buf_, spec_buf_ + bins, std::complex<double>(0.0, 0.0));
    for (int m = 0; m <= M; ++m) spec_buf_[m] = coeff[m];
    fftw_execute(bwd_);
    std::memcpy(out.data(), real_buf_, sizeof(double) * size_);
}

void Collocation::analyze(std::span<const double> in, int M,
                          std::span<std::complex<double>> out) const {
    if (M >= size_ / 2)
        throw ConfigError("harmonic count exceeds collocation bandwidth");
    std::memcpy(real_buf_, in.data(), sizeof(double) * size_);
    fftw_execute(fwd_);
    const double inv = 1.0 / size_;
    for (int m = 0; m <= M; ++m) out[m] = spec_buf_[m] * inv;
}

}  // namespace oscchain
