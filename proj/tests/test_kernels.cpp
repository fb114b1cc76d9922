#include <doctest.h>

#include <random>
#include <vector>

#include "oscchain/kernels.hpp"

using namespace oscchain;

namespace {

std::vector<double> random_vec(std::mt19937_64& rng, std::size_t n) {
    std::normal_distribution<double> d(0.0, 1.0);
    std::vector<double> v(n);
    for (double& x : v) x = d(rng);
    return v;
}

std::vector<kernels::cplx> random_cvec(std::mt19937_64& rng, std::size_t n) {
    std::normal_distribution<double> d(0.0, 1.0);
    std::vector<kernels::cplx> v(n);
    for (auto& x : v) x = {d(rng), d(rng)};
    return v;
}

}  // namespace

TEST_CASE("scalar and simd kernels agree on random inputs") {
    const kernels::Ops& sc = kernels::scalar();
    const kernels::Ops* simd = kernels::avx2();
    if (!simd) {
        MESSAGE("no SIMD variant on this host; scalar-only check");
        return;
    }
    std::mt19937_64 rng(1234);
    // sizes straddling the vector width, including remainders
    for (std::size_t n : {0u, 1u, 2u, 3u, 4u, 5u, 7u, 8u, 17u, 64u, 1001u}) {
        const auto a = random_vec(rng, n);
        const auto b = random_vec(rng, n);
        const double scale = static_cast<double>(n) + 1.0;
        CHECK(sc.dot(a.data(), b.data(), n) ==
              doctest::Approx(simd->dot(a.data(), b.data(), n))
                  .epsilon(1e-13 * scale));
        CHECK(sc.sum_sq(a.data(), n) ==
              doctest::Approx(simd->sum_sq(a.data(), n)).epsilon(1e-13 * scale));

        auto y1 = b, y2 = b;
        sc.axpy(0.37, a.data(), y1.data(), n);
        simd->axpy(0.37, a.data(), y2.data(), n);
        for (std::size_t i = 0; i < n; ++i)
            CHECK(y1[i] == doctest::Approx(y2[i]).epsilon(1e-14));

        std::vector<double> o1(n), o2(n);
        sc.xpay(a.data(), -1.7, b.data(), o1.data(), n);
        simd->xpay(a.data(), -1.7, b.data(), o2.data(), n);
        for (std::size_t i = 0; i < n; ++i)
            CHECK(o1[i] == doctest::Approx(o2[i]).epsilon(1e-14));

        const auto ca = random_cvec(rng, n);
        const auto cb = random_cvec(rng, n);
        const auto z1 = sc.cdotu(ca.data(), cb.data(), n);
        const auto z2 = simd->cdotu(ca.data(), cb.data(), n);
        CHECK(std::abs(z1 - z2) <= 1e-13 * scale);
        CHECK(sc.sum_sq_c(ca.data(), n) ==
              doctest::Approx(simd->sum_sq_c(ca.data(), n))
                  .epsilon(1e-13 * scale));
    }
}

TEST_CASE("complex matvec matches a straightforward evaluation") {
    std::mt19937_64 rng(99);
    const std::size_t n = 33;
    const auto A = random_cvec(rng, n * n);
    const auto x = random_cvec(rng, n);
    std::vector<kernels::cplx> y(n);
    kernels::cmatvec(A.data(), x.data(), y.data(), n);
    for (std::size_t r = 0; r < n; ++r) {
        kernels::cplx acc{0.0, 0.0};
        for (std::size_t c = 0; c < n; ++c) acc += A[r * n + c] * x[c];
        CHECK(std::abs(y[r] - acc) <= 1e-12);
    }
}

TEST_CASE("active kernel dispatch is consistent") {
    const kernels::Ops& act = kernels::active();
    CHECK((std::string(act.name) == "scalar" || std::string(act.name) == "avx2"));
    std::vector<double> a{1.0, 2.0, 3.0};
    CHECK(act.sum_sq(a.data(), 3) == doctest::Approx(14.0));
}
