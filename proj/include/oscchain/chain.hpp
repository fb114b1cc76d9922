#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "oscchain/errors.hpp"

namespace oscchain {

using cplx = std::complex<double>;

// A scalar potential represented by its first and second derivatives plus a
// certified bound on sup|second derivative|.  The value itself is only
// needed by the Hamiltonian; when no closed form is attached it is obtained
// by adaptive quadrature of the first derivative with value(0) = 0.
struct Potential {
    std::string name = "none";
    std::function<double(double)> deriv1;
    std::function<double(double)> deriv2;
    double deriv2_bound = 0.0;
    std::function<double(double)> closed_form;  // optional potential value
    bool even = false;   // set only when evenness is certain
    bool is_zero = true;

    double d1(double q) const { return is_zero ? 0.0 : deriv1(q); }
    double d2(double q) const { return is_zero ? 0.0 : deriv2(q); }
    double energy(double q) const;
};

namespace potentials {
Potential zero();
Potential sin_pow(int n);                       // sin(q)^(2n)
Potential rational_well(int n, double alpha);   // q^(2n) / (1 + alpha q^(2n))
Potential soft_well(double alpha, double delta);  // (1 + alpha q^2)^(delta/2)
Potential cosine();                             // cos(q), interaction type
Potential sine();                               // sin(q), breaks evenness
Potential quadratic(double k);                  // k q^2 / 2
Potential quartic(double k);  // k q^4 / 4; unbounded curvature, no radius
}  // namespace potentials

// Forcing spectrum F(t) = sum_m Fm e^{im w t} with F0 = 0 and F(-m) = conj(Fm);
// only m >= 1 is stored.
struct ForcingSpectrum {
    struct Mode {
        int m = 1;
        cplx amp{0.0, 0.0};
    };
    std::vector<Mode> modes;  // strictly increasing m >= 1

    int max_mode() const;
    cplx coeff(int m) const;        // any sign of m; 0 when absent
    double value(double t, double omega) const;
    bool odd_only() const;
    double weighted_power() const;  // sum over all m of (m |Fm|)^2
    void validate() const;
};

struct ChainConfig {
    int half_width = 0;  // N; sites are x = -N..N
    double omega0 = 1.0;
    double gamma = 0.0;
    double nu = 0.0;
    double theta = 2.0 * M_PI;  // period; omega is always derived
    Potential pin;       // V
    Potential coupling;  // U
    ForcingSpectrum forcing;

    double omega() const { return 2.0 * M_PI / theta; }
    int sites() const { return 2 * half_width + 1; }
    double band_top() const { return std::sqrt(omega0 * omega0 + 4.0); }
    // The weight "V" of the contraction estimates: ||V''|| + 3||U''||.
    double curvature_bound() const {
        return pin.deriv2_bound + 3.0 * coupling.deriv2_bound;
    }
    bool odd_mode_hypothesis() const {
        return pin.even && coupling.even && forcing.odd_only();
    }
    void validate() const;
};

struct ChainState {
    std::vector<double> q;
    std::vector<double> p;
    double t = 0.0;
};

// (Delta f)_x = f_{x+1} + f_{x-1} - 2 f_x with the reflecting extension
// f_{N+1} = f_N, f_{-N-1} = f_{-N}.
void neumann_laplacian(std::span<const double> f, std::span<double> out);
void neumann_laplacian(std::span<const cplx> f, std::span<cplx> out);

// W_x(f) = V'(f_x) - [U'(f_{x+1}-f_x) - U'(f_x-f_{x-1})] with the same
// reflecting extension (boundary differences are zero).
void force_field(std::span<const double> f, const ChainConfig& cfg,
                 std::span<double> out);

// Acceleration of the equations of motion at the state's own time.
void eom_rhs(const ChainState& s, const ChainConfig& cfg,
             std::span<double> accel);

// Same acceleration over raw position/momentum spans (integrator core).
void eom_accel(const ChainConfig& cfg, double t, std::span<const double> q,
               std::span<const double> p, std::span<double> accel);

double hamiltonian(const ChainState& s, const ChainConfig& cfg);

// Euclidean site norm ||f||_N.
double site_norm(std::span<const double> f);

// |||F||| over one period from T uniform samples; `samples` holds T rows of
// length n (row k is F(t_k)).  Exact for trigonometric polynomials of
// degree < T on the uniform grid.
double period_mean_norm(std::span<const double> samples, std::size_t rows,
                        std::size_t cols);

}  // namespace oscchain
