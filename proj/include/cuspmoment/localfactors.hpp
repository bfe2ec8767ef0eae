#pragma once

#include <complex>
#include <cstdint>
#include <span>

#include "cuspmoment/policy.hpp"
#include "cuspmoment/shifts.hpp"

namespace cuspmoment {

// A regularized Euler product value with its estimated truncation error.
struct EulerProduct {
    Complex value;
    // absolute error estimate for the primes beyond the cutoff
    double tail = 0.0;
    // exponent of the fitted tail decay, C * p^{-decay}
    double decay = 0.0;
};

// C(X; theta) = 1 / (1 - 2 X cos(theta) + X^2)
Complex c_kernel(Complex x, double theta);

// (2/pi) int prod_i C(x_i; theta) [U_nu - y U_{nu-1}](cos theta) C(y; theta)^{[with_y]}
// sin^2(theta) d(theta), nested Gauss-Chebyshev doubling to 1e-13 relative.
struct SatoTateIntegral {
    Complex value;
    int nodes = 0;
};
SatoTateIntegral sato_tate_integral(std::span<const Complex> x, int nu, bool with_y, Complex y,
                                    int min_nodes, int initial_nodes = 16);

// F_{A,p}(nu, s)
Complex local_factor(std::uint64_t p, int nu, const ShiftSet& a, Complex s,
                     const TruncationPolicy& policy = {});
Complex local_factor(std::uint64_t p, int nu, std::span<const Complex> shifts, Complex s,
                     const TruncationPolicy& policy = {});

// F_A(m, s) as prod_{i<j} zeta(2s + a_i + a_j) times the regularized Euler product.
EulerProduct f_A(std::uint64_t m, Complex s, const ShiftSet& a, const TruncationPolicy& policy);
EulerProduct f_A(std::uint64_t m, Complex s, std::span<const Complex> shifts,
                 const TruncationPolicy& policy);

// G_l(A) = F_A(l, 1/2)
EulerProduct g_l(std::uint64_t l, const ShiftSet& a, const TruncationPolicy& policy);
EulerProduct g_l(std::uint64_t l, std::span<const Complex> shifts, const TruncationPolicy& policy);

// sum_{(m, q) = 1} F_A(m, s) m^{-w}
EulerProduct twisted_series(const ShiftSet& a, Complex s, Complex w, std::uint64_t q,
                            const TruncationPolicy& policy);

// sum_{(m, c/g) = 1} F_A(m g, s) m^{-w}
EulerProduct coprime_restricted_series(std::uint64_t c, std::uint64_t g, const ShiftSet& a,
                                       Complex s, Complex w, const TruncationPolicy& policy);

}  // namespace cuspmoment
