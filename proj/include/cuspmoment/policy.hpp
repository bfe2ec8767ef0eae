#pragma once

#include <cstdint>

namespace cuspmoment {

struct TruncationPolicy {
    std::uint64_t prime_cutoff = 1000;
    // Initial Gauss-Chebyshev order; orders grow as n -> 2n + 1.
    int quadrature_nodes = 16;
    // Minimum order for primes p <= 97.
    int small_prime_nodes = 256;
    double epsilon = 0.25;
    double contour_height = 600.0;
    double contour_tol = 1e-10;
    // Mantissa bits for the eigen-decomposition step.
    int precision_bits = 256;
    // Bound on the discarded Kloosterman-Bessel tail per (m, l) pair.
    double kloosterman_tol = 1e-14;
    unsigned threads = 1;

    void validate() const;
    bool operator==(const TruncationPolicy&) const = default;
};

}  // namespace cuspmoment
