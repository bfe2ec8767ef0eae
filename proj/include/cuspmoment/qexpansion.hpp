#pragma once

#include <boost/multiprecision/gmp.hpp>

#include <cstddef>
#include <span>
#include <vector>

namespace cuspmoment {

using BigInt = boost::multiprecision::mpz_int;
using BigRational = boost::multiprecision::mpq_rational;

struct QExpansion {
    int weight = 0;
    // a(0), ..., a(M - 1)
    std::vector<BigInt> coefficients;
};

// dim S_k(SL_2(Z)); 0 for odd or negative k.
int cusp_dimension(int k);

// First `length` coefficients of a * b (Kronecker substitution).
std::vector<BigInt> series_multiply(std::span<const BigInt> a, std::span<const BigInt> b,
                                    std::size_t length);

// Normalized E_4 or E_6 (constant term 1).
std::vector<BigInt> eisenstein_series(int weight, std::size_t length);
// (E_4^3 - E_6^2) / 1728 = q - 24 q^2 + ...
std::vector<BigInt> discriminant_series(std::size_t length);

// Echelonized integral basis of S_k: element j (1-based) has a(i) = delta_ij
// for 1 <= i <= dim. Empty when dim S_k = 0 or k is odd.
std::vector<QExpansion> miller_basis(int k, std::size_t length);

}  // namespace cuspmoment
