#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "cuspmoment/shifts.hpp"

namespace cuspmoment {

struct PrimePower {
    std::uint64_t prime;
    int exponent;

    bool operator==(const PrimePower&) const = default;
};

struct FactoredInt {
    std::uint64_t n = 1;
    std::vector<PrimePower> factors;

    // Exponent of p in n (0 when p does not divide n).
    int order(std::uint64_t p) const;
};

FactoredInt factorize(std::uint64_t n);
int mobius(std::uint64_t n);
std::uint64_t euler_phi(std::uint64_t n);

bool is_prime(std::uint64_t n);
std::vector<std::uint64_t> primes_up_to(std::uint64_t n);
// All positive divisors, ascending.
std::vector<std::uint64_t> divisors(const FactoredInt& f);
// Inverse of a modulo c; requires gcd(a, c) = 1.
std::uint64_t mod_inverse(std::uint64_t a, std::uint64_t c);

// Smallest-prime-factor table for fast repeated factorization.
class FactorSieve {
public:
    explicit FactorSieve(std::uint64_t limit);

    std::uint64_t limit() const { return spf_.size() - 1; }
    FactoredInt factorize(std::uint64_t n) const;
    bool is_prime(std::uint64_t n) const { return n >= 2 && spf_.at(n) == n; }

private:
    std::vector<std::uint32_t> spf_;
};

// Per-modulus tables: inverses mod c and the roots e(j/c).
class KloostermanTable {
public:
    explicit KloostermanTable(std::uint64_t c);

    std::uint64_t modulus() const { return c_; }
    // S(m, n; c) by direct summation.
    double sum(std::int64_t m, std::int64_t n) const;
    // S(r, n; c) for r = 0, ..., c-1.
    std::vector<double> row(std::int64_t n) const;

private:
    std::uint64_t reduce(std::int64_t x) const;

    std::uint64_t c_;
    std::vector<std::uint64_t> units_;
    std::vector<std::uint64_t> inverse_;
    std::vector<std::complex<double>> roots_;
};

double kloosterman(std::int64_t m, std::int64_t n, std::uint64_t c);

std::int64_t ramanujan_sum(std::uint64_t c, std::uint64_t l);

// tau_A(m): sum over ordered factorizations m = m_1...m_r of prod m_i^{-alpha_i}.
Complex shifted_divisor(std::uint64_t m, const ShiftSet& a);
Complex shifted_divisor(std::uint64_t m, std::span<const Complex> shifts);

}  // namespace cuspmoment
