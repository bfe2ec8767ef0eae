#include "cuspmoment/arith.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <numeric>
#include <utility>

#include "cuspmoment/errors.hpp"

namespace cuspmoment {

int FactoredInt::order(std::uint64_t p) const {
    for (const auto& f : factors)
        if (f.prime == p) return f.exponent;
    return 0;
}

FactoredInt factorize(std::uint64_t n) {
    if (n == 0) throw PreconditionError("factorize: n must be positive");
    FactoredInt out;
    out.n = n;
    auto take = [&](std::uint64_t p) {
        int e = 0;
        while (n % p == 0) {
            n /= p;
            ++e;
        }
        if (e > 0) out.factors.push_back({p, e});
    };
    take(2);
    take(3);
    for (std::uint64_t p = 5; p * p <= n; p += 6) {
        take(p);
        take(p + 2);
    }
    if (n > 1) out.factors.push_back({n, 1});
    return out;
}

int mobius(std::uint64_t n) {
    auto f = factorize(n);
    for (const auto& pe : f.factors)
        if (pe.exponent > 1) return 0;
    return f.factors.size() % 2 == 0 ? 1 : -1;
}

std::uint64_t euler_phi(std::uint64_t n) {
    auto f = factorize(n);
    std::uint64_t phi = n;
    for (const auto& pe : f.factors) phi = phi / pe.prime * (pe.prime - 1);
    return phi;
}

bool is_prime(std::uint64_t n) {
    if (n < 2) return false;
    auto f = factorize(n);
    return f.factors.size() == 1 && f.factors[0].exponent == 1;
}

std::vector<std::uint64_t> primes_up_to(std::uint64_t n) {
    std::vector<std::uint64_t> primes;
    if (n < 2) return primes;
    std::vector<bool> composite(n + 1, false);
    for (std::uint64_t p = 2; p <= n; ++p) {
        if (composite[p]) continue;
        primes.push_back(p);
        for (std::uint64_t q = p * p; q <= n; q += p) composite[q] = true;
    }
    return primes;
}

std::vector<std::uint64_t> divisors(const FactoredInt& f) {
    std::vector<std::uint64_t> out{1};
    for (const auto& pe : f.factors) {
        std::size_t base = out.size();
        std::uint64_t pk = 1;
        for (int e = 1; e <= pe.exponent; ++e) {
            pk *= pe.prime;
            for (std::size_t i = 0; i < base; ++i) out.push_back(out[i] * pk);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::uint64_t mod_inverse(std::uint64_t a, std::uint64_t c) {
    if (c == 1) return 0;
    std::int64_t r0 = static_cast<std::int64_t>(c), r1 = static_cast<std::int64_t>(a % c);
    std::int64_t t0 = 0, t1 = 1;
    while (r1 != 0) {
        std::int64_t q = r0 / r1;
        std::tie(r0, r1) = std::make_pair(r1, r0 - q * r1);
        std::tie(t0, t1) = std::make_pair(t1, t0 - q * t1);
    }
    if (r0 != 1) throw PreconditionError("mod_inverse: arguments not coprime");
    if (t0 < 0) t0 += static_cast<std::int64_t>(c);
    return static_cast<std::uint64_t>(t0);
}

FactorSieve::FactorSieve(std::uint64_t limit) : spf_(limit + 1, 0) {
    if (limit >= 1) spf_[1] = 1;
    for (std::uint64_t i = 2; i <= limit; ++i) {
        if (spf_[i] != 0) continue;
        for (std::uint64_t j = i; j <= limit; j += i)
            if (spf_[j] == 0) spf_[j] = static_cast<std::uint32_t>(i);
    }
}

FactoredInt FactorSieve::factorize(std::uint64_t n) const {
    if (n == 0) throw PreconditionError("factorize: n must be positive");
    if (n >= spf_.size()) return cuspmoment::factorize(n);
    FactoredInt out;
    out.n = n;
    while (n > 1) {
        std::uint64_t p = spf_[n];
        int e = 0;
        while (n % p == 0) {
            n /= p;
            ++e;
        }
        out.factors.push_back({p, e});
    }
    return out;
}

KloostermanTable::KloostermanTable(std::uint64_t c) : c_(c), inverse_(c, 0), roots_(c) {
    if (c == 0) throw PreconditionError("Kloosterman modulus must be positive");
    for (std::uint64_t j = 0; j < c; ++j) {
        double phase = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(c);
        roots_[j] = {std::cos(phase), std::sin(phase)};
    }
    if (c == 1) {
        units_.push_back(0);
        return;
    }
    for (std::uint64_t a = 1; a < c; ++a) {
        if (std::gcd(a, c) != 1) continue;
        units_.push_back(a);
        inverse_[a] = mod_inverse(a, c);
    }
}

std::uint64_t KloostermanTable::reduce(std::int64_t x) const {
    auto c = static_cast<std::int64_t>(c_);
    auto r = x % c;
    return static_cast<std::uint64_t>(r < 0 ? r + c : r);
}

double KloostermanTable::sum(std::int64_t m, std::int64_t n) const {
    std::uint64_t mr = reduce(m), nr = reduce(n);
    std::complex<double> acc = 0.0;
    for (auto a : units_) {
        std::uint64_t j = (a * mr % c_ + inverse_[a] * nr % c_) % c_;
        acc += roots_[j];
    }
    if (std::abs(acc.imag()) > 1e-10 * static_cast<double>(c_))
        throw NumericError("Kloosterman sum has non-negligible imaginary part");
    return acc.real();
}

namespace {
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace

std::vector<double> KloostermanTable::row(std::int64_t n) const {
    std::vector<double> out(c_);
    if (c_ == 1) {
        out[0] = 1.0;
        return out;
    }
    std::uint64_t nr = reduce(n);
    auto* buf = fftw_alloc_complex(c_);
    fftw_plan plan;
    {
        std::lock_guard lock(planner_mutex());
        plan = fftw_plan_dft_1d(static_cast<int>(c_), buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    for (std::uint64_t a = 0; a < c_; ++a) buf[a][0] = buf[a][1] = 0.0;
    for (auto a : units_) {
        const auto& w = roots_[inverse_[a] * nr % c_];
        buf[a][0] = w.real();
        buf[a][1] = w.imag();
    }
    fftw_execute(plan);
    for (std::uint64_t r = 0; r < c_; ++r) out[r] = buf[r][0];
    {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(plan);
    }
    fftw_free(buf);
    return out;
}

double kloosterman(std::int64_t m, std::int64_t n, std::uint64_t c) {
    return KloostermanTable(c).sum(m, n);
}

std::int64_t ramanujan_sum(std::uint64_t c, std::uint64_t l) {
    if (c == 0 || l == 0) throw PreconditionError("ramanujan_sum: arguments must be positive");
    auto lf = factorize(l);
    std::int64_t out = 1;
    for (const auto& pe : factorize(c).factors) {
        int nu = lf.order(pe.prime);
        auto p = static_cast<std::int64_t>(pe.prime);
        std::int64_t pnu = 1;
        for (int i = 0; i < nu; ++i) pnu *= p;
        if (pe.exponent <= nu) {
            std::int64_t pc = 1;
            for (int i = 1; i < pe.exponent; ++i) pc *= p;
            out *= pc * (p - 1);
        } else if (pe.exponent == nu + 1) {
            out *= -pnu;
        } else {
            return 0;
        }
    }
    return out;
}

Complex shifted_divisor(std::uint64_t m, const ShiftSet& a) {
    return shifted_divisor(m, a.values());
}

Complex shifted_divisor(std::uint64_t m, std::span<const Complex> shifts) {
    if (m == 0) throw PreconditionError("shifted_divisor: m must be positive");
    if (shifts.empty()) throw PreconditionError("shifted_divisor: empty shift set");
    auto divs = divisors(factorize(m));
    std::map<std::pair<std::uint64_t, std::size_t>, Complex> memo;
    auto rec = [&](auto&& self, std::uint64_t n, std::size_t depth) -> Complex {
        if (depth + 1 == shifts.size()) return std::pow(static_cast<double>(n), -shifts[depth]);
        auto key = std::make_pair(n, depth);
        if (auto it = memo.find(key); it != memo.end()) return it->second;
        Complex acc = 0.0;
        for (auto d : divs) {
            if (d > n) break;
            if (n % d != 0) continue;
            acc += std::pow(static_cast<double>(d), -shifts[depth]) * self(self, n / d, depth + 1);
        }
        memo.emplace(key, acc);
        return acc;
    };
    return rec(rec, m, 0);
}

}  // namespace cuspmoment
