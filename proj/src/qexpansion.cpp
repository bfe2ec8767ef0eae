#include "cuspmoment/qexpansion.hpp"

#include <gmp.h>

#include <algorithm>
#include <bit>

#include "cuspmoment/errors.hpp"

namespace cuspmoment {

namespace {

static_assert(GMP_NAIL_BITS == 0, "limb packing assumes nail-free limbs");

std::size_t max_bits(std::span<const BigInt> a) {
    std::size_t bits = 0;
    for (const auto& x : a)
        if (x != 0) bits = std::max(bits, mpz_sizeinbase(x.backend().data(), 2));
    return bits;
}

// Evaluates a signed series at 2^(limbs * GMP_NUMB_BITS).
void pack(std::span<const BigInt> a, std::size_t limbs, mpz_t out) {
    std::vector<mp_limb_t> pos(a.size() * limbs, 0), neg(a.size() * limbs, 0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        const auto* z = a[i].backend().data();
        int sign = mpz_sgn(z);
        if (sign == 0) continue;
        auto& dst = sign > 0 ? pos : neg;
        std::size_t size = mpz_size(z);
        for (std::size_t j = 0; j < size; ++j) dst[i * limbs + j] = mpz_getlimbn(z, j);
    }
    mpz_t n;
    mpz_init(n);
    mpz_import(out, pos.size(), -1, sizeof(mp_limb_t), 0, 0, pos.data());
    mpz_import(n, neg.size(), -1, sizeof(mp_limb_t), 0, 0, neg.data());
    mpz_sub(out, out, n);
    mpz_clear(n);
}

std::vector<BigInt> unpack(const mpz_t value, std::size_t length, std::size_t limbs) {
    std::vector<BigInt> out(length);
    int sign = mpz_sgn(value);
    if (sign == 0) return out;
    std::size_t count = mpz_size(value);
    std::vector<mp_limb_t> raw(std::max(count, length * limbs) + limbs, 0);
    mpz_export(raw.data(), &count, -1, sizeof(mp_limb_t), 0, 0, value);
    mpz_t field, half, full;
    mpz_inits(field, half, full, nullptr);
    std::size_t width = limbs * GMP_NUMB_BITS;
    mpz_setbit(half, width - 1);
    mpz_setbit(full, width);
    bool carry = false;
    for (std::size_t i = 0; i < length; ++i) {
        mpz_import(field, limbs, -1, sizeof(mp_limb_t), 0, 0, raw.data() + i * limbs);
        if (carry) mpz_add_ui(field, field, 1);
        carry = mpz_cmp(field, half) >= 0;
        if (carry) mpz_sub(field, field, full);
        if (sign < 0) mpz_neg(field, field);
        mpz_set(out[i].backend().data(), field);
    }
    mpz_clears(field, half, full, nullptr);
    return out;
}

std::vector<BigInt> sigma_series(int power, std::size_t length, long scale) {
    std::vector<unsigned __int128> sigma(length, 0);
    for (std::size_t d = 1; d < length; ++d) {
        unsigned __int128 dp = 1;
        for (int i = 0; i < power; ++i) dp *= d;
        for (std::size_t n = d; n < length; n += d) sigma[n] += dp;
    }
    std::vector<BigInt> out(length);
    if (length > 0) out[0] = 1;
    for (std::size_t n = 1; n < length; ++n) {
        BigInt v = static_cast<unsigned long long>(sigma[n] >> 64);
        v <<= 64;
        v += static_cast<unsigned long long>(sigma[n]);
        out[n] = v * scale;
    }
    return out;
}

}  // namespace

int cusp_dimension(int k) {
    if (k < 0 || k % 2 != 0) return 0;
    int d = k / 12;
    if (k % 12 == 2) --d;
    return std::max(d, 0);
}

std::vector<BigInt> series_multiply(std::span<const BigInt> a, std::span<const BigInt> b,
                                    std::size_t length) {
    a = a.first(std::min(a.size(), length));
    b = b.first(std::min(b.size(), length));
    if (a.empty() || b.empty() || length == 0) return std::vector<BigInt>(length);
    std::size_t terms = std::min(a.size(), b.size());
    std::size_t bits = max_bits(a) + max_bits(b) + std::bit_width(terms) + 2;
    std::size_t limbs = bits / GMP_NUMB_BITS + 1;
    mpz_t pa, pb;
    mpz_inits(pa, pb, nullptr);
    pack(a, limbs, pa);
    pack(b, limbs, pb);
    mpz_mul(pa, pa, pb);
    auto out = unpack(pa, length, limbs);
    mpz_clears(pa, pb, nullptr);
    return out;
}

std::vector<BigInt> eisenstein_series(int weight, std::size_t length) {
    if (weight == 4) return sigma_series(3, length, 240);
    if (weight == 6) return sigma_series(5, length, -504);
    throw PreconditionError("eisenstein_series: weight must be 4 or 6");
}

std::vector<BigInt> discriminant_series(std::size_t length) {
    auto e4 = eisenstein_series(4, length);
    auto e6 = eisenstein_series(6, length);
    auto e4sq = series_multiply(e4, e4, length);
    auto e4cube = series_multiply(e4sq, e4, length);
    auto e6sq = series_multiply(e6, e6, length);
    std::vector<BigInt> out(length);
    for (std::size_t n = 0; n < length; ++n) {
        BigInt diff = e4cube[n] - e6sq[n];
        if (diff % 1728 != 0) throw NumericError("discriminant: inexact division");
        out[n] = diff / 1728;
    }
    return out;
}

std::vector<QExpansion> miller_basis(int k, std::size_t length) {
    int d = cusp_dimension(k);
    if (d == 0) return {};
    auto dim = static_cast<std::size_t>(d);
    if (length < dim + 1) throw PreconditionError("miller_basis: coefficient bound too small");
    auto e4 = eisenstein_series(4, length);
    auto e6 = eisenstein_series(6, length);
    auto delta = discriminant_series(length);
    auto e6sq = series_multiply(e6, e6, length);

    std::vector<BigInt> one(length);
    one[0] = 1;
    std::vector<BigInt> lead;
    switch (k - 12 * d) {
        case 0: lead = one; break;
        case 4: lead = e4; break;
        case 6: lead = e6; break;
        case 8: lead = series_multiply(e4, e4, length); break;
        case 10: lead = series_multiply(e4, e6, length); break;
        case 14: lead = series_multiply(series_multiply(e4, e4, length), e6, length); break;
        default: throw NumericError("miller_basis: unexpected residual weight");
    }

    // delta_pow[j] = Delta^j, e6_pow[i] = E6^{2i}
    std::vector<std::vector<BigInt>> delta_pow(dim + 1), e6_pow(dim);
    delta_pow[1] = delta;
    for (std::size_t j = 2; j <= dim; ++j) delta_pow[j] = series_multiply(delta_pow[j - 1], delta, length);
    e6_pow[0] = one;
    for (std::size_t i = 1; i < dim; ++i) e6_pow[i] = series_multiply(e6_pow[i - 1], e6sq, length);

    std::vector<QExpansion> basis(dim);
    for (std::size_t j = 1; j <= dim; ++j) {
        auto g = series_multiply(delta_pow[j], e6_pow[dim - j], length);
        basis[j - 1] = {k, series_multiply(g, lead, length)};
    }
    for (std::size_t j = dim; j-- > 0;) {
        auto& g = basis[j].coefficients;
        for (std::size_t i = j + 1; i < dim; ++i) {
            BigInt c = g[i + 1];
            if (c == 0) continue;
            const auto& h = basis[i].coefficients;
            for (std::size_t n = i + 1; n < length; ++n) g[n] -= c * h[n];
        }
    }
    return basis;
}

}  // namespace cuspmoment
