#include "cuspmoment/localfactors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <vector>

#include "cuspmoment/arith.hpp"
#include "cuspmoment/chebyshev.hpp"
#include "cuspmoment/detail/parallel.hpp"
#include "cuspmoment/errors.hpp"
#include "cuspmoment/special.hpp"

namespace cuspmoment {

namespace {

constexpr int max_quadrature_nodes = 1 << 14;
constexpr std::uint64_t small_prime_limit = 97;

struct NodeTable {
    std::vector<double> cosine;
    std::vector<double> sine_sq;
};

std::shared_ptr<const NodeTable> node_table(int n) {
    static std::mutex mutex;
    static std::map<int, std::shared_ptr<const NodeTable>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[n];
    if (!slot) {
        auto t = std::make_shared<NodeTable>();
        double h = std::numbers::pi / (n + 1);
        t->cosine.resize(static_cast<std::size_t>(n) + 1);
        t->sine_sq.resize(static_cast<std::size_t>(n) + 1);
        for (int j = 1; j <= n; ++j) {
            double s = std::sin(j * h);
            t->cosine[static_cast<std::size_t>(j)] = std::cos(j * h);
            t->sine_sq[static_cast<std::size_t>(j)] = s * s;
        }
        slot = std::move(t);
    }
    return slot;
}

std::shared_ptr<const std::vector<std::uint64_t>> primes_cached(std::uint64_t limit) {
    static std::mutex mutex;
    static std::map<std::uint64_t, std::shared_ptr<const std::vector<std::uint64_t>>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[limit];
    if (!slot) slot = std::make_shared<const std::vector<std::uint64_t>>(primes_up_to(limit));
    return slot;
}

Complex prime_power(std::uint64_t p, Complex e) {
    return std::exp(-e * std::log(static_cast<double>(p)));
}

using LocalFn = std::function<Complex(std::uint64_t, std::span<const Complex>, int)>;

// zeta-regularized product over all primes with kernels x_i = p^{-e_i}: the
// pairwise factors zeta(e_i + e_j) are pulled out and each local factor is
// multiplied by prod_{i<j} (1 - x_i x_j).
EulerProduct regularized_product(std::span<const Complex> e, const LocalFn& local,
                                 const std::vector<std::uint64_t>& special,
                                 const TruncationPolicy& policy) {
    policy.validate();
    const std::size_t r = e.size();
    for (const auto& ei : e)
        if (!(ei.real() > 0.0))
            throw PreconditionError("Euler product: kernel |p^{-s-alpha}| >= 1 (Re(s + alpha) <= 0)");
    double pair_min = 1e300;
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = i + 1; j < r; ++j) {
            if (std::abs(e[i] + e[j] - 1.0) < 1e-10)
                throw PreconditionError("Euler product: zeta pole at a coinciding shift pair");
            pair_min = std::min(pair_min, (e[i] + e[j]).real());
        }
    // decay exponent of the regularized residual
    double sigma = 1e300;
    if (r >= 3) {
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < r; ++j)
                for (std::size_t k = j + 1; k < r; ++k)
                    if (i != j && i != k) sigma = std::min(sigma, (2.0 * e[i] + e[j] + e[k]).real());
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = i + 1; j < r; ++j)
                for (std::size_t k = j + 1; k < r; ++k)
                    for (std::size_t l = k + 1; l < r; ++l)
                        sigma = std::min(sigma, (e[i] + e[j] + e[k] + e[l]).real());
        if (!(sigma > 1.0))
            throw PreconditionError("Euler product: outside the regularized convergence region");
    } else if (r == 2) {
        sigma = 2.0 * pair_min;
    } else {
        sigma = 2.0 * e[0].real();
    }
    double decay = std::max(sigma, 1.5);

    Complex zeta_part = 1.0;
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = i + 1; j < r; ++j) zeta_part *= zeta_continued(e[i] + e[j]);

    auto primes = primes_cached(policy.prime_cutoff);
    std::vector<std::uint64_t> all(primes->begin(), primes->end());
    for (auto p : special)
        if (p > policy.prime_cutoff) all.push_back(p);
    std::sort(all.begin(), all.end());
    all.erase(std::unique(all.begin(), all.end()), all.end());

    std::vector<Complex> factors(all.size());
    detail::parallel_for(all.size(), policy.threads, [&](std::size_t idx) {
        std::uint64_t p = all[idx];
        std::vector<Complex> x(r);
        for (std::size_t i = 0; i < r; ++i) x[i] = prime_power(p, e[i]);
        int min_nodes = p <= small_prime_limit ? policy.small_prime_nodes : policy.quadrature_nodes;
        Complex f = local(p, x, min_nodes);
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = i + 1; j < r; ++j) f *= 1.0 - x[i] * x[j];
        factors[idx] = f;
    });

    Complex product = zeta_part;
    double fit = 0.0;
    double half = 0.5 * static_cast<double>(policy.prime_cutoff);
    // deviations at the rounding level carry no truncation information
    constexpr double noise = 64 * std::numeric_limits<double>::epsilon();
    for (std::size_t idx = 0; idx < all.size(); ++idx) {
        product *= factors[idx];
        auto p = static_cast<double>(all[idx]);
        bool is_special = std::find(special.begin(), special.end(), all[idx]) != special.end();
        if (p > half && p <= static_cast<double>(policy.prime_cutoff) && !is_special)
            fit = std::max(fit, std::max(std::abs(factors[idx] - 1.0) - noise, 0.0) * std::pow(p, decay));
    }
    double cutoff = static_cast<double>(policy.prime_cutoff);
    double tail_rel = fit * std::pow(cutoff, 1.0 - decay) / ((decay - 1.0) * std::log(cutoff));
    return {product, std::abs(product) * tail_rel, decay};
}

std::vector<std::uint64_t> prime_divisors(std::uint64_t n) {
    std::vector<std::uint64_t> out;
    for (const auto& pe : factorize(n).factors) out.push_back(pe.prime);
    return out;
}

}  // namespace

Complex c_kernel(Complex x, double theta) {
    if (!(std::abs(x) < 1.0)) throw PreconditionError("c_kernel: requires |X| < 1");
    return 1.0 / (1.0 - 2.0 * x * std::cos(theta) + x * x);
}

SatoTateIntegral sato_tate_integral(std::span<const Complex> x, int nu, bool with_y, Complex y,
                                    int min_nodes, int initial_nodes) {
    if (nu < 0) throw PreconditionError("sato_tate_integral: negative index");
    for (const auto& xi : x)
        if (!(std::abs(xi) < 1.0)) throw PreconditionError("sato_tate_integral: kernel |X| >= 1");
    if (with_y && !(std::abs(y) < 1.0)) throw PreconditionError("sato_tate_integral: |y| >= 1");
    if (initial_nodes < 1) throw PreconditionError("sato_tate_integral: bad initial order");

    std::vector<Complex> two_x(x.size()), x_sq(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        two_x[i] = 2.0 * x[i];
        x_sq[i] = 1.0 + x[i] * x[i];
    }
    Complex two_y = 2.0 * y, y_sq = 1.0 + y * y;
    auto f = [&](double t) -> Complex {
        Complex denom = 1.0;
        for (std::size_t i = 0; i < x.size(); ++i) denom *= x_sq[i] - two_x[i] * t;
        double u_prev = 0.0, u = 1.0;
        for (int j = 1; j <= nu; ++j) {
            double next = 2.0 * t * u - u_prev;
            u_prev = u;
            u = next;
        }
        Complex top = u - y * u_prev;
        if (with_y) denom *= y_sq - two_y * t;
        return top / denom;
    };

    int n = initial_nodes;
    while (n < min_nodes) n = 2 * n + 1;
    if (n > max_quadrature_nodes) throw NumericError("sato_tate_integral: node budget exceeded");
    auto table = node_table(n);
    Complex sum = 0.0;
    double mass = 0.0;
    for (int j = 1; j <= n; ++j) {
        auto idx = static_cast<std::size_t>(j);
        Complex v = table->sine_sq[idx] * f(table->cosine[idx]);
        sum += v;
        mass += std::abs(v);
    }
    Complex estimate = 2.0 / (n + 1) * sum;
    double scale = 2.0 / (n + 1) * mass;
    int used = n;
    while (true) {
        int next = 2 * n + 1;
        if (next > max_quadrature_nodes)
            throw NumericError("sato_tate_integral: no convergence within 2^14 nodes");
        auto fine = node_table(next);
        Complex odd = 0.0;
        for (int j = 1; j <= next; j += 2) {
            auto idx = static_cast<std::size_t>(j);
            odd += fine->sine_sq[idx] * f(fine->cosine[idx]);
        }
        Complex refined = 0.5 * estimate + odd / static_cast<double>(n + 1);
        used += n + 1;
        double change = std::abs(refined - estimate);
        estimate = refined;
        n = next;
        if (change <= 1e-13 * std::abs(refined) + 1e-16 * scale) break;
    }
    return {estimate, used};
}

Complex local_factor(std::uint64_t p, int nu, const ShiftSet& a, Complex s,
                     const TruncationPolicy& policy) {
    return local_factor(p, nu, a.values(), s, policy);
}

Complex local_factor(std::uint64_t p, int nu, std::span<const Complex> shifts, Complex s,
                     const TruncationPolicy& policy) {
    if (p < 2) throw PreconditionError("local_factor: p must be prime");
    std::vector<Complex> x;
    for (const auto& a : shifts) {
        if (!((s + a).real() > 0.0)) throw PreconditionError("local_factor: Re(s + alpha) <= 0");
        x.push_back(prime_power(p, s + a));
    }
    int min_nodes = p <= small_prime_limit ? policy.small_prime_nodes : policy.quadrature_nodes;
    return sato_tate_integral(x, nu, false, 0.0, min_nodes, policy.quadrature_nodes).value;
}

EulerProduct f_A(std::uint64_t m, Complex s, const ShiftSet& a, const TruncationPolicy& policy) {
    return f_A(m, s, a.values(), policy);
}

EulerProduct f_A(std::uint64_t m, Complex s, std::span<const Complex> shifts,
                 const TruncationPolicy& policy) {
    if (m == 0) throw PreconditionError("f_A: m must be positive");
    if (shifts.empty()) throw PreconditionError("f_A: empty shift set");
    auto mf = factorize(m);
    std::vector<Complex> e;
    for (const auto& a : shifts) e.push_back(s + a);
    auto local = [&](std::uint64_t p, std::span<const Complex> x, int min_nodes) {
        return sato_tate_integral(x, mf.order(p), false, 0.0, min_nodes, policy.quadrature_nodes).value;
    };
    return regularized_product(e, local, prime_divisors(m), policy);
}

EulerProduct g_l(std::uint64_t l, const ShiftSet& a, const TruncationPolicy& policy) {
    return f_A(l, 0.5, a.values(), policy);
}

EulerProduct g_l(std::uint64_t l, std::span<const Complex> shifts, const TruncationPolicy& policy) {
    return f_A(l, 0.5, shifts, policy);
}

namespace {

void check_series_region(Complex s, Complex w) {
    if (!(s.real() > 0.5)) throw PreconditionError("twisted series: requires Re(s) > 1/2");
    if (!(w.real() > 0.0)) throw PreconditionError("twisted series: requires Re(w) > 0");
}

}  // namespace

EulerProduct twisted_series(const ShiftSet& a, Complex s, Complex w, std::uint64_t q,
                            const TruncationPolicy& policy) {
    check_series_region(s, w);
    if (q == 0) throw PreconditionError("twisted_series: modulus must be positive");
    std::vector<Complex> e;
    for (const auto& al : a) e.push_back(s + al);
    const std::size_t r = e.size();
    e.push_back(w);
    auto local = [&](std::uint64_t p, std::span<const Complex> x, int min_nodes) {
        auto xs = x.first(r);
        if (q % p == 0)
            return sato_tate_integral(xs, 0, false, 0.0, min_nodes, policy.quadrature_nodes).value;
        return sato_tate_integral(xs, 0, true, x[r], min_nodes, policy.quadrature_nodes).value;
    };
    return regularized_product(e, local, prime_divisors(q), policy);
}

EulerProduct coprime_restricted_series(std::uint64_t c, std::uint64_t g, const ShiftSet& a,
                                       Complex s, Complex w, const TruncationPolicy& policy) {
    check_series_region(s, w);
    if (c == 0 || g == 0 || c % g != 0)
        throw PreconditionError("coprime_restricted_series: g must divide c");
    std::uint64_t h = c / g;
    auto gf = factorize(g);
    std::vector<Complex> e;
    for (const auto& al : a) e.push_back(s + al);
    const std::size_t r = e.size();
    e.push_back(w);
    auto local = [&](std::uint64_t p, std::span<const Complex> x, int min_nodes) {
        auto xs = x.first(r);
        int nu = gf.order(p);
        // p | c/g: only m coprime to p survive (factor B); p | g otherwise: shifted index (factor C)
        if (h % p == 0)
            return sato_tate_integral(xs, nu, false, 0.0, min_nodes, policy.quadrature_nodes).value;
        return sato_tate_integral(xs, nu, true, x[r], min_nodes, policy.quadrature_nodes).value;
    };
    return regularized_product(e, local, prime_divisors(c), policy);
}

}  // namespace cuspmoment
