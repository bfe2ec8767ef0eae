#include "cuspmoment/chebyshev.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

#include "cuspmoment/errors.hpp"

namespace cuspmoment {

double chebyshev_U(int m, double t) {
    if (m < 0) throw PreconditionError("chebyshev_U: negative degree");
    if (!(std::abs(t) <= 1.0 + 1e-12)) throw PreconditionError("chebyshev_U: |t| > 1");
    return chebyshev_u(m, t);
}

LinearizationTable::LinearizationTable(std::vector<int> inputs,
                                       std::vector<std::uint64_t> coefficients)
    : inputs_(std::move(inputs)), coefficients_(std::move(coefficients)) {}

std::uint64_t LinearizationTable::coefficient(int l) const {
    if (l < 0 || l > degree()) return 0;
    return coefficients_[static_cast<std::size_t>(l)];
}

LinearizationTable linearize_product(std::span<const int> m) {
    if (m.empty()) throw PreconditionError("linearize_product: empty tuple");
    for (int mi : m)
        if (mi < 0) throw PreconditionError("linearize_product: negative index");
    std::vector<std::uint64_t> cur(static_cast<std::size_t>(m[0]) + 1, 0);
    cur.back() = 1;
    for (std::size_t i = 1; i < m.size(); ++i) {
        int b = m[i];
        std::vector<std::uint64_t> next(cur.size() + static_cast<std::size_t>(b), 0);
        for (std::size_t a = 0; a < cur.size(); ++a) {
            if (cur[a] == 0) continue;
            int ai = static_cast<int>(a);
            for (int j = std::abs(ai - b); j <= ai + b; j += 2) {
                auto& slot = next[static_cast<std::size_t>(j)];
                if (__builtin_add_overflow(slot, cur[a], &slot))
                    throw NumericError("linearization coefficient overflow");
            }
        }
        cur = std::move(next);
    }
    return LinearizationTable(std::vector<int>(m.begin(), m.end()), std::move(cur));
}

ChebyshevRule gauss_chebyshev_u(int n) {
    if (n < 1) throw PreconditionError("gauss_chebyshev_u: order must be positive");
    ChebyshevRule rule;
    rule.nodes.resize(static_cast<std::size_t>(n));
    rule.weights.resize(static_cast<std::size_t>(n));
    double h = std::numbers::pi / (n + 1);
    for (int j = 1; j <= n; ++j) {
        double s = std::sin(j * h);
        rule.nodes[static_cast<std::size_t>(j - 1)] = std::cos(j * h);
        rule.weights[static_cast<std::size_t>(j - 1)] = 2.0 / (n + 1) * s * s;
    }
    return rule;
}

double c_l_quadrature(int l, std::span<const int> m) {
    if (l < 0) throw PreconditionError("c_l_quadrature: negative index");
    int total = l;
    for (int mi : m) {
        if (mi < 0) throw PreconditionError("c_l_quadrature: negative index");
        total += mi;
    }
    // the rule in extended precision: products of U's reach 2^total at the
    // outer nodes while the result is a modest integer
    const int n = (total + 1) / 2 + 2;
    const long double h = std::numbers::pi_v<long double> / (n + 1);
    long double acc = 0.0L;
    for (int j = 1; j <= n; ++j) {
        long double s = std::sin(j * h);
        long double t = std::cos(j * h);
        long double v = chebyshev_u(l, t);
        for (int mi : m) v *= chebyshev_u(mi, t);
        acc += 2.0L / (n + 1) * s * s * v;
    }
    return static_cast<double>(acc);
}

}  // namespace cuspmoment
