#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace cuspmoment {

// U_m(t) by the three-term recurrence; no domain check, any numeric type.
template <class T>
T chebyshev_u(int m, const T& t) {
    T prev(1);
    if (m == 0) return prev;
    T cur = t + t;
    for (int j = 2; j <= m; ++j) {
        T next = (t + t) * cur - prev;
        prev = cur;
        cur = next;
    }
    return cur;
}

double chebyshev_U(int m, double t);

// c_l(m_1, ..., m_r) with U_{m_1}...U_{m_r} = sum_l c_l U_l.
class LinearizationTable {
public:
    LinearizationTable(std::vector<int> inputs, std::vector<std::uint64_t> coefficients);

    const std::vector<int>& inputs() const { return inputs_; }
    // Index l runs over 0..degree().
    const std::vector<std::uint64_t>& coefficients() const { return coefficients_; }
    std::uint64_t coefficient(int l) const;
    int degree() const { return static_cast<int>(coefficients_.size()) - 1; }

private:
    std::vector<int> inputs_;
    std::vector<std::uint64_t> coefficients_;
};

LinearizationTable linearize_product(std::span<const int> m);

// Gauss-Chebyshev rule of the second kind normalized to the Sato-Tate measure
// (2/pi) sin^2(theta) d(theta): exact for polynomials of degree <= 2n - 1.
struct ChebyshevRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};
ChebyshevRule gauss_chebyshev_u(int n);

double c_l_quadrature(int l, std::span<const int> m);

}  // namespace cuspmoment
