// Local residue identity and its telescoping structure, evaluated in
// 100-digit complex arithmetic or exactly over the rationals.
#include <boost/multiprecision/cpp_complex.hpp>
#include <cmath>
#include <numbers>
#include <vector>

#include "cuspmoment/errors.hpp"
#include "cuspmoment/recipe.hpp"

namespace cuspmoment {

namespace {

using Wide = boost::multiprecision::cpp_complex_100;

Wide widen(Complex z) { return Wide(z.real(), z.imag()); }
Complex narrow(const Wide& z) {
    return {static_cast<double>(z.real()), static_cast<double>(z.imag())};
}
double magnitude(const Wide& z) { return static_cast<double>(abs(z)); }

template <class T>
T ipow(const T& base, int e) {
    T out(1);
    if (e < 0) return T(1) / ipow(base, -e);
    for (int i = 0; i < e; ++i) out *= base;
    return out;
}

template <class T>
std::vector<T> chebyshev_table(int n, const T& t) {
    std::vector<T> u(static_cast<std::size_t>(std::max(n, 1)) + 1);
    u[0] = T(1);
    u[1] = T(2) * t;
    for (std::size_t m = 2; m < u.size(); ++m) u[m] = T(2) * t * u[m - 1] - u[m - 2];
    return u;
}

// y^{2(nu+1)} / x^{2nu}
template <class T>
T edge(int nu, const T& x, const T& y) {
    return ipow(y, 2 * (nu + 1)) / ipow(x, 2 * nu);
}

// A_nu
template <class T>
T a_top(int nu, const T& x, const T& y) {
    T q = y / x, omx2 = T(1) - x * x;
    T out = T(1) - edge(nu, x, y);
    for (int c = 1; c <= nu; ++c) out += omx2 * ipow(q, 2 * c);
    return out;
}

// A_{i,nu}; i = nu is the special top coefficient, i < nu (including -1)
// uses the general formula
template <class T>
T a_coef(int i, int nu, const T& x, const T& y) {
    T q = y / x, r = x / y, omx2 = T(1) - x * x;
    if (i == nu) return y * y / omx2 * ipow(q, nu);
    T mid(0);
    for (int c = i + 1; c <= nu; ++c) mid += ipow(q, 2 * c);
    return -(y * y) * ipow(q, i) - omx2 * ipow(r, i) * mid + edge(nu, x, y) * ipow(r, i);
}

template <class T>
T identity_residual(const T& x, const T& y, const T& t, int nu) {
    T r = x / y, q = y / x, omx2 = T(1) - x * x;
    auto u = chebyshev_table(nu + 1, t);
    T big = edge(nu, x, y);
    T b1 = T(1) - big;
    for (int c = 1; c <= nu; ++c) b1 += omx2 * ipow(q, 2 * c);

    T b2(0);
    for (int c = 1; c <= nu; ++c) b2 -= y * y * ipow(q, c - 1) * u[c - 1];
    for (int c = 1; c <= nu; ++c) {
        T inner(0);
        for (int m = 0; m < c; ++m) inner += ipow(r, m) * u[m];
        b2 -= omx2 * ipow(q, 2 * c) * inner;
    }
    b2 += big * x * x / omx2 * ipow(r, nu) * u[nu];
    T partial(0);
    for (int m = 0; m <= nu; ++m) partial += ipow(r, m) * u[m];
    b2 += big * partial;

    T cinv_r = T(1) - T(2) * r * t + r * r;
    T lhs = ipow(r, nu) * (b1 + cinv_r * b2);
    T rhs = (T(1) - T(2) * x * y * t + x * x * y * y) * u[nu] / omx2;
    return lhs - rhs;
}

template <class T>
T telescoping_terms(int nu, int i, const T& x, const T& y, T (&parts)[3]) {
    T r = x / y;
    parts[0] = (T(1) + r * r) * a_coef(i, nu, x, y);
    parts[1] = r * a_coef(i - 1, nu, x, y);
    parts[2] = r * a_coef(i + 1, nu, x, y);
    return parts[0] - parts[1] - parts[2];
}

void check_identity_inputs(double x, Complex y, int nu) {
    if (nu < 0) throw PreconditionError("identity: nu must be >= 0");
    if (!(x > 0.0 && x < 1.0)) throw PreconditionError("identity: x must lie in (0, 1)");
    double ay = std::abs(y);
    if (!(ay > 0.5 && ay < 1.5)) throw PreconditionError("identity: |y| must lie in (0.5, 1.5)");
}

void check_theta(double theta) {
    if (!(theta > 0.0 && theta < std::numbers::pi)) throw PreconditionError("identity: theta must lie in (0, pi)");
}

void check_denominators(double x, Complex y, double t) {
    constexpr double floor = 1e-6;
    Complex r = x / y;
    if (std::abs(1.0 - x * x) < floor || std::abs(1.0 - 2.0 * r * t + r * r) < floor ||
        std::abs(1.0 - 2.0 * x * y * t + x * x * y * y) < floor)
        throw PreconditionError("identity: denominator below 1e-6");
}

void check_index(int nu, int i) {
    if (i < 0 || i >= nu - 1) throw PreconditionError("telescoping: need 0 <= i < nu - 1");
}

}  // namespace

double verify_one_swap_identity(double x, Complex y, double theta, int nu) {
    check_identity_inputs(x, y, nu);
    check_theta(theta);
    double t = std::cos(theta);
    check_denominators(x, y, t);
    return magnitude(identity_residual(Wide(x), widen(y), Wide(t), nu));
}

BigRational one_swap_identity_exact(const BigRational& x, const BigRational& y,
                                    const BigRational& t, int nu) {
    if (nu < 0) throw PreconditionError("identity: nu must be >= 0");
    if (x == 0 || y == 0 || x * x == 1) throw PreconditionError("identity: singular rational input");
    BigRational r = x / y;
    if (1 - 2 * r * t + r * r == 0 || 1 - 2 * x * y * t + x * x * y * y == 0)
        throw PreconditionError("identity: singular rational input");
    return identity_residual(x, y, t, nu);
}

double telescoping_check(int nu, int i, double x, Complex y, double theta) {
    check_identity_inputs(x, y, nu);
    check_theta(theta);
    check_index(nu, i);
    Wide parts[3];
    return magnitude(telescoping_terms(nu, i, Wide(x), widen(y), parts));
}

double telescoping_check_relative(int nu, int i, double x, Complex y) {
    check_identity_inputs(x, y, nu);
    check_index(nu, i);
    Wide parts[3];
    double res = magnitude(telescoping_terms(nu, i, Wide(x), widen(y), parts));
    double scale = std::max({magnitude(parts[0]), magnitude(parts[1]), magnitude(parts[2])});
    return scale > 0.0 ? res / scale : res;
}

BigRational telescoping_residual_exact(int nu, int i, const BigRational& x, const BigRational& y) {
    check_index(nu, i);
    if (x == 0 || y == 0 || x * x == 1) throw PreconditionError("telescoping: singular rational input");
    BigRational parts[3];
    return telescoping_terms(nu, i, x, y, parts);
}

BCoefficients b_coefficients(int nu, double x, Complex y) {
    if (nu < 3) throw PreconditionError("b_coefficients: nu must be >= 3");
    check_identity_inputs(x, y, nu);
    Wide wx(x), wy = widen(y);
    Wide r = wx / wy, lead = ipow(r, nu), rr = Wide(1) + r * r;
    auto a = [&](int i) { return a_coef(i, nu, wx, wy); };
    BCoefficients b;
    b.b_next = narrow(-lead * r * a(nu));
    b.b_nu = narrow(lead * (rr * a(nu) - r * a(nu - 1)));
    b.b_prev = narrow(lead * (rr * a(nu - 1) - r * a(nu) - r * a(nu - 2)));
    b.b1 = narrow(lead * (rr * a(1) - r * a(0) - r * a(2)));
    b.b0 = narrow(lead * (a_top(nu, wx, wy) + rr * a(0) - r * a(1)));
    return b;
}

BCoefficients b_coefficients_closed_form(double x, Complex y) {
    double omx2 = 1.0 - x * x;
    Complex side = -x * y / omx2;
    return {side, (1.0 + x * x * y * y) / omx2, side, 0.0, 0.0};
}

}  // namespace cuspmoment
