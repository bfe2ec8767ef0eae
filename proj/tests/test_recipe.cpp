#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "cuspmoment/errors.hpp"
#include "cuspmoment/recipe.hpp"
#include "cuspmoment/special.hpp"

using namespace cuspmoment;
constexpr double pi = std::numbers::pi;

namespace {

// Shift sets used here have closed-form arithmetic factors, so a short
// Euler product is already exact.
TruncationPolicy fast_policy() {
    TruncationPolicy p;
    p.prime_cutoff = 100;
    return p;
}

Complex ik(int k) { return (k / 2) % 2 == 0 ? 1.0 : -1.0; }

}  // namespace

TEST_CASE("identity at fixed points") {
    for (int nu = 0; nu <= 2; ++nu) CHECK(verify_one_swap_identity(0.4, Complex(0.8, 0.1), 0.9, nu) <= 1e-12);
    CHECK(verify_one_swap_identity(0.3, std::polar(0.9, 0.2), 1.1, 7) <= 1e-10);
}

TEST_CASE("identity randomized") {
    std::mt19937_64 rng(12345);
    std::uniform_real_distribution<double> ux(0.05, 0.95), urho(0.55, 1.45), uphi(-0.6, 0.6), uth(0.05, pi - 0.05);
    double worst = 0.0;
    int done = 0;
    while (done < 300) {
        double x = ux(rng), th = uth(rng);
        Complex y = std::polar(urho(rng), uphi(rng));
        int nu = static_cast<int>(rng() % 13);
        try {
            worst = std::max(worst, verify_one_swap_identity(x, y, th, nu));
            ++done;
        } catch (const PreconditionError&) {
        }
    }
    CHECK(worst <= 1e-10);
}

TEST_CASE("identity is exact over the rationals") {
    BigRational x(3, 10), y(9, 10), t(1, 3);
    for (int nu = 0; nu <= 9; ++nu) CHECK(one_swap_identity_exact(x, y, t, nu) == 0);
    CHECK(one_swap_identity_exact(BigRational(1, 7), BigRational(5, 4), BigRational(-2, 5), 12) == 0);
}

TEST_CASE("identity preconditions") {
    CHECK_THROWS_AS(verify_one_swap_identity(1.2, 0.9, 1.0, 2), PreconditionError);
    CHECK_THROWS_AS(verify_one_swap_identity(0.5, 0.3, 1.0, 2), PreconditionError);
    CHECK_THROWS_AS(verify_one_swap_identity(0.5, 0.9, 3.5, 2), PreconditionError);
    CHECK_THROWS_AS(verify_one_swap_identity(0.5, 0.9, 1.0, -1), PreconditionError);
    // x/y = 1 at theta = 0 makes 1 - 2 (x/y) cos + (x/y)^2 vanish; near it the guard fires
    CHECK_THROWS_AS(verify_one_swap_identity(0.6, 0.6, 1e-7, 2), PreconditionError);
}

TEST_CASE("telescoping") {
    CHECK(telescoping_check(5, 2, 0.4, 0.8, 1.0) <= 1e-12);
    CHECK(telescoping_check(3, 0, 0.4, 0.8, 1.0) <= 1e-12);
    for (int nu = 2; nu <= 12; ++nu)
        for (int i = 0; i < nu - 1; ++i) {
            CHECK(telescoping_check(nu, i, 0.35, std::polar(1.2, -0.3), 2.0) <= 1e-12);
            CHECK(telescoping_check_relative(nu, i, 0.35, std::polar(1.2, -0.3)) <= 1e-25);
            CHECK(telescoping_residual_exact(nu, i, BigRational(2, 5), BigRational(4, 5)) == 0);
        }
    CHECK_THROWS_AS(telescoping_check(5, 4, 0.4, 0.8, 1.0), PreconditionError);
    CHECK_THROWS_AS(telescoping_check(5, -1, 0.4, 0.8, 1.0), PreconditionError);
}

TEST_CASE("B coefficients") {
    for (double x : {0.2, 0.6})
        for (Complex y : {Complex(0.8), std::polar(1.3, 0.4)}) {
            auto closed = b_coefficients_closed_form(x, y);
            CHECK(std::abs(closed.b_next - -x * y / (1 - x * x)) < 1e-15);
            for (int nu = 3; nu <= 12; ++nu) {
                auto b = b_coefficients(nu, x, y);
                CHECK(std::abs(b.b_next - closed.b_next) < 1e-12);
                CHECK(std::abs(b.b_nu - closed.b_nu) < 1e-12);
                CHECK(std::abs(b.b_prev - closed.b_prev) < 1e-12);
                CHECK(std::abs(b.b1) < 1e-12);
                CHECK(std::abs(b.b0) < 1e-12);
            }
        }
    CHECK_THROWS_AS(b_coefficients(2, 0.5, 0.9), PreconditionError);
}

TEST_CASE("zero swap, one shift") {
    auto psi = SmoothWeight::bump();
    auto policy = fast_policy();
    ShiftSet a({Complex(0.1, 0.05)});
    for (auto [l, x] : {std::pair{3ull, 6.0}, {1ull, 2.5}, {5ull, 7.0}}) {
        auto t = zero_swap(l, x, a, psi, policy);
        Complex expect = psi(double(l) / x) * std::pow(double(l), -0.5 - a[0]);
        CHECK(std::abs(t.value - expect) < 1e-10);
        CHECK(t.swapped.empty());
        CHECK(t.theorem_mode);
        CHECK(t.contour.nodes > 0);
    }
    // support of psi: l > X
    CHECK(std::abs(zero_swap(8, 5.0, a, psi, policy).value) < 1e-10);
}

TEST_CASE("one swap, one shift") {
    auto psi = SmoothWeight::bump();
    auto policy = fast_policy();
    ShiftSet a({Complex(0.1)});
    int k = 24;
    double kk = k / (4 * pi);
    for (auto [l, x] : {std::pair{3ull, 2.43}, {1ull, 4.0}}) {
        auto t = one_swap(l, x, a, 0, k, psi, policy, SwapMode::power);
        Complex expect = ik(k) * std::pow(double(l), -0.5 + a[0]) * std::pow(kk, -2.0 * a[0]) * psi(kk * kk / (x * double(l)));
        CHECK(std::abs(t.value - expect) < 1e-10);
        // exact Gamma mode against a scalar integrand
        ContourOptions opt;
        opt.abscissa = policy.epsilon;
        auto scalar = vertical_line_integral(
            [&](Complex z) {
                return psi.mellin(z) * std::exp(z * std::log(x)) * gamma_factor(k, a[0] + z) *
                       std::exp((-0.5 + a[0] + z) * std::log(double(l)));
            },
            opt);
        auto exact = one_swap(l, x, a, 0, k, psi, policy, SwapMode::exact_gamma);
        CHECK(std::abs(exact.value - ik(k) * scalar.value) < 1e-10);
    }
    CHECK_THROWS_AS(one_swap(1, 4.0, a, 1, k, psi, policy), PreconditionError);
    CHECK_THROWS_AS(one_swap(1, 4.0, a, 0, 13, psi, policy), PreconditionError);
}

TEST_CASE("Phi reciprocity under a double swap") {
    // Phi(w) Phi(-w) = 1 in exact mode
    for (Complex w : {Complex(0.1), Complex(0.2, 3.0)}) CHECK(std::abs(gamma_factor(30, w) * gamma_factor(30, -w) - 1.0) < 1e-12);
}

TEST_CASE("two shifts against diagonal sums") {
    auto psi = SmoothWeight::bump();
    auto policy = fast_policy();
    ShiftSet a({Complex(0.1), Complex(0.15)});
    double x = 40.0;
    // F_A(1, s) = zeta(2s + a + b): zero swap = sum_d psi(d^2/X) d^{-1-a-b}
    Complex diag = 0.0;
    for (int d = 1; d * d < x; ++d) diag += psi(d * d / x) * std::pow(double(d), -1.0 - a[0] - a[1]);
    auto z = zero_swap(1, x, a, psi, policy);
    CHECK(std::abs(z.value - diag) < 1e-9);
    // swapping alpha leaves G_1 = zeta(1 + beta - alpha) constant along the contour
    int k = 20;
    double kk = k / (4 * pi);
    auto o = one_swap(1, x, a, 0, k, psi, policy, SwapMode::power);
    Complex expect = ik(k) * zeta_continued(1.0 + a[1] - a[0]) * std::pow(kk, -2.0 * a[0]) * psi(kk * kk / x);
    CHECK(std::abs(o.value - expect) < 1e-9);
}

TEST_CASE("recipe structure") {
    auto psi = SmoothWeight::bump();
    auto policy = fast_policy();
    ShiftSet a({Complex(0.1), Complex(0.15)});
    RecipeOptions opt;
    opt.exploratory = true;
    auto r = recipe_rhs(1, 30.0, a, 20, psi, policy, opt);
    CHECK(r.one.size() == 2);
    CHECK(r.exploratory.size() == 1);
    CHECK_FALSE(r.exploratory[0].theorem_mode);
    CHECK(std::abs(r.total - (r.zero.value + r.one[0].value + r.one[1].value)) < 1e-15);
    CHECK(std::abs(r.all_subsets_total - (r.total + r.exploratory[0].value)) < 1e-15);
    ShiftSet b({Complex(0.15), Complex(0.1)});
    auto s = recipe_rhs(1, 30.0, b, 20, psi, policy);
    CHECK(std::abs(s.total - r.total) < 1e-10);
    CHECK_THROWS_AS(recipe_rhs(1, 30.0, ShiftSet(), 20, psi, policy), PreconditionError);
}

TEST_CASE("power mode approaches exact mode like 1/k") {
    auto psi = SmoothWeight::bump();
    auto policy = fast_policy();
    ShiftSet a({Complex(0.1)});
    auto gap = [&](int k) {
        // keep the bump argument (k/4pi)^2/X at 1/2
        double x = 2 * std::pow(k / (4 * pi), 2);
        auto e = one_swap(1, x, a, 0, k, psi, policy, SwapMode::exact_gamma);
        auto p = one_swap(1, x, a, 0, k, psi, policy, SwapMode::power);
        return std::abs(e.value - p.value) / std::abs(e.value);
    };
    double g40 = gap(40), g80 = gap(80);
    CHECK(g80 < g40);
    CHECK(g40 < 0.05);
}

TEST_CASE("continuity in the shift") {
    auto psi = SmoothWeight::bump();
    auto policy = fast_policy();
    std::vector<double> values;
    for (double al = -0.1; al <= 0.1001; al += 0.025) {
        auto r = recipe_rhs(1, 12.0, ShiftSet({Complex(al)}), 12, psi, policy);
        values.push_back(r.total.real());
    }
    double worst = 0.0;
    for (std::size_t i = 1; i + 1 < values.size(); ++i) {
        double d1 = std::abs(values[i] - values[i - 1]), d2 = std::abs(values[i + 1] - values[i]);
        worst = std::max(worst, std::max(d1, d2) / std::max(std::min(d1, d2), 1e-300));
    }
    CHECK(worst < 3.0);
}

TEST_CASE("confluent shifts") {
    auto psi = SmoothWeight::bump();
    auto policy = fast_policy();
    RecipeOptions opt;
    opt.mode = SwapMode::power;
    CHECK_THROWS_AS(ShiftSet({Complex(0.1), Complex(0.1)}), PreconditionError);
    auto c = recipe_rhs(1, 30.0, ShiftSet({Complex(0.1), Complex(0.1)}, true), 20, psi, policy, opt);
    CHECK(c.confluent_extrapolated);
    const double h = 1e-3;
    auto up = recipe_rhs(1, 30.0, ShiftSet({Complex(0.1), Complex(0.1 + h)}), 20, psi, policy, opt);
    auto down = recipe_rhs(1, 30.0, ShiftSet({Complex(0.1), Complex(0.1 - h)}), 20, psi, policy, opt);
    Complex mid = 0.5 * (up.total + down.total);
    CHECK(std::abs(c.total - mid) < 1e-5 * std::abs(mid) + 1e-9);
}
