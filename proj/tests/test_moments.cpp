#include <doctest.h>

#include <cmath>

#include "cuspmoment/errors.hpp"
#include "cuspmoment/moments.hpp"

using namespace cuspmoment;

namespace {

const std::vector<Eigensystem>& family(int k, std::uint64_t n) {
    static std::map<std::pair<int, std::uint64_t>, std::vector<Eigensystem>> cache;
    auto key = std::make_pair(k, n);
    auto it = cache.find(key);
    if (it == cache.end()) {
        auto es = eigensystems(k, n);
        if (!es.empty()) harmonic_weights(k, es, TruncationPolicy{});
        it = cache.emplace(key, std::move(es)).first;
    }
    return it->second;
}

}  // namespace

TEST_CASE("shifted convolution examples") {
    const auto& f = family(12, 400)[0];
    ShiftSet a({Complex(0.1), Complex(0.15)});
    CHECK(std::abs(lambda_A_shifted(1, a, f) - 1.0) < 1e-15);
    Complex p7 = f.lambda(7) * (std::pow(7.0, -0.1) + std::pow(7.0, -0.15));
    CHECK(std::abs(lambda_A_shifted(7, a, f) - p7) < 1e-14);
    // ordered factorizations of 12
    Complex brute = 0.0;
    for (std::uint64_t d : {1, 2, 3, 4, 6, 12})
        brute += f.lambda(d) * f.lambda(12 / d) * std::pow(double(d), -0.1) * std::pow(12.0 / d, -0.15);
    CHECK(std::abs(lambda_A_shifted(12, a, f) - brute) < 1e-12);
    CHECK_THROWS_AS(lambda_A_shifted(401, a, f), PreconditionError);
}

TEST_CASE("batched table matches pointwise recursion") {
    const auto& f = family(24, 400)[1];
    ShiftSet a({Complex(0.1), Complex(-0.05, 0.1), Complex(0.02, -0.03)});
    auto table = lambda_A_shifted_table(400, a, f);
    for (std::uint64_t n = 1; n <= 400; ++n)
        CHECK(std::abs(table[n] - lambda_A_shifted(n, a, f)) < 1e-12 * std::max(1.0, std::abs(table[n])));
}

TEST_CASE("direct LHS basics") {
    auto psi = SmoothWeight::bump();
    const auto& es = family(12, 400);
    ShiftSet a({Complex(0.1)});
    // X < 2 leaves only n = 1
    double x = 1.7;
    for (std::uint64_t l : {1u, 2u}) {
        Complex expect = psi(1.0 / x) * es[0].harmonic_weight * es[0].lambda(l);
        CHECK(std::abs(lhs_direct(l, x, a, 12, psi, es) - expect) < 1e-15);
    }
    CHECK(lhs_direct(1, 50.0, a, 14, psi, {}) == Complex(0.0));
    CHECK_THROWS_AS(lhs_direct(1, 50.0, a, 12, psi, {}), PreconditionError);
    CHECK_THROWS_AS(lhs_direct(1, 500.0, a, 12, psi, es), PreconditionError);
    CHECK(last_term(10.0) == 9);
    CHECK(last_term(10.5) == 10);
}

TEST_CASE("conjugation symmetry") {
    auto psi = SmoothWeight::bump();
    const auto& es = family(24, 400);
    ShiftSet a({Complex(0.1, 0.05), Complex(-0.05, 0.1)});
    auto v = lhs_direct(2, 300.0, a, 24, psi, es);
    auto w = lhs_direct(2, 300.0, a.conjugated(), 24, psi, es);
    CHECK(std::abs(w - std::conj(v)) < 1e-12 * std::max(1.0, std::abs(v)));
}

TEST_CASE("two routes agree") {
    auto psi = SmoothWeight::bump();
    TruncationPolicy policy;
    for (int k : {12, 16, 24}) {
        const auto& es = family(k, 800);
        for (auto a : {ShiftSet({Complex(0.1)}), ShiftSet({Complex(0.1), Complex(0.15)}),
                       ShiftSet({Complex(0.1), Complex(-0.05, 0.1), Complex(0.02, -0.03)})})
            for (std::uint64_t l : {1u, 2u, 6u}) {
                auto d = lhs_direct(l, 700.0, a, k, psi, es);
                auto p = lhs_petersson(l, 700.0, a, k, psi, policy);
                CHECK(std::abs(d - p.value) <= 1e-8 + p.c_tail);
            }
    }
}

TEST_CASE("Petersson route details") {
    auto psi = SmoothWeight::bump();
    TruncationPolicy policy;
    ShiftSet a({Complex(0.1), Complex(0.15)});
    // X < 2, l = 1: psi(1/X) (1 + Kloosterman part at m = 1)
    auto p = lhs_petersson(1, 1.8, a, 12, psi, policy);
    CHECK(std::abs(p.value - psi(1 / 1.8) * petersson_trace_side(12, 1, 1, policy)) < 1e-14);
    // empty family
    auto z = lhs_petersson(1, 500.0, ShiftSet({Complex(0.1)}), 14, psi, policy);
    CHECK(std::abs(z.value) < 1e-8);
    // widening every cutoff moves the value by less than the reported tail
    auto base = lhs_petersson(2, 400.0, a, 12, psi, policy);
    auto wide = lhs_petersson(2, 400.0, a, 12, psi, policy, 2.0);
    CHECK(std::abs(base.value - wide.value) <= base.c_tail);
    CHECK(wide.max_cutoff > base.max_cutoff);
    // threads do not change the answer beyond rounding
    TruncationPolicy threaded = policy;
    threaded.threads = 3;
    auto t = lhs_petersson(2, 400.0, a, 12, psi, threaded);
    CHECK(std::abs(t.value - base.value) < 1e-15);
}

TEST_CASE("compare report") {
    auto psi = SmoothWeight::bump();
    TruncationPolicy policy;
    policy.prime_cutoff = 100;
    ShiftSet a({Complex(0.1)});
    const auto& es = family(12, 400);
    auto r = compare(2, 30.0, a, 12, psi, policy, &es);
    REQUIRE(r.lhs_direct);
    REQUIRE(r.two_route_gap);
    CHECK(*r.two_route_gap < 1e-8);
    CHECK(r.residual_abs >= 0.0);
    CHECK(r.residual_rel >= 0.0);
    CHECK(r.lhs_source == "direct");
    CHECK(r.rhs.one.size() == 1);
    CHECK_FALSE(r.degenerate);
    auto j = report_json(r);
    for (const char* key : {"params", "lhs_direct", "lhs_petersson", "rhs", "residuals", "tails"}) CHECK(j.contains(key));
    CHECK(j["rhs"]["one_swap"].size() == 1);
    CHECK(j["lhs_direct"].size() == 2);
    auto text = dump_json(j);
    CHECK(nlohmann::json::parse(text)["params"]["k"] == 12);
    auto row = report_csv_row(r);
    auto header = report_csv_header();
    CHECK(std::count(row.begin(), row.end(), ',') == std::count(header.begin(), header.end(), ','));

    // l > X with r = 1: the diagonal is empty and at 4 pi sqrt(nl) << k the
    // Kloosterman side is below 1e-10 as well
    auto big = compare(3, 2.5, a, 60, psi, policy, nullptr);
    CHECK(big.degenerate);
    CHECK(std::abs(big.lhs_petersson.value) <= 1e-10);
    CHECK(std::abs(big.rhs.zero.value) <= 1e-10);
}

TEST_CASE("deterministic JSON text") {
    nlohmann::ordered_json j;
    j["a"] = 0.1;
    j["b"] = complex_json(Complex(1.0 / 3.0, -2.0));
    j["c"] = nlohmann::ordered_json::array({1, 2, 3});
    j["d"] = "x";
    auto text = dump_json(j);
    CHECK(text.find("0.10000000000000001") != std::string::npos);
    CHECK(text.find("[0.33333333333333331, -2]") != std::string::npos);
    CHECK(dump_json(j) == text);
}
