#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

#include "cuspmoment/arith.hpp"
#include "cuspmoment/errors.hpp"
#include "cuspmoment/modforms.hpp"
#include "cuspmoment/qexpansion.hpp"

using namespace cuspmoment;

TEST_CASE("dimensions and Miller basis") {
    CHECK(cusp_dimension(12) == 1);
    CHECK(cusp_dimension(14) == 0);
    CHECK(cusp_dimension(24) == 2);
    CHECK(cusp_dimension(26) == 1);
    CHECK(cusp_dimension(60) == 5);
    CHECK(cusp_dimension(10) == 0);
    CHECK(miller_basis(14, 20).empty());
    auto b12 = miller_basis(12, 11);
    REQUIRE(b12.size() == 1);
    // Ramanujan tau
    const long tau[] = {0, 1, -24, 252, -1472, 4830, -6048, -16744, 84480, -113643, -115920};
    for (int n = 0; n <= 10; ++n) CHECK(b12[0].coefficients[n] == tau[n]);
    auto b24 = miller_basis(24, 30);
    REQUIRE(b24.size() == 2);
    for (std::size_t j = 0; j < 2; ++j) {
        CHECK(b24[j].coefficients[0] == 0);
        for (std::size_t i = 1; i <= 2; ++i) CHECK(b24[j].coefficients[i] == (i == j + 1 ? 1 : 0));
    }
}

TEST_CASE("Kronecker product matches schoolbook") {
    std::vector<BigInt> a{3, -7, 0, 123456789, -1}, b{-2, 5, 11};
    BigInt big = 1;
    for (int i = 0; i < 200; ++i) big *= 3;
    a.push_back(-big);
    auto c = series_multiply(a, b, 8);
    for (std::size_t n = 0; n < 8; ++n) {
        BigInt s = 0;
        for (std::size_t i = 0; i <= n; ++i)
            if (i < a.size() && n - i < b.size()) s += a[i] * b[n - i];
        CHECK(c[n] == s);
    }
}

TEST_CASE("weight 12 eigensystem") {
    auto es = eigensystems(12, 200);
    REQUIRE(es.size() == 1);
    const auto& f = es[0];
    CHECK(f.lambda(1) == 1.0);
    CHECK(std::abs(f.lambda(2) - -24.0 / std::pow(2.0, 5.5)) < 1e-14);
    CHECK(std::abs(f.lambda(2) * f.lambda(3) - f.lambda(6)) < 1e-12);
    CHECK_THROWS_AS(f.lambda(201), PreconditionError);
    // against the q-expansion read directly
    auto direct = eigenform_coefficients(12, 200);
    for (std::uint64_t n = 1; n <= 200; ++n) CHECK(std::abs(direct[0][n] - f.lambda(n)) < 1e-12);
}

TEST_CASE("weight 24 eigenvalues") {
    auto es = eigensystems(24, 50);
    REQUIRE(es.size() == 2);
    double root = 12.0 * std::sqrt(144169.0), scale = std::pow(2.0, 11.5);
    CHECK(std::abs(es[0].lambda(2) - (540.0 - root) / scale) < 1e-13);
    CHECK(std::abs(es[1].lambda(2) - (540.0 + root) / scale) < 1e-13);
}

TEST_CASE("errors") {
    CHECK_THROWS_AS(eigensystems(13, 10), PreconditionError);
    CHECK_THROWS_AS(eigensystems(12, 1), PreconditionError);
    CHECK(eigensystems(14, 10).empty());
}

TEST_CASE("Deligne bound and Hecke relations") {
    for (int k : {12, 24, 36}) {
        auto es = eigensystems(k, 10000);
        for (const auto& f : es) {
            for (auto p : primes_up_to(10000)) CHECK(std::abs(f.lambda(p)) <= 2.0 + 1e-9);
            double worst = 0.0;
            for (std::uint64_t m = 1; m <= 100; ++m)
                for (std::uint64_t n = 1; n <= 100; ++n) {
                    double rhs = 0.0;
                    for (std::uint64_t d = 1; d <= std::min(m, n); ++d)
                        if (m % d == 0 && n % d == 0) rhs += f.lambda(m * n / (d * d));
                    worst = std::max(worst, std::abs(f.lambda(m) * f.lambda(n) - rhs));
                }
            CHECK(worst <= 1e-10);
        }
    }
}

TEST_CASE("harmonic weights") {
    TruncationPolicy policy;
    auto es = eigensystems(12, 40);
    harmonic_weights(12, es, policy);
    // 1 / <Delta, Delta> with the Gamma(11) / (4 pi)^11 normalization
    CHECK(std::abs(es[0].harmonic_weight - 2.8402873751675005) < 1e-12);
    for (std::uint64_t m = 2; m <= 20; ++m)
        CHECK(std::abs(es[0].harmonic_weight * es[0].lambda(m) - petersson_trace_side(12, m, 1, policy)) < 1e-8);
    auto e24 = eigensystems(24, 40);
    harmonic_weights(24, e24, policy);
    CHECK(e24[0].harmonic_weight > 0.0);
    CHECK(e24[1].harmonic_weight > 0.0);
}

TEST_CASE("Petersson formula small check and empty family") {
    TruncationPolicy policy;
    for (int k : {14, 10}) {
        for (std::uint64_t m = 1; m <= 6; ++m)
            for (std::uint64_t n = 1; n <= 6; ++n) CHECK(std::abs(petersson_trace_side(k, m, n, policy)) < 1e-10);
    }
    auto es = eigensystems(16, 40);
    harmonic_weights(16, es, policy);
    for (std::uint64_t m = 1; m <= 12; ++m)
        for (std::uint64_t n = 1; n <= 12; ++n)
            CHECK(std::abs(es[0].harmonic_weight * es[0].lambda(m) * es[0].lambda(n) -
                           petersson_trace_side(16, m, n, policy)) < 1e-8);
}

TEST_CASE("hecke linearization reproduces products") {
    auto es = eigensystems(24, 400);
    std::vector<std::vector<std::uint64_t>> tuples{{6, 10}, {4, 8, 12}, {9, 3}, {5, 7, 2}};
    for (const auto& t : tuples) {
        auto lin = hecke_linearize(t);
        for (const auto& f : es) {
            double prod = 1.0, sum = 0.0;
            for (auto n : t) prod *= f.lambda(n);
            for (auto [m, c] : lin) sum += double(c) * f.lambda(m);
            CHECK(std::abs(prod - sum) < 1e-10);
        }
    }
}

TEST_CASE("store round trip") {
    auto dir = std::filesystem::temp_directory_path() / "cuspmoment-test-store";
    std::filesystem::remove_all(dir);
    TruncationPolicy policy;
    auto es = eigensystems(24, 300);
    harmonic_weights(24, es, policy);
    write_store(dir, 24, 300, es);
    auto back = read_store(dir, 24, 300);
    REQUIRE(back);
    REQUIRE(back->size() == 2);
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(std::abs((*back)[i].harmonic_weight - es[i].harmonic_weight) < 1e-20);
        for (std::uint64_t n = 1; n <= 300; ++n) CHECK(std::abs((*back)[i].lambda(n) - es[i].lambda(n)) < 1e-14);
    }
    CHECK_FALSE(read_store(dir, 24, 301));
    CHECK(find_store(dir, 24, 100));
    CHECK_FALSE(find_store(dir, 24, 400));
    CHECK_FALSE(find_store(dir, 12, 10));
    write_store(dir, 14, 10, {});
    auto empty = read_store(dir, 14, 10);
    REQUIRE(empty);
    CHECK(empty->empty());
    std::filesystem::remove_all(dir);
}

TEST_CASE("Kloosterman cutoff and tail") {
    TruncationPolicy policy;
    CHECK(kloosterman_cutoff(12, 1.0, policy) >= 8);
    auto c = kloosterman_cutoff(12, 900.0, policy);
    CHECK(c >= static_cast<std::uint64_t>(std::ceil(16 * std::numbers::pi * 30 / 12)));
    CHECK(kloosterman_tail_bound(12, 900.0, c) <= policy.kloosterman_tol);
    // the bound exceeds the actual tail between C and 4C
    std::vector<std::uint64_t> m{30};
    auto base = kloosterman_bessel_sums(12, 30, m, policy);
    auto wide = kloosterman_bessel_sums(12, 30, m, policy, 4.0);
    CHECK(2 * std::numbers::pi * std::abs(base.values[0] - wide.values[0]) <= base.tails[0] + 1e-16);
}
