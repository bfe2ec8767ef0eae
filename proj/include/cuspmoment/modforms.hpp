#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cuspmoment/policy.hpp"

namespace cuspmoment {

struct Eigensystem {
    int weight = 0;
    std::uint64_t bound = 0;
    // lambdas[n] for 1 <= n <= bound; lambdas[0] is unused.
    std::vector<double> lambdas;
    double harmonic_weight = 0.0;

    double lambda(std::uint64_t n) const;
};

// Hecke eigenforms of weight k and level 1 with eigenvalues up to n. The
// order is ascending in the eigenvalue of the first distinguishing T_p.
// Harmonic weights are left at 0; see harmonic_weights.
std::vector<Eigensystem> eigensystems(int k, std::uint64_t n, int precision_bits = 256);

// Normalized coefficients a_f(n) / n^{(k-1)/2}, n = 0..bound, read directly
// off the q-expansion instead of the multiplicative reconstruction. Same
// order as eigensystems().
std::vector<std::vector<double>> eigenform_coefficients(int k, std::uint64_t bound,
                                                        int precision_bits = 256);

// Fills lambda(n) for composite n from lambda(p) by multiplicativity.
void fill_multiplicative(Eigensystem& system);

// Solves the trace-formula system for omega_f at m in {1, p_1, ..., p_{d-1}}.
void harmonic_weights(int k, std::vector<Eigensystem>& systems,
                      const TruncationPolicy& policy = {});

// lambda(n_1)...lambda(n_r) = sum_m coef(m) lambda(m).
std::map<std::uint64_t, std::uint64_t> hecke_linearize(std::span<const std::uint64_t> n);

// Eigensystem store keyed by (k, N).
std::filesystem::path store_path(const std::filesystem::path& dir, int k, std::uint64_t n);
void write_store(const std::filesystem::path& dir, int k, std::uint64_t n,
                 const std::vector<Eigensystem>& systems);
// std::nullopt when no file exists for (k, N); throws on malformed content.
std::optional<std::vector<Eigensystem>> read_store(const std::filesystem::path& dir, int k,
                                                   std::uint64_t n);
// Smallest stored bound N' >= n for weight k, if any.
std::optional<std::vector<Eigensystem>> find_store(const std::filesystem::path& dir, int k,
                                                   std::uint64_t n);

// --- Petersson off-diagonal side ---

// Cutoff C(m, l) for the c-sum: max(8, ceil(16 pi sqrt(ml) / k), C_tail) with
// C_tail the first c bounding the discarded tail by policy.kloosterman_tol.
std::uint64_t kloosterman_cutoff(int k, double ml, const TruncationPolicy& policy);
// Rigorous bound on 2 pi * sum_{c > C} |S(m,l;c)/c J_{k-1}(4 pi sqrt(ml)/c)|.
double kloosterman_tail_bound(int k, double ml, std::uint64_t cutoff);

struct KloostermanBesselSums {
    // values[i] = sum_{c <= C_i} S(m_i, l; c)/c J_{k-1}(4 pi sqrt(m_i l)/c)
    std::vector<double> values;
    // per-entry bound on 2 pi times the discarded tail
    std::vector<double> tails;
    std::uint64_t max_cutoff = 0;
};

KloostermanBesselSums kloosterman_bessel_sums(int k, std::uint64_t l,
                                              std::span<const std::uint64_t> m,
                                              const TruncationPolicy& policy,
                                              double cutoff_scale = 1.0);

// delta_{mn} + 2 pi i^{-k} sum_c S(m,n;c)/c J_{k-1}(4 pi sqrt(mn)/c)
double petersson_trace_side(int k, std::uint64_t m, std::uint64_t n,
                             const TruncationPolicy& policy = {});

}  // namespace cuspmoment
