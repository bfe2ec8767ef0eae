#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "cuspmoment/policy.hpp"
#include "cuspmoment/qexpansion.hpp"
#include "cuspmoment/shifts.hpp"
#include "cuspmoment/special.hpp"

namespace cuspmoment {

enum class SwapMode { exact_gamma, power };

struct ContourMeta {
    double epsilon = 0.0;
    double height = 0.0;
    double step = 0.0;
    std::size_t nodes = 0;
    double error_estimate = 0.0;
};

struct SwapTerm {
    // indices into A of the swapped shifts
    std::vector<std::size_t> swapped;
    Complex value;
    ContourMeta contour;
    // Euler-product truncation estimate carried through the integral
    double prime_tail = 0.0;
    bool theorem_mode = true;
};

// (1/2 pi i) int psi~(z) X^z F_A(l, 1/2 + z) dz
SwapTerm zero_swap(std::uint64_t l, double x, const ShiftSet& a, const SmoothWeight& psi,
                   const TruncationPolicy& policy);

// i^k (1/2 pi i) int psi~(z) X^z Phi_k(z + alpha) G_l((A_z - {alpha + z}) + {-alpha - z}) dz
SwapTerm one_swap(std::uint64_t l, double x, const ShiftSet& a, std::size_t index, int k,
                  const SmoothWeight& psi, const TruncationPolicy& policy,
                  SwapMode mode = SwapMode::exact_gamma);

// General V-swap term; |V| >= 2 is exploratory output.
SwapTerm swap_term(std::uint64_t l, double x, const ShiftSet& a, std::span<const std::size_t> v,
                   int k, const SmoothWeight& psi, const TruncationPolicy& policy,
                   SwapMode mode = SwapMode::exact_gamma);

struct RecipeOptions {
    SwapMode mode = SwapMode::exact_gamma;
    // also evaluate every |V| >= 2 subset (non-theorem output)
    bool exploratory = false;
    // Richardson step for confluent shift sets
    double confluent_step = 1e-4;
};

struct RecipeResult {
    // 0-swap plus all 1-swap terms
    Complex total;
    SwapTerm zero;
    std::vector<SwapTerm> one;
    std::vector<SwapTerm> exploratory;
    // total plus every exploratory term
    Complex all_subsets_total;
    double contour_error = 0.0;
    double prime_tail = 0.0;
    bool confluent_extrapolated = false;
};

RecipeResult recipe_rhs(std::uint64_t l, double x, const ShiftSet& a, int k,
                        const SmoothWeight& psi, const TruncationPolicy& policy,
                        const RecipeOptions& options = {});

// |LHS(nu) - RHS(nu)| of the local residue identity, both sides evaluated
// from their defining expressions in 100-digit arithmetic.
double verify_one_swap_identity(double x, Complex y, double theta, int nu);
// Exact version for rational x, y and t = cos(theta); returns LHS - RHS.
BigRational one_swap_identity_exact(const BigRational& x, const BigRational& y,
                                    const BigRational& t, int nu);

// |(1 + x^2/y^2) A_{i,nu} - (x/y) A_{i-1,nu} - (x/y) A_{i+1,nu}| in 100-digit
// arithmetic; A_{-1,nu} continues the general formula.
double telescoping_check(int nu, int i, double x, Complex y, double theta);
// The same combination relative to the largest summand.
double telescoping_check_relative(int nu, int i, double x, Complex y);
BigRational telescoping_residual_exact(int nu, int i, const BigRational& x, const BigRational& y);

struct BCoefficients {
    Complex b_next;   // B_{nu+1}
    Complex b_nu;     // B_nu
    Complex b_prev;   // B_{nu-1}
    Complex b1;
    Complex b0;
};
// Coefficients of U_{nu+1}, U_nu, U_{nu-1}, U_1, U_0 in LHS(nu) for nu >= 3.
BCoefficients b_coefficients(int nu, double x, Complex y);
// -xy/(1-x^2), (1+x^2y^2)/(1-x^2), -xy/(1-x^2), 0, 0
BCoefficients b_coefficients_closed_form(double x, Complex y);

}  // namespace cuspmoment
