#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cuspmoment/modforms.hpp"
#include "cuspmoment/policy.hpp"
#include "cuspmoment/recipe.hpp"
#include "cuspmoment/shifts.hpp"
#include "cuspmoment/special.hpp"

#include <json.hpp>

namespace cuspmoment {

// sum over n_1...n_r = n of prod lambda(n_i) n_i^{-alpha_i}, by recursion over divisors.
Complex lambda_A_shifted(std::uint64_t n, const ShiftSet& a, const Eigensystem& system);

// The same quantity for every n in 1..limit via r - 1 Dirichlet convolutions.
std::vector<Complex> lambda_A_shifted_table(std::uint64_t limit, const ShiftSet& a,
                                            const Eigensystem& system);

// Largest n with psi(n / X) possibly nonzero, i.e. the last n < X.
std::uint64_t last_term(double x);

// sum_f omega_f lambda_f(l) sum_{n < X} psi(n/X) n^{-1/2} lambda_{A,f}(n).
// An empty list is accepted only when the cusp space of weight k is zero.
Complex lhs_direct(std::uint64_t l, double x, const ShiftSet& a, int k, const SmoothWeight& psi,
                   std::span<const Eigensystem> systems);

struct PeterssonLhs {
    Complex value;
    Complex diagonal;
    Complex kloosterman;
    // bound on the discarded c-tail, summed over m with |weight|
    double c_tail = 0.0;
    std::uint64_t max_cutoff = 0;
    // number of distinct m carrying weight
    std::size_t terms = 0;
};

// The same moment through the Hecke linearization and the trace formula;
// no eigensystem is needed. cutoff_scale stretches every c-cutoff.
PeterssonLhs lhs_petersson(std::uint64_t l, double x, const ShiftSet& a, int k,
                           const SmoothWeight& psi, const TruncationPolicy& policy,
                           double cutoff_scale = 1.0);

struct MomentReport {
    std::uint64_t l = 0;
    double x = 0.0;
    ShiftSet shifts;
    int k = 0;
    std::string psi_name;
    TruncationPolicy policy;
    RecipeOptions recipe_options;

    std::optional<Complex> lhs_direct;
    PeterssonLhs lhs_petersson;
    RecipeResult rhs;

    // which LHS the residuals use: "direct" when available
    std::string lhs_source;
    double residual_abs = 0.0;
    double residual_rel = 0.0;
    // |lhs_direct - lhs_petersson| when both are present
    std::optional<double> two_route_gap;
    // sqrt(X l^3) / k^2
    double error_scale = 0.0;
    // l > X: every term of the moment vanishes
    bool degenerate = false;
};

// systems may be null; lhs_direct is then omitted.
MomentReport compare(std::uint64_t l, double x, const ShiftSet& a, int k, const SmoothWeight& psi,
                     const TruncationPolicy& policy, const std::vector<Eigensystem>* systems,
                     const RecipeOptions& options = {});

nlohmann::ordered_json report_json(const MomentReport& report);
std::string report_csv_header();
std::string report_csv_row(const MomentReport& report);

// Deterministic JSON text: doubles as %.17g, keys in insertion order.
std::string dump_json(const nlohmann::ordered_json& value, int indent = 2);
nlohmann::ordered_json complex_json(Complex z);

}  // namespace cuspmoment
