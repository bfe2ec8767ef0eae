#include "cuspmoment/recipe.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>

#include "cuspmoment/errors.hpp"
#include "cuspmoment/localfactors.hpp"

namespace cuspmoment {

namespace {

Complex i_power(long n) {
    switch (((n % 4) + 4) % 4) {
        case 0: return {1.0, 0.0};
        case 1: return {0.0, 1.0};
        case 2: return {-1.0, 0.0};
        default: return {0.0, -1.0};
    }
}

SwapTerm integrate_swap(std::uint64_t l, double x, const ShiftSet& a,
                        std::span<const std::size_t> v, int k, const SmoothWeight& psi,
                        const TruncationPolicy& policy, SwapMode mode) {
    policy.validate();
    if (l == 0) throw PreconditionError("swap term: l must be positive");
    if (!(x > 1.0)) throw PreconditionError("swap term: X must exceed 1");
    if (a.empty()) throw PreconditionError("swap term: empty shift set");
    std::vector<std::size_t> swapped(v.begin(), v.end());
    std::sort(swapped.begin(), swapped.end());
    if (std::adjacent_find(swapped.begin(), swapped.end()) != swapped.end())
        throw PreconditionError("swap term: repeated index in V");
    for (auto i : swapped)
        if (i >= a.size()) throw PreconditionError("swap term: index not in A");
    if (!swapped.empty() && (k < 6 || k % 2 != 0))
        throw PreconditionError("swap term: k must be even and >= 6");

    TruncationPolicy inner = policy;
    inner.threads = 1;
    const Complex phase = i_power(static_cast<long>(k) * static_cast<long>(swapped.size()));
    const double log_x = std::log(x);
    std::mutex mutex;
    double max_rel_tail = 0.0;

    // |psi~(eps + it)| <= psi~(eps) since psi >= 0; the transform is only
    // accurate to rounding relative to that, anything below is noise
    const double floor = 8 * std::numeric_limits<double>::epsilon() *
                         std::abs(psi.mellin(Complex(policy.epsilon, 0.0)));
    auto integrand = [&](Complex z) -> Complex {
        Complex psi_z = psi.mellin(z);
        if (std::abs(psi_z) < floor) return 0.0;
        Complex factor = psi_z * std::exp(z * log_x);
        factor *= phase;
        for (auto i : swapped) {
            Complex w = a[i] + z;
            factor *= mode == SwapMode::exact_gamma ? gamma_factor(k, w) : gamma_factor_power(k, w);
        }
        auto shifts = swapped.empty() ? a.translated(z) : a.swapped(swapped, z);
        auto g = g_l(l, shifts.values(), inner);
        if (g.value != 0.0) {
            std::lock_guard lock(mutex);
            max_rel_tail = std::max(max_rel_tail, g.tail / std::abs(g.value));
        }
        return factor * g.value;
    };

    ContourOptions opt;
    opt.abscissa = policy.epsilon;
    opt.tol = policy.contour_tol;
    opt.max_height = policy.contour_height;
    opt.threads = policy.threads;
    auto res = vertical_line_integral(integrand, opt);

    SwapTerm term;
    term.swapped = swapped;
    term.value = res.value;
    term.contour = {policy.epsilon, res.height, res.step, res.nodes, res.error_estimate};
    term.prime_tail = max_rel_tail * res.magnitude;
    term.theorem_mode = swapped.size() <= 1;
    return term;
}

RecipeResult recipe_once(std::uint64_t l, double x, const ShiftSet& a, int k,
                         const SmoothWeight& psi, const TruncationPolicy& policy,
                         const RecipeOptions& options) {
    RecipeResult out;
    out.zero = integrate_swap(l, x, a, {}, k, psi, policy, options.mode);
    out.total = out.zero.value;
    out.contour_error = out.zero.contour.error_estimate;
    out.prime_tail = out.zero.prime_tail;
    for (std::size_t i = 0; i < a.size(); ++i) {
        std::size_t v[] = {i};
        auto term = integrate_swap(l, x, a, v, k, psi, policy, options.mode);
        out.total += term.value;
        out.contour_error += term.contour.error_estimate;
        out.prime_tail += term.prime_tail;
        out.one.push_back(std::move(term));
    }
    out.all_subsets_total = out.total;
    if (options.exploratory) {
        // subsets in canonical order: by size, then lexicographic
        const std::size_t r = a.size();
        for (std::size_t size = 2; size <= r; ++size) {
            std::vector<bool> pick(r, false);
            std::fill(pick.begin(), pick.begin() + static_cast<long>(size), true);
            do {
                std::vector<std::size_t> v;
                for (std::size_t i = 0; i < r; ++i)
                    if (pick[i]) v.push_back(i);
                auto term = integrate_swap(l, x, a, v, k, psi, policy, options.mode);
                out.all_subsets_total += term.value;
                out.exploratory.push_back(std::move(term));
            } while (std::prev_permutation(pick.begin(), pick.end()));
        }
    }
    return out;
}

void extrapolate(SwapTerm& near, const SwapTerm& far) {
    near.value = 2.0 * near.value - far.value;
    near.contour.error_estimate = 2.0 * near.contour.error_estimate + far.contour.error_estimate;
    near.prime_tail = 2.0 * near.prime_tail + far.prime_tail;
}

}  // namespace

SwapTerm zero_swap(std::uint64_t l, double x, const ShiftSet& a, const SmoothWeight& psi,
                   const TruncationPolicy& policy) {
    return integrate_swap(l, x, a, {}, 0, psi, policy, SwapMode::exact_gamma);
}

SwapTerm one_swap(std::uint64_t l, double x, const ShiftSet& a, std::size_t index, int k,
                  const SmoothWeight& psi, const TruncationPolicy& policy, SwapMode mode) {
    std::size_t v[] = {index};
    return integrate_swap(l, x, a, v, k, psi, policy, mode);
}

SwapTerm swap_term(std::uint64_t l, double x, const ShiftSet& a, std::span<const std::size_t> v,
                   int k, const SmoothWeight& psi, const TruncationPolicy& policy, SwapMode mode) {
    return integrate_swap(l, x, a, v, k, psi, policy, mode);
}

RecipeResult recipe_rhs(std::uint64_t l, double x, const ShiftSet& a, int k,
                        const SmoothWeight& psi, const TruncationPolicy& policy,
                        const RecipeOptions& options) {
    if (a.empty()) throw PreconditionError("recipe_rhs: empty shift set");
    if (k < 6 || k % 2 != 0) throw PreconditionError("recipe_rhs: k must be even and >= 6");
    if (!(a.confluent() && a.has_near_collision())) return recipe_once(l, x, a, k, psi, policy, options);

    // Richardson extrapolation 2 R(delta) - R(2 delta) over perturbed shifts
    double delta = options.confluent_step;
    auto near = recipe_once(l, x, a.perturbed(delta), k, psi, policy, options);
    auto far = recipe_once(l, x, a.perturbed(2.0 * delta), k, psi, policy, options);
    extrapolate(near.zero, far.zero);
    for (std::size_t i = 0; i < near.one.size(); ++i) extrapolate(near.one[i], far.one[i]);
    for (std::size_t i = 0; i < near.exploratory.size(); ++i)
        extrapolate(near.exploratory[i], far.exploratory[i]);
    near.total = 2.0 * near.total - far.total;
    near.all_subsets_total = 2.0 * near.all_subsets_total - far.all_subsets_total;
    near.contour_error = 2.0 * near.contour_error + far.contour_error;
    near.prime_tail = 2.0 * near.prime_tail + far.prime_tail;
    near.confluent_extrapolated = true;
    return near;
}

}  // namespace cuspmoment
