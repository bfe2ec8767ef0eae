#include "cuspmoment/moments.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <sstream>

#include "cuspmoment/arith.hpp"
#include "cuspmoment/chebyshev.hpp"
#include "cuspmoment/detail/parallel.hpp"
#include "cuspmoment/errors.hpp"
#include "cuspmoment/qexpansion.hpp"

namespace cuspmoment {

namespace {

constexpr std::uint64_t batched_threshold = 1000;

Complex power(std::uint64_t n, Complex e) {
    return std::exp(-e * std::log(static_cast<double>(n)));
}

void check_moment_inputs(std::uint64_t l, double x, const ShiftSet& a, int k) {
    if (l == 0) throw PreconditionError("moment: l must be positive");
    if (!(x > 1.0) || !std::isfinite(x)) throw PreconditionError("moment: X must exceed 1");
    if (a.empty()) throw PreconditionError("moment: empty shift set");
    if (k < 6 || k % 2 != 0) throw PreconditionError("moment: k must be even and >= 6");
}

// Ordered r-tuples of nonnegative integers summing to e.
void compositions(int e, std::size_t r, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
    if (cur.size() + 1 == r) {
        cur.push_back(e);
        out.push_back(cur);
        cur.pop_back();
        return;
    }
    for (int a = 0; a <= e; ++a) {
        cur.push_back(a);
        compositions(e - a, r, cur, out);
        cur.pop_back();
    }
}

// For the prime power p^e: v[j] = sum over compositions (a_i) of e of
// p^{-sum a_i alpha_i} times the coefficient of U_j in prod U_{a_i}.
class LocalVectors {
public:
    LocalVectors(const ShiftSet& a, std::uint64_t limit) : shifts_(a) {
        for (auto p : primes_up_to(limit)) {
            std::uint64_t q = p;
            for (int e = 1;; ++e) {
                table_.emplace(std::make_pair(p, e), build(p, e));
                if (q > limit / p) break;
                q *= p;
            }
        }
    }

    const std::vector<Complex>& at(std::uint64_t p, int e) const { return table_.at({p, e}); }

private:
    std::vector<Complex> build(std::uint64_t p, int e) {
        std::vector<std::vector<int>> comps;
        std::vector<int> cur;
        compositions(e, shifts_.size(), cur, comps);
        std::vector<Complex> v(static_cast<std::size_t>(e) + 1, 0.0);
        double logp = std::log(static_cast<double>(p));
        for (const auto& c : comps) {
            Complex expo = 0.0;
            for (std::size_t i = 0; i < c.size(); ++i) expo += static_cast<double>(c[i]) * shifts_[i];
            Complex w = std::exp(-expo * logp);
            const auto& lin = linearization(c);
            for (std::size_t j = 0; j < lin.size(); ++j)
                if (lin[j] != 0) v[j] += w * static_cast<double>(lin[j]);
        }
        return v;
    }

    // products of U's depend only on the multiset of degrees
    const std::vector<std::uint64_t>& linearization(std::vector<int> degrees) {
        std::sort(degrees.begin(), degrees.end());
        auto it = linear_.find(degrees);
        if (it == linear_.end())
            it = linear_.emplace(degrees, linearize_product(degrees).coefficients()).first;
        return it->second;
    }

    const ShiftSet& shifts_;
    std::map<std::pair<std::uint64_t, int>, std::vector<Complex>> table_;
    std::map<std::vector<int>, std::vector<std::uint64_t>> linear_;
};

Complex lambda_A_recursive(std::uint64_t n, std::size_t i, const ShiftSet& a,
                           const Eigensystem& system) {
    if (i + 1 == a.size()) return system.lambda(n) * power(n, a[i]);
    Complex total = 0.0;
    for (auto d : divisors(factorize(n))) {
        double lam = system.lambda(d);
        if (lam == 0.0) continue;
        total += lam * power(d, a[i]) * lambda_A_recursive(n / d, i + 1, a, system);
    }
    return total;
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void emit(std::ostringstream& os, const nlohmann::ordered_json& v, int indent, int depth) {
    auto newline = [&](int d) {
        if (indent > 0) os << '\n' << std::string(static_cast<std::size_t>(indent * d), ' ');
    };
    switch (v.type()) {
        case nlohmann::ordered_json::value_t::object: {
            if (v.empty()) {
                os << "{}";
                return;
            }
            os << '{';
            bool first = true;
            for (auto it = v.begin(); it != v.end(); ++it) {
                if (!first) os << ',';
                first = false;
                newline(depth + 1);
                os << nlohmann::ordered_json(it.key()).dump() << (indent > 0 ? ": " : ":");
                emit(os, it.value(), indent, depth + 1);
            }
            newline(depth);
            os << '}';
            return;
        }
        case nlohmann::ordered_json::value_t::array: {
            // short numeric arrays (complex pairs) stay on one line
            bool flat = v.size() <= 2 && std::all_of(v.begin(), v.end(), [](const auto& e) {
                            return e.is_number() || e.is_null();
                        });
            if (v.empty()) {
                os << "[]";
                return;
            }
            os << '[';
            bool first = true;
            for (const auto& e : v) {
                if (!first) os << (flat ? ", " : ",");
                first = false;
                if (!flat) newline(depth + 1);
                emit(os, e, indent, depth + 1);
            }
            if (!flat) newline(depth);
            os << ']';
            return;
        }
        case nlohmann::ordered_json::value_t::number_float: {
            double d = v.get<double>();
            os << (std::isfinite(d) ? fmt17(d) : "null");
            return;
        }
        default:
            os << v.dump();
    }
}

nlohmann::ordered_json swap_json(const SwapTerm& t) {
    nlohmann::ordered_json j;
    j["swapped"] = t.swapped;
    j["value"] = complex_json(t.value);
    j["theorem_mode"] = t.theorem_mode;
    j["contour"] = {{"epsilon", t.contour.epsilon},
                    {"height", t.contour.height},
                    {"step", t.contour.step},
                    {"nodes", t.contour.nodes},
                    {"error_estimate", t.contour.error_estimate}};
    j["prime_tail"] = t.prime_tail;
    return j;
}

}  // namespace

Complex lambda_A_shifted(std::uint64_t n, const ShiftSet& a, const Eigensystem& system) {
    if (n == 0) throw PreconditionError("lambda_A_shifted: n must be positive");
    if (a.empty()) throw PreconditionError("lambda_A_shifted: empty shift set");
    if (n > system.bound) throw PreconditionError("lambda_A_shifted: n exceeds the eigensystem bound");
    return lambda_A_recursive(n, 0, a, system);
}

std::vector<Complex> lambda_A_shifted_table(std::uint64_t limit, const ShiftSet& a,
                                            const Eigensystem& system) {
    if (a.empty()) throw PreconditionError("lambda_A_shifted_table: empty shift set");
    if (limit > system.bound)
        throw PreconditionError("lambda_A_shifted_table: limit exceeds the eigensystem bound");
    auto series = [&](std::size_t i) {
        std::vector<Complex> s(limit + 1, 0.0);
        for (std::uint64_t n = 1; n <= limit; ++n) s[n] = system.lambda(n) * power(n, a[i]);
        return s;
    };
    auto acc = series(a.size() - 1);
    for (std::size_t i = a.size() - 1; i-- > 0;) {
        auto f = series(i);
        std::vector<Complex> next(limit + 1, 0.0);
        for (std::uint64_t d = 1; d <= limit; ++d) {
            if (f[d] == 0.0) continue;
            for (std::uint64_t q = 1; d * q <= limit; ++q) next[d * q] += f[d] * acc[q];
        }
        acc = std::move(next);
    }
    return acc;
}

std::uint64_t last_term(double x) {
    if (!(x > 0.0)) return 0;
    double c = std::ceil(x);
    return static_cast<std::uint64_t>(c) - 1;
}

Complex lhs_direct(std::uint64_t l, double x, const ShiftSet& a, int k, const SmoothWeight& psi,
                   std::span<const Eigensystem> systems) {
    check_moment_inputs(l, x, a, k);
    if (systems.empty()) {
        if (cusp_dimension(k) == 0) return 0.0;
        throw PreconditionError("lhs_direct: missing eigensystem for k = " + std::to_string(k));
    }
    if (systems.size() != static_cast<std::size_t>(cusp_dimension(k)))
        throw PreconditionError("lhs_direct: incomplete eigensystem family");
    const std::uint64_t n_max = last_term(x);
    for (const auto& s : systems) {
        if (s.weight != k) throw PreconditionError("lhs_direct: eigensystem has the wrong weight");
        if (s.bound < std::max(n_max, l))
            throw PreconditionError("lhs_direct: eigensystem bound below max(X, l)");
        if (!(s.harmonic_weight > 0.0))
            throw PreconditionError("lhs_direct: harmonic weights not computed");
    }
    std::vector<double> weights(n_max + 1, 0.0);
    for (std::uint64_t n = 1; n <= n_max; ++n)
        weights[n] = psi(static_cast<double>(n) / x) / std::sqrt(static_cast<double>(n));

    Complex total = 0.0;
    for (const auto& s : systems) {
        Complex inner = 0.0;
        if (n_max > batched_threshold) {
            auto table = lambda_A_shifted_table(n_max, a, s);
            for (std::uint64_t n = 1; n <= n_max; ++n)
                if (weights[n] != 0.0) inner += weights[n] * table[n];
        } else {
            for (std::uint64_t n = 1; n <= n_max; ++n)
                if (weights[n] != 0.0) inner += weights[n] * lambda_A_shifted(n, a, s);
        }
        total += s.harmonic_weight * s.lambda(l) * inner;
    }
    return total;
}

PeterssonLhs lhs_petersson(std::uint64_t l, double x, const ShiftSet& a, int k,
                           const SmoothWeight& psi, const TruncationPolicy& policy,
                           double cutoff_scale) {
    check_moment_inputs(l, x, a, k);
    policy.validate();
    if (!(cutoff_scale >= 1.0)) throw PreconditionError("lhs_petersson: cutoff scale must be >= 1");
    const std::uint64_t n_max = last_term(x);
    PeterssonLhs out;
    if (n_max == 0) return out;

    LocalVectors local(a, n_max);
    FactorSieve sieve(n_max);

    // W(m) = sum_n psi(n/X) n^{-1/2} coef(n, m), accumulated in contiguous
    // blocks of n and reduced in block order
    unsigned blocks = std::max(1u, policy.threads);
    std::vector<std::vector<Complex>> partial(blocks);
    detail::parallel_for(blocks, policy.threads, [&](std::size_t b) {
        std::vector<Complex> w(n_max + 1, 0.0);
        std::uint64_t lo = 1 + n_max * b / blocks, hi = n_max * (b + 1) / blocks;
        std::vector<std::pair<std::uint64_t, Complex>> terms, next;
        for (std::uint64_t n = lo; n <= hi; ++n) {
            double weight = psi(static_cast<double>(n) / x) / std::sqrt(static_cast<double>(n));
            if (weight == 0.0) continue;
            terms.assign(1, {1, weight});
            for (const auto& pp : sieve.factorize(n).factors) {
                const auto& v = local.at(pp.prime, pp.exponent);
                next.clear();
                for (const auto& [m, c] : terms) {
                    std::uint64_t q = m;
                    for (std::size_t j = 0; j < v.size(); ++j) {
                        if (v[j] != 0.0) next.emplace_back(q, c * v[j]);
                        q *= pp.prime;
                    }
                }
                terms.swap(next);
            }
            for (const auto& [m, c] : terms) w[m] += c;
        }
        partial[b] = std::move(w);
    });
    std::vector<Complex> w(n_max + 1, 0.0);
    for (const auto& part : partial)
        for (std::uint64_t m = 1; m <= n_max; ++m) w[m] += part[m];

    std::vector<std::uint64_t> ms;
    for (std::uint64_t m = 1; m <= n_max; ++m)
        if (w[m] != 0.0) ms.push_back(m);
    out.terms = ms.size();
    if (l <= n_max) out.diagonal = w[l];

    auto kb = kloosterman_bessel_sums(k, l, ms, policy, cutoff_scale);
    Complex kl = 0.0;
    for (std::size_t i = 0; i < ms.size(); ++i) {
        kl += w[ms[i]] * kb.values[i];
        out.c_tail += std::abs(w[ms[i]]) * kb.tails[i];
    }
    const double sign = (k / 2) % 2 == 0 ? 1.0 : -1.0;
    out.kloosterman = 2.0 * std::numbers::pi * sign * kl;
    out.value = out.diagonal + out.kloosterman;
    out.max_cutoff = kb.max_cutoff;
    return out;
}

MomentReport compare(std::uint64_t l, double x, const ShiftSet& a, int k, const SmoothWeight& psi,
                     const TruncationPolicy& policy, const std::vector<Eigensystem>* systems,
                     const RecipeOptions& options) {
    check_moment_inputs(l, x, a, k);
    MomentReport r;
    r.l = l;
    r.x = x;
    r.shifts = a;
    r.k = k;
    r.psi_name = psi.name();
    r.policy = policy;
    r.recipe_options = options;
    r.degenerate = static_cast<double>(l) > x;

    if (systems) r.lhs_direct = lhs_direct(l, x, a, k, psi, *systems);
    r.lhs_petersson = lhs_petersson(l, x, a, k, psi, policy);
    r.rhs = recipe_rhs(l, x, a, k, psi, policy, options);

    Complex lhs = r.lhs_direct ? *r.lhs_direct : r.lhs_petersson.value;
    r.lhs_source = r.lhs_direct ? "direct" : "petersson";
    if (r.lhs_direct) r.two_route_gap = std::abs(*r.lhs_direct - r.lhs_petersson.value);
    r.residual_abs = std::abs(lhs - r.rhs.total);
    double scale = std::abs(r.rhs.total);
    r.residual_rel = scale > 0.0 ? r.residual_abs / scale
                                 : (r.residual_abs == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
    r.error_scale = std::sqrt(x * std::pow(static_cast<double>(l), 3)) / (static_cast<double>(k) * k);
    return r;
}

nlohmann::ordered_json complex_json(Complex z) { return nlohmann::ordered_json::array({z.real(), z.imag()}); }

nlohmann::ordered_json report_json(const MomentReport& r) {
    nlohmann::ordered_json j;
    auto& p = j["params"];
    p["k"] = r.k;
    p["l"] = r.l;
    p["X"] = r.x;
    p["r"] = r.shifts.size();
    p["shifts"] = nlohmann::ordered_json::array();
    for (auto s : r.shifts) p["shifts"].push_back(complex_json(s));
    p["confluent"] = r.shifts.confluent();
    p["psi"] = r.psi_name;
    p["policy"] = {{"prime_cutoff", r.policy.prime_cutoff},
                   {"quadrature_nodes", r.policy.quadrature_nodes},
                   {"small_prime_nodes", r.policy.small_prime_nodes},
                   {"epsilon", r.policy.epsilon},
                   {"contour_height", r.policy.contour_height},
                   {"contour_tol", r.policy.contour_tol},
                   {"precision_bits", r.policy.precision_bits},
                   {"kloosterman_tol", r.policy.kloosterman_tol}};
    p["gamma_mode"] = r.recipe_options.mode == SwapMode::exact_gamma ? "exact" : "power";
    p["exploratory"] = r.recipe_options.exploratory;

    j["lhs_direct"] = r.lhs_direct ? complex_json(*r.lhs_direct) : nlohmann::ordered_json();
    j["lhs_petersson"] = {{"value", complex_json(r.lhs_petersson.value)},
                          {"diagonal", complex_json(r.lhs_petersson.diagonal)},
                          {"kloosterman", complex_json(r.lhs_petersson.kloosterman)},
                          {"terms", r.lhs_petersson.terms},
                          {"max_cutoff", r.lhs_petersson.max_cutoff}};
    auto& rhs = j["rhs"];
    rhs["total"] = complex_json(r.rhs.total);
    rhs["zero_swap"] = swap_json(r.rhs.zero);
    rhs["one_swap"] = nlohmann::ordered_json::array();
    for (const auto& t : r.rhs.one) rhs["one_swap"].push_back(swap_json(t));
    if (r.recipe_options.exploratory) {
        rhs["exploratory"] = nlohmann::ordered_json::array();
        for (const auto& t : r.rhs.exploratory) rhs["exploratory"].push_back(swap_json(t));
        rhs["all_subsets_total"] = complex_json(r.rhs.all_subsets_total);
    }
    rhs["confluent_extrapolated"] = r.rhs.confluent_extrapolated;

    j["residuals"] = {{"lhs_source", r.lhs_source},
                      {"absolute", r.residual_abs},
                      {"relative", r.residual_rel},
                      {"error_scale", r.error_scale}};
    j["residuals"]["two_route_gap"] = r.two_route_gap ? nlohmann::ordered_json(*r.two_route_gap)
                                                      : nlohmann::ordered_json();
    j["tails"] = {{"c_truncation", r.lhs_petersson.c_tail},
                  {"p_truncation", r.rhs.prime_tail},
                  {"contour", r.rhs.contour_error}};
    j["degenerate"] = r.degenerate;
    return j;
}

std::string report_csv_header() {
    return "k,l,X,r,shifts,lhs_direct_re,lhs_direct_im,lhs_petersson_re,lhs_petersson_im,"
           "rhs_re,rhs_im,zero_swap_re,zero_swap_im,residual_abs,residual_rel,error_scale,"
           "c_tail,p_tail,contour_error,degenerate";
}

std::string report_csv_row(const MomentReport& r) {
    std::ostringstream os;
    os << r.k << ',' << r.l << ',' << fmt17(r.x) << ',' << r.shifts.size() << ",\"";
    for (std::size_t i = 0; i < r.shifts.size(); ++i) {
        if (i) os << ';';
        os << fmt17(r.shifts[i].real()) << (r.shifts[i].imag() < 0 ? "" : "+")
           << fmt17(r.shifts[i].imag()) << 'i';
    }
    os << "\",";
    auto pair = [&](Complex z) { os << fmt17(z.real()) << ',' << fmt17(z.imag()) << ','; };
    if (r.lhs_direct)
        pair(*r.lhs_direct);
    else
        os << ",,";
    pair(r.lhs_petersson.value);
    pair(r.rhs.total);
    pair(r.rhs.zero.value);
    os << fmt17(r.residual_abs) << ',' << fmt17(r.residual_rel) << ',' << fmt17(r.error_scale) << ','
       << fmt17(r.lhs_petersson.c_tail) << ',' << fmt17(r.rhs.prime_tail) << ','
       << fmt17(r.rhs.contour_error) << ',' << (r.degenerate ? 1 : 0);
    return os.str();
}

std::string dump_json(const nlohmann::ordered_json& value, int indent) {
    std::ostringstream os;
    emit(os, value, indent, 0);
    return os.str();
}

}  // namespace cuspmoment
