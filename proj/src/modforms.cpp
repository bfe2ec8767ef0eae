#include "cuspmoment/modforms.hpp"

#include <boost/multiprecision/mpfr.hpp>
#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <numbers>
#include <numeric>
#include <regex>
#include <sstream>

#include "cuspmoment/arith.hpp"
#include "cuspmoment/detail/parallel.hpp"
#include "cuspmoment/errors.hpp"
#include "cuspmoment/qexpansion.hpp"
#include "cuspmoment/special.hpp"

namespace cuspmoment {

double Eigensystem::lambda(std::uint64_t n) const {
    if (n == 0 || n > bound || n >= lambdas.size())
        throw PreconditionError("Eigensystem: index " + std::to_string(n) +
                                " outside eigenvalue bound " + std::to_string(bound));
    return lambdas[n];
}

namespace {

using Mp = boost::multiprecision::mpfr_float;
using Poly = std::vector<BigRational>;  // ascending powers

// Mpfr default precision is process-wide; eigen work is serialized.
class PrecisionScope {
public:
    explicit PrecisionScope(int bits) : lock_(mutex()), saved_(Mp::default_precision()) {
        Mp::default_precision(static_cast<unsigned>(bits * 0.30103) + 2);
    }
    ~PrecisionScope() { Mp::default_precision(saved_); }
    PrecisionScope(const PrecisionScope&) = delete;
    PrecisionScope& operator=(const PrecisionScope&) = delete;

private:
    static std::mutex& mutex() {
        static std::mutex m;
        return m;
    }
    std::lock_guard<std::mutex> lock_;
    unsigned saved_;
};

void trim(Poly& p) {
    while (!p.empty() && p.back() == 0) p.pop_back();
}

Poly derivative(const Poly& p) {
    Poly out;
    for (std::size_t i = 1; i < p.size(); ++i) out.push_back(p[i] * static_cast<long>(i));
    trim(out);
    return out;
}

Poly remainder(Poly a, const Poly& b) {
    trim(a);
    while (a.size() >= b.size() && !a.empty()) {
        BigRational factor = a.back() / b.back();
        std::size_t shift = a.size() - b.size();
        for (std::size_t i = 0; i < b.size(); ++i) a[shift + i] -= factor * b[i];
        a.pop_back();
        trim(a);
    }
    return a;
}

std::size_t gcd_degree(Poly a, Poly b) {
    trim(a);
    trim(b);
    while (!b.empty()) {
        Poly r = remainder(a, b);
        a = std::move(b);
        b = std::move(r);
    }
    return a.empty() ? 0 : a.size() - 1;
}

int sign_of(const Poly& p, const BigRational& x) {
    BigRational acc = 0;
    for (std::size_t i = p.size(); i-- > 0;) acc = acc * x + p[i];
    return acc > 0 ? 1 : (acc < 0 ? -1 : 0);
}

int sign_changes(const std::vector<Poly>& chain, const BigRational& x) {
    int changes = 0, last = 0;
    for (const auto& p : chain) {
        int s = sign_of(p, x);
        if (s == 0) continue;
        if (last != 0 && s != last) ++changes;
        last = s;
    }
    return changes;
}

// Faddeev-LeVerrier, monic.
Poly characteristic_polynomial(const std::vector<std::vector<BigRational>>& a) {
    std::size_t d = a.size();
    Poly coeff(d + 1);
    coeff[d] = 1;
    std::vector<std::vector<BigRational>> m(d, std::vector<BigRational>(d, 0));
    for (std::size_t step = 1; step <= d; ++step) {
        std::vector<std::vector<BigRational>> next(d, std::vector<BigRational>(d, 0));
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j) {
                BigRational acc = 0;
                for (std::size_t t = 0; t < d; ++t) acc += a[i][t] * m[t][j];
                next[i][j] = acc;
            }
        for (std::size_t i = 0; i < d; ++i) next[i][i] += coeff[d - step + 1];
        BigRational trace = 0;
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t t = 0; t < d; ++t) trace += a[i][t] * next[t][i];
        coeff[d - step] = -trace / static_cast<long>(step);
        m = std::move(next);
    }
    return coeff;
}

std::vector<std::pair<BigRational, BigRational>> isolate_roots(const Poly& p) {
    std::vector<Poly> chain{p, derivative(p)};
    while (chain.back().size() > 1) {
        Poly r = remainder(chain[chain.size() - 2], chain.back());
        if (r.empty()) break;
        for (auto& c : r) c = -c;
        chain.push_back(std::move(r));
    }
    BigRational bound = 0;
    for (std::size_t i = 0; i + 1 < p.size(); ++i) {
        BigRational v = abs(p[i] / p.back());
        if (v > bound) bound = v;
    }
    bound += 1;
    std::vector<std::pair<BigRational, BigRational>> out;
    auto rec = [&](auto&& self, BigRational lo, BigRational hi, int depth) -> void {
        int count = sign_changes(chain, lo) - sign_changes(chain, hi);
        if (count <= 0) return;
        if (count == 1) {
            out.emplace_back(lo, hi);
            return;
        }
        if (depth > 2000) throw NumericError("root isolation failed to separate roots");
        BigRational mid = (lo + hi) / 2;
        BigRational width = (hi - lo) / 1024;
        while (sign_of(p, mid) == 0) mid += width;
        self(self, lo, mid, depth + 1);
        self(self, mid, hi, depth + 1);
    };
    rec(rec, -bound, bound, 0);
    return out;
}

Mp evaluate(const std::vector<Mp>& p, const Mp& x) {
    Mp acc = 0;
    for (std::size_t i = p.size(); i-- > 0;) acc = acc * x + p[i];
    return acc;
}

Mp refine_root(const Poly& p, const std::vector<Mp>& pm, const BigRational& lo_q,
               const BigRational& hi_q, int bits) {
    Mp lo(lo_q), hi(hi_q);
    int slo = sign_of(p, lo_q);
    for (int it = 0; it < 4 * bits + 200; ++it) {
        Mp mid = (lo + hi) / 2;
        Mp v = evaluate(pm, mid);
        if (v == 0) return mid;
        if ((v > 0 ? 1 : -1) == slo)
            lo = mid;
        else
            hi = mid;
        if (mid == lo && mid == hi) break;
    }
    return (lo + hi) / 2;
}

// Kernel vector of (t - lambda I) normalized to c_1 = 1, full pivoting.
std::vector<Mp> null_vector(const std::vector<std::vector<BigInt>>& t, const Mp& lambda) {
    std::size_t d = t.size();
    std::vector<std::vector<Mp>> a(d, std::vector<Mp>(d));
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) a[i][j] = Mp(t[i][j]) - (i == j ? lambda : Mp(0));
    std::vector<std::size_t> col(d);
    std::iota(col.begin(), col.end(), 0);
    for (std::size_t s = 0; s + 1 < d; ++s) {
        std::size_t pr = s, pc = s;
        Mp best = 0;
        for (std::size_t i = s; i < d; ++i)
            for (std::size_t j = s; j < d; ++j)
                if (abs(a[i][j]) > best) {
                    best = abs(a[i][j]);
                    pr = i;
                    pc = j;
                }
        if (best == 0) throw NumericError("eigenvector: degenerate kernel");
        std::swap(a[s], a[pr]);
        for (auto& row : a) std::swap(row[s], row[pc]);
        std::swap(col[s], col[pc]);
        for (std::size_t i = s + 1; i < d; ++i) {
            Mp f = a[i][s] / a[s][s];
            for (std::size_t j = s; j < d; ++j) a[i][j] -= f * a[s][j];
        }
    }
    // last pivot is numerically zero; free variable is the last column
    std::vector<Mp> y(d);
    y[d - 1] = 1;
    for (std::size_t s = d - 1; s-- > 0;) {
        Mp acc = 0;
        for (std::size_t j = s + 1; j < d; ++j) acc += a[s][j] * y[j];
        y[s] = -acc / a[s][s];
    }
    std::vector<Mp> x(d);
    for (std::size_t i = 0; i < d; ++i) x[col[i]] = y[i];
    if (x[0] == 0) throw NumericError("eigenvector: vanishing first coefficient");
    Mp lead = x[0];
    for (auto& v : x) v /= lead;
    return x;
}

struct Eigenforms {
    std::vector<QExpansion> basis;
    std::vector<std::vector<Mp>> coords;
};

Eigenforms compute_eigenforms(int k, std::uint64_t bound, int bits) {
    Eigenforms out;
    auto d = static_cast<std::size_t>(cusp_dimension(k));
    if (d == 0) return out;
    std::size_t length = std::max<std::size_t>(bound, 5 * d) + 1;
    out.basis = miller_basis(k, length);

    for (std::uint64_t p : {2u, 3u, 5u}) {
        BigInt pk = 1;
        for (int i = 0; i < k - 1; ++i) pk *= p;
        std::vector<std::vector<BigInt>> t(d, std::vector<BigInt>(d));
        for (std::size_t i = 1; i <= d; ++i)
            for (std::size_t j = 0; j < d; ++j) {
                const auto& b = out.basis[j].coefficients;
                BigInt v = b[p * i];
                if (i % p == 0) v += pk * b[i / p];
                t[i - 1][j] = v;
            }
        std::vector<std::vector<BigRational>> tq(d, std::vector<BigRational>(d));
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j) tq[i][j] = BigRational(t[i][j]);
        Poly chi = characteristic_polynomial(tq);
        if (gcd_degree(chi, derivative(chi)) > 0) continue;  // repeated eigenvalue

        auto intervals = isolate_roots(chi);
        if (intervals.size() != d)
            throw NumericError("Hecke polynomial has " + std::to_string(intervals.size()) +
                               " real roots, expected " + std::to_string(d));
        std::vector<Mp> chi_mp;
        for (const auto& c : chi) chi_mp.emplace_back(c);
        for (const auto& [lo, hi] : intervals) {
            Mp root = refine_root(chi, chi_mp, lo, hi, bits);
            out.coords.push_back(null_vector(t, root));
        }
        return out;
    }
    throw NumericError("T_2, T_3 and T_5 all have repeated eigenvalues at weight " +
                       std::to_string(k));
}

Mp coefficient(const Eigenforms& e, std::size_t form, std::uint64_t n) {
    Mp acc = 0;
    for (std::size_t j = 0; j < e.basis.size(); ++j)
        acc += e.coords[form][j] * Mp(e.basis[j].coefficients[n]);
    return acc;
}

double normalized(const Mp& a, int k, std::uint64_t n) {
    Mp scale = pow(Mp(n), Mp(k - 1) / 2);
    return static_cast<double>(a / scale);
}

}  // namespace

void fill_multiplicative(Eigensystem& system) {
    auto n_max = system.bound;
    system.lambdas.resize(n_max + 1);
    if (n_max >= 1) system.lambdas[1] = 1.0;
    FactorSieve sieve(n_max);
    for (std::uint64_t n = 2; n <= n_max; ++n) {
        auto f = sieve.factorize(n);
        const auto& [p, e] = f.factors.front();
        std::uint64_t pe = 1;
        for (int i = 0; i < e; ++i) pe *= p;
        if (pe == n) {
            if (e == 1) continue;  // prime: given
            std::uint64_t prev = pe / p, prev2 = prev / p;
            system.lambdas[n] = system.lambdas[p] * system.lambdas[prev] - system.lambdas[prev2];
        } else {
            system.lambdas[n] = system.lambdas[pe] * system.lambdas[n / pe];
        }
    }
}

std::vector<Eigensystem> eigensystems(int k, std::uint64_t n, int precision_bits) {
    if (k % 2 != 0 || k < 12) throw PreconditionError("eigensystems: k must be even and >= 12");
    if (n < 2) throw PreconditionError("eigensystems: N must be >= 2");
    if (precision_bits < 53) throw PreconditionError("eigensystems: precision below 53 bits");
    PrecisionScope scope(precision_bits);
    auto e = compute_eigenforms(k, n, precision_bits);
    auto primes = primes_up_to(n);
    std::vector<Eigensystem> out;
    for (std::size_t f = 0; f < e.coords.size(); ++f) {
        Eigensystem s;
        s.weight = k;
        s.bound = n;
        s.lambdas.assign(n + 1, 0.0);
        for (auto p : primes) s.lambdas[p] = normalized(coefficient(e, f, p), k, p);
        fill_multiplicative(s);
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<std::vector<double>> eigenform_coefficients(int k, std::uint64_t bound,
                                                        int precision_bits) {
    if (k % 2 != 0 || k < 12) throw PreconditionError("eigenform_coefficients: bad weight");
    PrecisionScope scope(precision_bits);
    auto e = compute_eigenforms(k, bound, precision_bits);
    std::vector<std::vector<double>> out;
    for (std::size_t f = 0; f < e.coords.size(); ++f) {
        std::vector<double> row(bound + 1, 0.0);
        for (std::uint64_t m = 1; m <= bound; ++m) row[m] = normalized(coefficient(e, f, m), k, m);
        out.push_back(std::move(row));
    }
    return out;
}

std::uint64_t kloosterman_cutoff(int k, double ml, const TruncationPolicy& policy) {
    if (k < 3) throw PreconditionError("kloosterman_cutoff: k must be >= 3");
    double base = std::ceil(16.0 * std::numbers::pi * std::sqrt(ml) / k);
    double log_c = (std::log(2.0 * std::numbers::pi) +
                    (k - 1) * std::log(2.0 * std::numbers::pi * std::sqrt(ml)) -
                    std::lgamma(static_cast<double>(k)) - std::log(k - 2.0) -
                    std::log(policy.kloosterman_tol)) /
                   (k - 2.0);
    double tail = std::ceil(std::exp(log_c));
    return static_cast<std::uint64_t>(std::max({8.0, base, tail}));
}

double kloosterman_tail_bound(int k, double ml, std::uint64_t cutoff) {
    double log_b = std::log(2.0 * std::numbers::pi) +
                   (k - 1) * std::log(2.0 * std::numbers::pi * std::sqrt(ml)) -
                   std::lgamma(static_cast<double>(k)) - std::log(k - 2.0) -
                   (k - 2.0) * std::log(static_cast<double>(cutoff));
    return std::exp(log_b);
}

KloostermanBesselSums kloosterman_bessel_sums(int k, std::uint64_t l,
                                              std::span<const std::uint64_t> m,
                                              const TruncationPolicy& policy,
                                              double cutoff_scale) {
    if (l == 0) throw PreconditionError("kloosterman_bessel_sums: l must be positive");
    KloostermanBesselSums out;
    out.values.assign(m.size(), 0.0);
    out.tails.assign(m.size(), 0.0);
    std::vector<std::uint64_t> cut(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (m[i] == 0) throw PreconditionError("kloosterman_bessel_sums: m must be positive");
        double ml = static_cast<double>(m[i]) * static_cast<double>(l);
        cut[i] = static_cast<std::uint64_t>(
            std::ceil(cutoff_scale * static_cast<double>(kloosterman_cutoff(k, ml, policy))));
        out.tails[i] = kloosterman_tail_bound(k, ml, cut[i]);
        out.max_cutoff = std::max(out.max_cutoff, cut[i]);
    }
    std::vector<std::size_t> order(m.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return cut[a] > cut[b]; });
    std::size_t active = order.size();
    auto li = static_cast<std::int64_t>(l);
    for (std::uint64_t c = 1; c <= out.max_cutoff; ++c) {
        while (active > 0 && cut[order[active - 1]] < c) --active;
        if (active == 0) break;
        KloostermanTable table(c);
        double log2c = std::log2(static_cast<double>(c));
        bool use_row = static_cast<double>(active) > 4.0 * log2c + 8.0;
        std::vector<double> row;
        if (use_row) row = table.row(li);
        double inv_c = 1.0 / static_cast<double>(c);
        detail::parallel_for(active, policy.threads, [&](std::size_t idx) {
            std::size_t i = order[idx];
            double x = 4.0 * std::numbers::pi * std::sqrt(static_cast<double>(m[i]) * l) * inv_c;
            double j = bessel_J(k - 1, x);
            if (j == 0.0) return;
            double s = use_row ? row[m[i] % c] : table.sum(static_cast<std::int64_t>(m[i]), li);
            out.values[i] += s * inv_c * j;
        });
    }
    return out;
}

double petersson_trace_side(int k, std::uint64_t m, std::uint64_t n,
                            const TruncationPolicy& policy) {
    std::uint64_t ms[] = {m};
    auto sums = kloosterman_bessel_sums(k, n, ms, policy);
    double sign = (k / 2) % 2 == 0 ? 1.0 : -1.0;  // i^{-k}
    return (m == n ? 1.0 : 0.0) + 2.0 * std::numbers::pi * sign * sums.values[0];
}

void harmonic_weights(int k, std::vector<Eigensystem>& systems, const TruncationPolicy& policy) {
    std::size_t d = systems.size();
    if (d == 0) throw PreconditionError("harmonic_weights: empty family");
    std::vector<std::uint64_t> points{1};
    for (auto p : primes_up_to(1000)) {
        if (points.size() == d) break;
        points.push_back(p);
    }
    for (const auto& s : systems)
        if (s.bound < points.back())
            throw PreconditionError("harmonic_weights: eigenvalues needed up to " +
                                    std::to_string(points.back()));
    auto sums = kloosterman_bessel_sums(k, 1, points, policy);
    double sign = (k / 2) % 2 == 0 ? 1.0 : -1.0;
    Eigen::MatrixXd a(d, d);
    Eigen::VectorXd rhs(d);
    for (std::size_t j = 0; j < d; ++j) {
        for (std::size_t f = 0; f < d; ++f)
            a(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(f)) = systems[f].lambda(points[j]);
        rhs(static_cast<Eigen::Index>(j)) =
            (points[j] == 1 ? 1.0 : 0.0) + 2.0 * std::numbers::pi * sign * sums.values[j];
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    lu.setThreshold(1e-12);
    if (lu.rank() < static_cast<Eigen::Index>(d)) {
        std::string set;
        for (auto p : points) set += (set.empty() ? "" : ",") + std::to_string(p);
        throw NumericError("harmonic_weights: singular system at m in {" + set + "}");
    }
    Eigen::VectorXd omega = lu.solve(rhs);
    for (std::size_t f = 0; f < d; ++f) {
        double w = omega(static_cast<Eigen::Index>(f));
        if (!(w > 0.0)) throw NumericError("harmonic_weights: non-positive weight");
        systems[f].harmonic_weight = w;
    }
}

std::map<std::uint64_t, std::uint64_t> hecke_linearize(std::span<const std::uint64_t> n) {
    if (n.empty()) throw PreconditionError("hecke_linearize: empty tuple");
    for (auto v : n)
        if (v == 0) throw PreconditionError("hecke_linearize: entries must be positive");
    std::map<std::uint64_t, std::uint64_t> cur{{n[0], 1}};
    for (std::size_t i = 1; i < n.size(); ++i) {
        std::map<std::uint64_t, std::uint64_t> next;
        for (const auto& [m, c] : cur) {
            auto g = std::gcd(m, n[i]);
            for (auto dv : divisors(factorize(g))) next[m / dv * (n[i] / dv)] += c;
        }
        cur = std::move(next);
    }
    return cur;
}

std::filesystem::path store_path(const std::filesystem::path& dir, int k, std::uint64_t n) {
    return dir / ("eigensystems_k" + std::to_string(k) + "_N" + std::to_string(n) + ".txt");
}

namespace {
std::string format25(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.25g", v);
    return buf;
}
}  // namespace

void write_store(const std::filesystem::path& dir, int k, std::uint64_t n,
                 const std::vector<Eigensystem>& systems) {
    std::filesystem::create_directories(dir);
    auto path = store_path(dir, k, n);
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << "CUSPMOMENT-EIG v1 k=" << k << " N=" << n << " dim=" << systems.size() << '\n';
        auto primes = primes_up_to(n);
        for (const auto& s : systems) {
            out << "omega=" << format25(s.harmonic_weight);
            for (auto p : primes) out << ' ' << format25(s.lambdas.at(p));
            out << '\n';
        }
        if (!out) throw std::runtime_error("write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

std::optional<std::vector<Eigensystem>> read_store(const std::filesystem::path& dir, int k,
                                                   std::uint64_t n) {
    auto path = store_path(dir, k, n);
    std::ifstream in(path);
    if (!in) return std::nullopt;
    std::string header;
    std::getline(in, header);
    static const std::regex pattern(R"(CUSPMOMENT-EIG v1 k=(\d+) N=(\d+) dim=(\d+))");
    std::smatch match;
    if (!std::regex_match(header, match, pattern))
        throw std::runtime_error("malformed eigensystem store header in " + path.string());
    if (std::stoi(match[1]) != k || std::stoull(match[2]) != n)
        throw std::runtime_error("eigensystem store key mismatch in " + path.string());
    auto dim = std::stoul(match[3]);
    auto primes = primes_up_to(n);
    std::vector<Eigensystem> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string omega;
        row >> omega;
        if (omega.rfind("omega=", 0) != 0)
            throw std::runtime_error("malformed eigensystem line in " + path.string());
        Eigensystem s;
        s.weight = k;
        s.bound = n;
        s.harmonic_weight = std::stod(omega.substr(6));
        s.lambdas.assign(n + 1, 0.0);
        for (auto p : primes)
            if (!(row >> s.lambdas[p]))
                throw std::runtime_error("truncated eigensystem line in " + path.string());
        fill_multiplicative(s);
        out.push_back(std::move(s));
    }
    if (out.size() != dim)
        throw std::runtime_error("eigensystem store dimension mismatch in " + path.string());
    return out;
}

std::optional<std::vector<Eigensystem>> find_store(const std::filesystem::path& dir, int k,
                                                   std::uint64_t n) {
    if (!std::filesystem::is_directory(dir)) return std::nullopt;
    std::optional<std::uint64_t> best;
    static const std::regex pattern(R"(eigensystems_k(\d+)_N(\d+)\.txt)");
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        std::smatch match;
        auto name = entry.path().filename().string();
        if (!std::regex_match(name, match, pattern)) continue;
        if (std::stoi(match[1]) != k) continue;
        auto stored = std::stoull(match[2]);
        if (stored >= n && (!best || stored < *best)) best = stored;
    }
    if (!best) return std::nullopt;
    return read_store(dir, k, *best);
}

}  // namespace cuspmoment
