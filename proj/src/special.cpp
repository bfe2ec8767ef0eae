#include "cuspmoment/special.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <utility>
#include <vector>

#include "cuspmoment/detail/parallel.hpp"
#include "cuspmoment/errors.hpp"

namespace cuspmoment {

namespace {

constexpr double pi = std::numbers::pi;

// B_2, B_4, ..., B_26
constexpr std::array<double, 13> bernoulli_even = {
    1.0 / 6.0,          -1.0 / 30.0,         1.0 / 42.0,      -1.0 / 30.0,
    5.0 / 66.0,         -691.0 / 2730.0,     7.0 / 6.0,       -3617.0 / 510.0,
    43867.0 / 798.0,    -174611.0 / 330.0,   854513.0 / 138.0, -236364091.0 / 2730.0,
    8553103.0 / 6.0};

double bessel_series(int n, double x) {
    double log_lead = n * std::log(0.5 * x) - std::lgamma(n + 1.0);
    if (log_lead < -745.0) return 0.0;
    double term = std::exp(log_lead);
    double q = 0.25 * x * x;
    double sum = term;
    for (int k = 1; k < 500; ++k) {
        term *= -q / (static_cast<double>(k) * (n + k));
        sum += term;
        if (std::abs(term) <= 1e-17 * std::abs(sum)) break;
    }
    return sum;
}

double bessel_miller(int n, double x) {
    double top = std::max<double>(n, x) + 40.0 + 16.0 * std::cbrt(0.5 * x);
    int m0 = static_cast<int>(std::ceil(top));
    if (m0 % 2 != 0) ++m0;
    double next = 0.0, cur = 1e-30, result = 0.0, norm = 0.0;
    for (int m = m0; m >= 1; --m) {
        double prev = 2.0 * m / x * cur - next;
        next = cur;
        cur = prev;
        // cur now holds j_{m-1}
        int idx = m - 1;
        if (idx == n) result = cur;
        if (idx > 0 && idx % 2 == 0) norm += 2.0 * cur;
        if (std::abs(cur) > 1e250) {
            cur *= 1e-250;
            next *= 1e-250;
            result *= 1e-250;
            norm *= 1e-250;
        }
    }
    norm += cur;
    if (!std::isfinite(norm) || norm == 0.0)
        throw NumericError("bessel_J: recurrence overflow, higher precision needed");
    return result / norm;
}

}  // namespace

double bessel_J(int order, double x) {
    if (order < 0) throw PreconditionError("bessel_J: negative order");
    if (!(x >= 0.0) || !std::isfinite(x)) throw PreconditionError("bessel_J: x must be >= 0");
    if (x == 0.0) return order == 0 ? 1.0 : 0.0;
    double value = x <= 0.5 * order ? bessel_series(order, x) : bessel_miller(order, x);
    if (!std::isfinite(value)) throw NumericError("bessel_J: non-finite result");
    return std::abs(value) < 1e-300 ? 0.0 : value;
}

Complex log_gamma(Complex z) {
    if (z.real() <= 0.0 && z.imag() == 0.0 && z.real() == std::floor(z.real()))
        throw PreconditionError("log_gamma: pole");
    if (z.real() < 0.5) {
        // reflection
        return std::log(pi) - std::log(std::sin(pi * z)) - log_gamma(1.0 - z);
    }
    Complex shift = 0.0;
    while (std::abs(z) < 15.0 || z.real() < 10.0) {
        shift += std::log(z);
        z += 1.0;
    }
    Complex inv = 1.0 / z, inv2 = inv * inv;
    Complex series = 0.0, pw = inv;
    for (std::size_t j = 0; j < 10; ++j) {
        double twoj = 2.0 * static_cast<double>(j + 1);
        series += bernoulli_even[j] / (twoj * (twoj - 1.0)) * pw;
        pw *= inv2;
    }
    return (z - 0.5) * std::log(z) - z + 0.5 * std::log(2.0 * pi) + series - shift;
}

Complex gamma_ratio(int k, Complex s) {
    double h = 0.5 * k;
    if (!(h - s.real() > 0.0) || !(h + s.real() > 0.0))
        throw PreconditionError("gamma_ratio: requires k/2 +- Re(s) > 0");
    return std::exp(log_gamma(h - s) - log_gamma(h + s));
}

Complex gamma_factor(int k, Complex w) {
    double h = 0.5 * k;
    if (!(h - w.real() > 0.0) || !(h + w.real() > 0.0))
        throw PreconditionError("gamma_factor: requires k/2 +- Re(w) > 0");
    return std::exp(2.0 * w * std::log(2.0 * pi) + log_gamma(h - w) - log_gamma(h + w));
}

Complex gamma_factor_power(int k, Complex w) {
    if (k <= 0) throw PreconditionError("gamma_factor_power: k must be positive");
    return std::exp(-2.0 * w * std::log(k / (4.0 * pi)));
}

Complex zeta(Complex s) {
    if (!(s.real() >= 1.05)) throw PreconditionError("zeta: requires Re(s) >= 1.05");
    return zeta_continued(s);
}

Complex zeta_continued(Complex s) {
    if (std::abs(s - 1.0) < 1e-12) throw PreconditionError("zeta: pole at s = 1");
    if (!(s.real() > -20.0)) throw PreconditionError("zeta: requires Re(s) > -20");
    int n = 20 + static_cast<int>(std::ceil(std::abs(s.imag()) + std::max(0.0, -s.real())));
    Complex sum = 0.0;
    for (int j = n - 1; j >= 1; --j) sum += std::exp(-s * std::log(static_cast<double>(j)));
    double big_n = n;
    Complex n_pow = std::exp((1.0 - s) * std::log(big_n));  // N^{1-s}
    sum += n_pow / (s - 1.0) + 0.5 * n_pow / big_n;
    Complex poch = s;                // (s)_{2j-1}
    Complex pw = n_pow / (big_n * big_n);  // N^{1-s-2j}
    double fact = 2.0;               // (2j)!
    for (std::size_t j = 1; j <= bernoulli_even.size(); ++j) {
        Complex term = bernoulli_even[j - 1] / fact * poch * pw;
        sum += term;
        if (std::abs(term) < 1e-17 * std::abs(sum)) break;
        double a = 2.0 * static_cast<double>(j);
        poch *= (s + a - 1.0) * (s + a);
        pw /= big_n * big_n;
        fact *= (a + 1.0) * (a + 2.0);
    }
    return sum;
}

struct SmoothWeight::Cache {
    std::mutex mutex;
    std::map<std::pair<double, double>, Complex> samples;
    // psi(e^{-u}) e^{-sigma u} on u = j / 512, keyed by sigma
    std::map<double, std::shared_ptr<const std::vector<double>>> grids;
};

SmoothWeight::SmoothWeight() : SmoothWeight(bump()) {}

SmoothWeight::SmoothWeight(std::string name, Function psi)
    : name_(std::move(name)), psi_(std::move(psi)), cache_(std::make_shared<Cache>()) {
    if (!psi_) throw PreconditionError("SmoothWeight: empty function");
}

SmoothWeight SmoothWeight::bump() {
    return SmoothWeight("bump", [](double t) {
        if (!(t > 0.0 && t < 1.0)) return 0.0;
        return std::exp(-1.0 / (t * (1.0 - t)));
    });
}

double SmoothWeight::operator()(double t) const {
    if (!(t > 0.0 && t < 1.0)) return 0.0;
    return psi_(t);
}

std::size_t SmoothWeight::cached_samples() const {
    std::lock_guard lock(cache_->mutex);
    return cache_->samples.size();
}

namespace {

struct GaussRule {
    std::vector<double> x, w;
};

const GaussRule& gauss20() {
    static const GaussRule rule = [] {
        using G = boost::math::quadrature::gauss<double, 20>;
        GaussRule r;
        const auto& a = G::abscissa();
        const auto& w = G::weights();
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (a[i] == 0.0) {
                r.x.push_back(0.0);
                r.w.push_back(w[i]);
            } else {
                r.x.push_back(-a[i]);
                r.w.push_back(w[i]);
                r.x.push_back(a[i]);
                r.w.push_back(w[i]);
            }
        }
        return r;
    }();
    return rule;
}

template <class F>
Complex gl_panel(const F& f, double a, double b) {
    const auto& g = gauss20();
    double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    Complex acc = 0.0;
    for (std::size_t i = 0; i < g.x.size(); ++i) acc += g.w[i] * f(mid + half * g.x[i]);
    return half * acc;
}

template <class F>
Complex adaptive_gl(const F& f, double a, double b, double tol, int depth) {
    Complex whole = gl_panel(f, a, b);
    double mid = 0.5 * (a + b);
    Complex left = gl_panel(f, a, mid), right = gl_panel(f, mid, b);
    if (std::abs(whole - (left + right)) <= tol || depth >= 40) return left + right;
    return adaptive_gl(f, a, mid, 0.5 * tol, depth + 1) +
           adaptive_gl(f, mid, b, 0.5 * tol, depth + 1);
}

}  // namespace

Complex SmoothWeight::mellin(Complex z) const {
    if (!(z.real() > 0.0)) throw PreconditionError("mellin: requires Re(z) > 0");
    auto key = std::make_pair(z.real(), z.imag());
    {
        std::lock_guard lock(cache_->mutex);
        if (auto it = cache_->samples.find(key); it != cache_->samples.end()) return it->second;
    }
    Complex total = std::abs(z.imag()) <= fast_mellin_height ? mellin_grid(z) : mellin_adaptive(z);
    std::lock_guard lock(cache_->mutex);
    cache_->samples.emplace(key, total);
    return total;
}

// With t = e^{-u} the transform is a Fourier integral of a smooth, rapidly
// vanishing function, so the plain trapezoid rule is spectrally accurate
// while the frequency stays well below the grid's Nyquist limit.
Complex SmoothWeight::mellin_grid(Complex z) const {
    constexpr double du = 1.0 / 512.0;
    std::shared_ptr<const std::vector<double>> grid;
    {
        std::lock_guard lock(cache_->mutex);
        if (auto it = cache_->grids.find(z.real()); it != cache_->grids.end()) grid = it->second;
    }
    if (!grid) {
        std::vector<double> g;
        std::size_t last = 0;
        for (std::size_t j = 1; j * du <= 40.0; ++j) {
            double u = j * du;
            double v = (*this)(std::exp(-u)) * std::exp(-z.real() * u);
            g.push_back(v);
            if (v != 0.0) last = g.size();
        }
        g.resize(last);
        grid = std::make_shared<const std::vector<double>>(std::move(g));
        std::lock_guard lock(cache_->mutex);
        cache_->grids.emplace(z.real(), grid);
    }
    const auto& g = *grid;
    const double tau = z.imag();
    Complex total = 0.0;
    // reseed the rotation every 64 steps to keep rounding from accumulating
    for (std::size_t base = 0; base < g.size(); base += 64) {
        Complex rot = std::polar(1.0, -tau * du);
        Complex phase = std::polar(1.0, -tau * (base + 1) * du);
        std::size_t stop = std::min(g.size(), base + 64);
        for (std::size_t j = base; j < stop; ++j) {
            total += g[j] * phase;
            phase *= rot;
        }
    }
    return du * total;
}

Complex SmoothWeight::mellin_adaptive(Complex z) const {
    Complex zm1 = z - 1.0;
    auto integrand = [&](double t) -> Complex {
        double v = (*this)(t);
        if (v == 0.0) return 0.0;
        return v * std::exp(zm1 * std::log(t));
    };
    // dyadic panels toward both endpoints, subdivided to bound oscillation
    std::vector<double> cuts{0.5};
    for (int j = 2; j <= 52; ++j) {
        double e = std::ldexp(1.0, -j);
        cuts.push_back(e);
        cuts.push_back(1.0 - e);
    }
    std::sort(cuts.begin(), cuts.end());
    Complex total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        double a = cuts[i], b = cuts[i + 1];
        double phase = std::abs(z.imag()) * std::abs(std::log(b / a));
        int pieces = std::max(1, static_cast<int>(std::ceil(phase / (2.0 * pi))));
        double h = (b - a) / pieces;
        for (int p = 0; p < pieces; ++p) {
            double lo = a + p * h, hi = (p + 1 == pieces) ? b : a + (p + 1) * h;
            total += adaptive_gl(integrand, lo, hi, 1e-17 + 1e-15 * (hi - lo), 0);
        }
    }
    return total;
}

Complex mellin(const SmoothWeight& psi, Complex z) { return psi.mellin(z); }

ContourResult vertical_line_integral(const std::function<Complex(Complex)>& f,
                                     const ContourOptions& opt) {
    if (!(opt.initial_step > 0.0) || !(opt.panel_width > 0.0) || !(opt.tol > 0.0))
        throw PreconditionError("contour: step, panel width and tolerance must be positive");
    const double eps = opt.abscissa;
    auto eval = [&](std::vector<double>& ts, std::vector<Complex>& plus, std::vector<Complex>& minus) {
        plus.assign(ts.size(), 0.0);
        minus.assign(ts.size(), 0.0);
        detail::parallel_for(2 * ts.size(), opt.threads, [&](std::size_t i) {
            std::size_t j = i / 2;
            if (i % 2 == 0)
                plus[j] = f(Complex(eps, ts[j]));
            else
                minus[j] = f(Complex(eps, -ts[j]));
        });
    };

    double h = opt.initial_step;
    Complex centre = f(Complex(eps, 0.0));
    std::vector<Complex> plus_all, minus_all;
    int per_panel = std::max(1, static_cast<int>(std::round(opt.panel_width / h)));
    double height = 0.0, last_panels = 0.0;
    int quiet = 0;
    std::size_t j = 0;
    while (quiet < 2) {
        std::vector<double> ts;
        for (int i = 0; i < per_panel; ++i) ts.push_back(static_cast<double>(++j) * h);
        std::vector<Complex> plus, minus;
        eval(ts, plus, minus);
        double peak = 0.0;
        for (std::size_t i = 0; i < ts.size(); ++i)
            peak = std::max({peak, std::abs(plus[i]), std::abs(minus[i])});
        plus_all.insert(plus_all.end(), plus.begin(), plus.end());
        minus_all.insert(minus_all.end(), minus.begin(), minus.end());
        height = ts.back();
        double panel_bound = peak * opt.panel_width / pi;
        if (panel_bound < 0.1 * opt.tol) {
            ++quiet;
            last_panels += panel_bound;
        } else {
            quiet = 0;
            last_panels = 0.0;
        }
        if (height > opt.max_height)
            throw NumericError("contour: integrand has not decayed below tolerance by height " +
                               std::to_string(opt.max_height) + " (last panel peak " +
                               std::to_string(peak) + ")");
    }

    Complex sum = centre;
    double mass = std::abs(centre);
    for (std::size_t i = 0; i < plus_all.size(); ++i) {
        sum += plus_all[i] + minus_all[i];
        mass += std::abs(plus_all[i]) + std::abs(minus_all[i]);
    }
    Complex estimate = h / (2.0 * pi) * sum;
    double magnitude = h / (2.0 * pi) * mass;
    std::size_t nodes = 1 + 2 * plus_all.size();

    for (int level = 1; level <= opt.max_refinements; ++level) {
        h *= 0.5;
        std::vector<double> ts;
        for (std::size_t i = 1; static_cast<double>(i) * h <= height + 1e-12; i += 2)
            ts.push_back(static_cast<double>(i) * h);
        std::vector<Complex> plus, minus;
        eval(ts, plus, minus);
        Complex odd = 0.0;
        double odd_mass = 0.0;
        for (std::size_t i = 0; i < ts.size(); ++i) {
            odd += plus[i] + minus[i];
            odd_mass += std::abs(plus[i]) + std::abs(minus[i]);
        }
        Complex refined = 0.5 * estimate + h / (2.0 * pi) * odd;
        magnitude = 0.5 * magnitude + h / (2.0 * pi) * odd_mass;
        nodes += 2 * ts.size();
        double change = std::abs(refined - estimate);
        estimate = refined;
        if (change <= opt.tol) {
            ContourResult out;
            out.value = estimate;
            out.error_estimate = change + last_panels;
            out.height = height;
            out.step = h;
            out.nodes = nodes;
            out.magnitude = magnitude;
            return out;
        }
    }
    throw NumericError("contour: trapezoid rule did not converge after " +
                       std::to_string(opt.max_refinements) + " halvings (step " +
                       std::to_string(h) + ")");
}

}  // namespace cuspmoment
