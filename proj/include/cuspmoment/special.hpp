#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <memory>
#include <string>

namespace cuspmoment {

using Complex = std::complex<double>;

// J_n(x) for integer order n >= 0 and x >= 0.
double bessel_J(int order, double x);

// Principal-branch log Gamma for complex arguments off the poles.
Complex log_gamma(Complex z);

// Gamma(k/2 - s) / Gamma(k/2 + s).
Complex gamma_ratio(int k, Complex s);
// (2 pi)^{2w} Gamma(k/2 - w) / Gamma(k/2 + w).
Complex gamma_factor(int k, Complex w);
// Leading-order power approximation of gamma_factor: (k / (4 pi))^{-2w}.
Complex gamma_factor_power(int k, Complex w);

// Riemann zeta on Re(s) >= 1.05.
Complex zeta(Complex s);
// Riemann zeta anywhere off s = 1 with Re(s) > -20, by Euler-Maclaurin.
Complex zeta_continued(Complex s);

// A smooth cutoff supported in (0, 1) with a cached Mellin transform.
class SmoothWeight {
public:
    using Function = std::function<double(double)>;

    SmoothWeight();
    SmoothWeight(std::string name, Function psi);

    // t -> exp(-1 / (t (1 - t))) on (0, 1).
    static SmoothWeight bump();

    const std::string& name() const { return name_; }
    double operator()(double t) const;
    // psi~(z) = int_0^1 psi(t) t^{z-1} dt for Re(z) > 0, memoized per z.
    Complex mellin(Complex z) const;
    std::size_t cached_samples() const;

    // Above this |Im z| the transform falls back to adaptive quadrature.
    static constexpr double fast_mellin_height = 800.0;
    Complex mellin_grid(Complex z) const;
    Complex mellin_adaptive(Complex z) const;

private:
    struct Cache;

    std::string name_;
    Function psi_;
    std::shared_ptr<Cache> cache_;
};

Complex mellin(const SmoothWeight& psi, Complex z);

struct ContourOptions {
    double abscissa = 0.25;
    double tol = 1e-10;
    double max_height = 600.0;
    double initial_step = 0.25;
    double panel_width = 10.0;
    int max_refinements = 10;
    unsigned threads = 1;
};

struct ContourResult {
    Complex value;
    double error_estimate = 0.0;
    double height = 0.0;
    double step = 0.0;
    std::size_t nodes = 0;
    // (1/2 pi) int |f| along the truncated line, at the final step
    double magnitude = 0.0;
};

// (1 / 2 pi i) * integral of f over the line Re(z) = abscissa, by the
// trapezoidal rule with adaptive height and step halving.
ContourResult vertical_line_integral(const std::function<Complex(Complex)>& f,
                                     const ContourOptions& options);

}  // namespace cuspmoment
