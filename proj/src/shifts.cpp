#include "cuspmoment/shifts.hpp"

#include <algorithm>
#include <cmath>

#include "cuspmoment/errors.hpp"
#include "cuspmoment/policy.hpp"

namespace cuspmoment {

ShiftSet::ShiftSet(std::vector<Complex> shifts, bool confluent)
    : shifts_(std::move(shifts)), confluent_(confluent) {
    if (shifts_.empty()) throw PreconditionError("shift set must be non-empty");
    for (const auto& a : shifts_) {
        if (!std::isfinite(a.real()) || !std::isfinite(a.imag()))
            throw PreconditionError("shift is not finite");
        if (std::abs(a) > max_abs_shift + 1e-12)
            throw PreconditionError("shift magnitude exceeds 0.25");
    }
    if (!confluent_ && has_near_collision())
        throw PreconditionError(
            "shifts coincide or cancel within 1e-8; enable confluent mode");
}

bool ShiftSet::has_near_collision() const {
    for (std::size_t i = 0; i < shifts_.size(); ++i)
        for (std::size_t j = i + 1; j < shifts_.size(); ++j)
            if (std::abs(shifts_[i] - shifts_[j]) <= separation ||
                std::abs(shifts_[i] + shifts_[j]) <= separation)
                return true;
    return false;
}

ShiftSet ShiftSet::translated(Complex z) const {
    std::vector<Complex> out(shifts_);
    for (auto& a : out) a += z;
    return ShiftSet(std::move(out), confluent_, Unchecked{});
}

ShiftSet ShiftSet::swapped(std::span<const std::size_t> v, Complex z) const {
    std::vector<Complex> out;
    out.reserve(shifts_.size());
    for (std::size_t i = 0; i < shifts_.size(); ++i) {
        bool in_v = std::find(v.begin(), v.end(), i) != v.end();
        out.push_back(in_v ? -(shifts_[i] + z) : shifts_[i] + z);
    }
    for (auto i : v)
        if (i >= shifts_.size()) throw PreconditionError("swap index out of range");
    return ShiftSet(std::move(out), confluent_, Unchecked{});
}

ShiftSet ShiftSet::conjugated() const {
    std::vector<Complex> out(shifts_);
    for (auto& a : out) a = std::conj(a);
    return ShiftSet(std::move(out), confluent_, Unchecked{});
}

ShiftSet ShiftSet::perturbed(double delta) const {
    std::vector<Complex> out(shifts_);
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] += Complex(0.0, delta * static_cast<double>(i + 1));
    return ShiftSet(std::move(out), confluent_, Unchecked{});
}

void TruncationPolicy::validate() const {
    if (prime_cutoff < 100) throw PreconditionError("prime cutoff must be >= 100");
    if (!(epsilon > 0.0)) throw PreconditionError("contour abscissa must be positive");
    if (quadrature_nodes < 2) throw PreconditionError("quadrature order too small");
    if (!(contour_height > 0.0)) throw PreconditionError("contour height must be positive");
    if (!(contour_tol > 0.0)) throw PreconditionError("contour tolerance must be positive");
    if (precision_bits < 53) throw PreconditionError("precision below 53 bits");
    if (!(kloosterman_tol > 0.0)) throw PreconditionError("Kloosterman tolerance must be positive");
    if (threads == 0) throw PreconditionError("thread count must be positive");
}

}  // namespace cuspmoment
