#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace cuspmoment {

using Complex = std::complex<double>;

// The shift multiset A = {alpha_1, ..., alpha_r}.
//
// Sets built by the public constructor are validated: every |alpha| <= 0.25
// and no two shifts are within 1e-8 of each other or of each other's negative,
// unless confluent mode is requested. Derived sets (translated, swapped) are
// contour-shifted and skip the size check.
class ShiftSet {
public:
    static constexpr double max_abs_shift = 0.25;
    static constexpr double separation = 1e-8;

    ShiftSet() = default;
    explicit ShiftSet(std::vector<Complex> shifts, bool confluent = false);

    std::size_t size() const { return shifts_.size(); }
    bool empty() const { return shifts_.empty(); }
    bool confluent() const { return confluent_; }
    const Complex& operator[](std::size_t i) const { return shifts_[i]; }
    std::span<const Complex> values() const { return shifts_; }
    auto begin() const { return shifts_.begin(); }
    auto end() const { return shifts_.end(); }

    // A_z = {alpha + z}
    ShiftSet translated(Complex z) const;
    // (A_z minus V_z) union V_z^-, with V given by indices into this set.
    ShiftSet swapped(std::span<const std::size_t> v, Complex z) const;
    ShiftSet conjugated() const;
    // Shifts moved by distinct multiples of delta (confluent extrapolation).
    ShiftSet perturbed(double delta) const;

    // True when some pair is closer than the separation threshold.
    bool has_near_collision() const;

    bool operator==(const ShiftSet& other) const = default;

private:
    struct Unchecked {};
    ShiftSet(std::vector<Complex> shifts, bool confluent, Unchecked)
        : shifts_(std::move(shifts)), confluent_(confluent) {}

    std::vector<Complex> shifts_;
    bool confluent_ = false;
};

}  // namespace cuspmoment
