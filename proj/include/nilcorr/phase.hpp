#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>

namespace nilcorr {

using cplx = std::complex<double>;

/// A point of the circle R/Z stored as a 64-bit fixed-point fraction.
///
/// Addition and multiplication by integers wrap modulo 2^64, which is exact
/// arithmetic modulo 1. Orbits such as n^2 * theta stay exact for any n, so
/// two routes to the same phase (a symbolic correlation and a dictionary
/// atom, say) produce bit-identical values.
class Phase {
public:
    constexpr Phase() = default;

    static constexpr Phase from_raw(std::uint64_t raw) { return Phase(raw); }

    /// Reduces x modulo 1 and rounds to the nearest representable phase.
    static Phase from_double(double x);

    /// num/den reduced modulo 1, rounded toward zero at 2^-64 resolution.
    static Phase from_rational(std::int64_t num, std::int64_t den);

    constexpr std::uint64_t raw() const { return raw_; }

    /// Representative in [0, 1].
    double to_double() const { return static_cast<double>(raw_) * 0x1p-64; }

    /// Representative in [-1/2, 1/2).
    double centered() const {
        return static_cast<double>(static_cast<std::int64_t>(raw_)) * 0x1p-64;
    }

    /// Distance to the nearest integer, ||x||.
    double norm() const {
        const double c = centered();
        return c < 0 ? -c : c;
    }

    constexpr Phase operator+(Phase o) const { return Phase(raw_ + o.raw_); }
    constexpr Phase operator-(Phase o) const { return Phase(raw_ - o.raw_); }
    constexpr Phase operator-() const { return Phase(0 - raw_); }
    constexpr Phase& operator+=(Phase o) {
        raw_ += o.raw_;
        return *this;
    }
    constexpr Phase& operator-=(Phase o) {
        raw_ -= o.raw_;
        return *this;
    }

    /// Multiplication by an integer given modulo 2^64.
    constexpr Phase times(std::uint64_t m) const { return Phase(raw_ * m); }
    constexpr Phase operator*(std::int64_t m) const {
        return Phase(raw_ * static_cast<std::uint64_t>(m));
    }
    friend constexpr Phase operator*(std::int64_t m, Phase p) { return p * m; }

    constexpr bool operator==(const Phase&) const = default;
    constexpr auto operator<=>(const Phase&) const = default;

private:
    constexpr explicit Phase(std::uint64_t raw) : raw_(raw) {}
    std::uint64_t raw_ = 0;
};

/// e(x) = exp(2 pi i x).
inline cplx e(Phase p) {
    const double a = 2.0 * std::numbers::pi * p.centered();
    return {std::cos(a), std::sin(a)};
}

inline cplx e(double x) { return e(Phase::from_double(x)); }

}  // namespace nilcorr
