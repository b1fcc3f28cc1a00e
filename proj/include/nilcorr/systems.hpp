#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "nilcorr/phase.hpp"

namespace nilcorr {

/// Exact integer frequency. Doubling-map iterates produce frequencies c * 2^n
/// far beyond 64 bits, and the symbolic integrals need an exact zero test.
using Freq = boost::multiprecision::cpp_int;
using FreqVec = std::vector<Freq>;

/// Point in coordinates: d phases on a torus, or reduced (x, y, z) in the
/// fundamental domain [0,1)^3 of the Heisenberg nilmanifold.
using Point = std::vector<Phase>;

/// Phase of the integer `c` times the phase `x`, exact modulo 1.
Phase scale(const Freq& c, Phase x);
/// The integer c reduced modulo 2^64.
std::uint64_t low_bits(const Freq& c);

/// One term coeff * e(phase) * e(freq . x).
struct TrigTerm {
    FreqVec freq;
    cplx coeff{1.0, 0.0};
    Phase phase;
};

/// Finite combination of characters, sum_j coeff_j e(phase_j) e(freq_j . x).
///
/// On a torus the coordinates are the torus coordinates; on the Heisenberg
/// nilmanifold they are the reduced fundamental-domain coordinates (x, y, z),
/// so terms with a nonzero z-frequency are the vertical characters
/// e(c1 x + c2 y + m z) of the fundamental domain and terms with zero
/// z-frequency are the horizontal characters.
///
/// Phases are carried separately from the complex coefficients so that
/// chains of compositions and products stay exact modulo 1.
class ObservableSpec {
public:
    explicit ObservableSpec(std::size_t dimension = 1) : dim_(dimension) {}

    static ObservableSpec character(FreqVec freq, cplx coeff = 1.0);
    static ObservableSpec character(std::initializer_list<long> freq, cplx coeff = 1.0);
    static ObservableSpec constant(std::size_t dimension, cplx c);

    std::size_t dimension() const { return dim_; }
    const std::vector<TrigTerm>& terms() const { return terms_; }
    bool is_single_character() const { return terms_.size() == 1; }

    void add_term(TrigTerm t);

    cplx evaluate(const Point& x) const;
    /// Integral against Lebesgue measure on [0,1)^d: sum of zero-frequency terms.
    cplx mean() const;
    /// sum_j |coeff_j|, an upper bound for the sup norm.
    double coefficient_l1() const;
    /// Largest |frequency| over all terms and coordinates.
    Freq max_abs_frequency() const;
    /// Whether any term has a nonzero frequency in coordinate i.
    bool uses_coordinate(std::size_t i) const;

    ObservableSpec conj() const;
    ObservableSpec operator*(const ObservableSpec& o) const;
    ObservableSpec operator+(const ObservableSpec& o) const;
    ObservableSpec scaled(cplx c) const;

    /// Merges terms with equal frequency (folding phases into coefficients)
    /// and drops exact zeros.
    void compact();

private:
    std::size_t dim_;
    std::vector<TrigTerm> terms_;
};

enum class SystemKind { rotation, skew, doubling, heisenberg, commuting_family };

std::string to_string(SystemKind kind);

/// An explicit measure-preserving system in coordinates.
///
/// - rotation: x -> x + theta on T^d.
/// - skew: (x, y) -> (x + theta, y + 2x + theta) on T^2; T^n(x, y) =
///   (x + n theta, y + 2n x + n^2 theta).
/// - doubling: x -> 2x on T^1 (not invertible).
/// - heisenberg: left translation by g = (a, b, c) on G/Gamma, G the upper
///   unitriangular 3x3 real matrices with (x,y,z)(x',y',z') =
///   (x+x', y+y', z+z'+xy') and Gamma its integer points.
/// - commuting_family: m rotations of one torus T^d.
class MpSystemSpec {
public:
    static MpSystemSpec rotation(std::vector<Phase> angles);
    static MpSystemSpec skew(Phase theta);
    static MpSystemSpec doubling();
    static MpSystemSpec heisenberg(Phase a, Phase b, Phase c);
    static MpSystemSpec commuting_family(std::vector<std::vector<Phase>> rotations);

    SystemKind kind() const { return kind_; }
    std::size_t dimension() const { return dim_; }
    std::size_t transformation_count() const { return params_.size(); }
    bool invertible() const { return kind_ != SystemKind::doubling; }
    bool is_nilsystem() const { return kind_ != SystemKind::doubling; }
    /// Parameters of transformation `which`: the rotation vector, {theta} for
    /// skew, {a, b, c} for heisenberg, empty for doubling.
    const std::vector<Phase>& parameters(std::size_t which = 0) const;

    bool operator==(const MpSystemSpec&) const = default;

private:
    SystemKind kind_ = SystemKind::rotation;
    std::size_t dim_ = 1;
    std::vector<std::vector<Phase>> params_;
};

struct QuadratureGrid {
    std::int64_t points_per_dim = 64;
};

/// T_which^n x0 in closed form. Negative n uses the inverse map; DomainError
/// for negative n on the doubling map.
Point orbit_point(const MpSystemSpec& sys, const Point& x0, std::int64_t n, std::size_t which = 0);

/// F(x) for a point of the system's space.
cplx evaluate(const MpSystemSpec& sys, const ObservableSpec& F, const Point& x);

/// Whether F o T^n has a closed form as an ObservableSpec (true on tori, and
/// for horizontal characters on the Heisenberg nilmanifold).
bool acts_symbolically(const MpSystemSpec& sys, const ObservableSpec& F);

/// F o T_which^m as an ObservableSpec. Throws DomainError when the action is
/// not symbolic or m < 0 on a non-invertible system.
ObservableSpec compose(const MpSystemSpec& sys, const ObservableSpec& F, std::size_t which,
                       std::int64_t m);

/// Integral of F over the space. Exact by the symbolic rule (nonzero
/// frequency integrates to 0) for every observable of this family.
cplx integrate(const MpSystemSpec& sys, const ObservableSpec& F, const QuadratureGrid& grid);

/// Grid average of an integrand over the P^d points j/P. `max_frequency` is
/// the largest |frequency| of the integrand viewed as a trigonometric
/// polynomial; ConfigError unless P >= 2 * max_frequency + 1. Pass a negative
/// max_frequency to skip the exactness check (non-polynomial integrands).
cplx integrate_on_grid(std::size_t dimension, const std::function<cplx(const Point&)>& integrand,
                       const QuadratureGrid& grid, double max_frequency);

/// Truncated Host-Kra seminorm
///   ( E_{h in [1,H_1] x ... x [1,H_k]} int prod_eta T^{eta.h} C^|eta| F dmu )^(1/2^k),
/// real part taken and negatives clamped to 0. The integral is symbolic when
/// F transforms symbolically and a grid average otherwise.
double hk_seminorm_estimate(const MpSystemSpec& sys, const ObservableSpec& F, int k,
                            const std::vector<std::int64_t>& H_caps, const QuadratureGrid& grid);

}  // namespace nilcorr
