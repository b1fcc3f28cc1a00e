#pragma once

#include <boost/rational.hpp>

#include <cstdint>
#include <vector>

#include "nilcorr/systems.hpp"
#include "nilcorr/znfn.hpp"

namespace nilcorr {

using Rational = boost::rational<std::int64_t>;

/// Integer-valued polynomial q(n) = sum_j c_j binom(n, j).
///
/// Construction certifies integrality: q(0..deg) must be integers, in which
/// case the binomial coefficients (the finite differences of q at 0) are
/// integers and q(Z) is contained in Z.
class IntPolynomial {
public:
    IntPolynomial() = default;

    /// From binomial-basis coefficients c_0..c_deg.
    static IntPolynomial from_binomial(const std::vector<Rational>& coeffs);
    /// From monomial coefficients a_0..a_deg of q(n) = sum_j a_j n^j.
    static IntPolynomial from_monomial(const std::vector<Rational>& coeffs);
    /// q(n) = a n + b.
    static IntPolynomial linear(std::int64_t a, std::int64_t b = 0);

    const std::vector<std::int64_t>& binomial_coefficients() const { return c_; }
    int degree() const;
    bool operator==(const IntPolynomial&) const = default;

private:
    std::vector<std::int64_t> c_;
};

/// Exact q(n). ResourceError when the value does not fit in 64 bits.
std::int64_t poly_eval(const IntPolynomial& q, std::int64_t n);

/// One factor T_i^{q(n)} acting on a slot.
struct ExponentTerm {
    std::size_t transformation = 0;
    IntPolynomial q;
};

/// f_j together with the iterates applied to it: prod_i T_i^{q_i(n)} f_j.
struct CorrelationSlot {
    ObservableSpec f;
    std::vector<ExponentTerm> exponents;
};

/// alpha(n) = int f_0 * prod_j (prod_i T_i^{q_{i,j}(n)} f_j) dmu.
struct CorrelationSpec {
    MpSystemSpec system;
    ObservableSpec f0;
    std::vector<CorrelationSlot> slots;

    /// int f_0 T^{a_1 n} f_1 ... T^{a_k n} f_k with a_j = multipliers[j-1]
    /// (default 1, 2, ..., k).
    static CorrelationSpec iterates(MpSystemSpec system, ObservableSpec f0,
                                    std::vector<ObservableSpec> fs,
                                    std::vector<std::int64_t> multipliers = {});
    /// int f_0 T_1^n f_1 ... T_k^n f_k for a commuting family of k maps.
    static CorrelationSpec commuting(MpSystemSpec system, ObservableSpec f0,
                                     std::vector<ObservableSpec> fs);

    /// ValidationError on dimension or transformation-index mismatch.
    void validate() const;
    CorrelationSpec conj() const;
};

/// alpha(n). Exact by frequency bookkeeping whenever every observable acts
/// symbolically; otherwise a grid average over the fundamental domain.
/// DomainError for a negative exponent on a non-invertible system.
cplx multicorrelation(const CorrelationSpec& spec, std::int64_t n, const QuadratureGrid& grid = {});

/// alpha(n) by pointwise orbit evaluation on the quadrature grid, never using
/// the symbolic composition. Exact for trigonometric polynomials when the grid
/// meets the Nyquist bound (ConfigError otherwise).
cplx multicorrelation_quadrature(const CorrelationSpec& spec, std::int64_t n,
                                 const QuadratureGrid& grid);

/// alpha(n) for n in window, evaluated in parallel.
SampledSequence multicorrelation_sequence(const CorrelationSpec& spec, Window window,
                                          const QuadratureGrid& grid = {});

}  // namespace nilcorr
