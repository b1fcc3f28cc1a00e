#include "nilcorr/correlation.hpp"

#include <boost/integer/common_factor.hpp>

#include <limits>
#include <string>

#include "nilcorr/error.hpp"

namespace nilcorr {

namespace {

using boost::multiprecision::cpp_int;

std::int64_t to_int64(const cpp_int& v, const char* what) {
    if (v > std::numeric_limits<std::int64_t>::max() || v < std::numeric_limits<std::int64_t>::min())
        throw ResourceError(std::string(what) + " does not fit in 64 bits");
    return static_cast<std::int64_t>(v);
}

cpp_int binom(std::int64_t n, int j) {
    cpp_int b = 1;
    for (int i = 0; i < j; ++i) b = b * (n - i) / (i + 1);
    return b;
}

// Certifies sum_i coeffs[i] * basis(j, i) at j = 0..deg and returns the
// finite differences at 0, i.e. the binomial-basis coefficients.
template <class Basis>
std::vector<std::int64_t> certify(const std::vector<Rational>& coeffs, Basis basis) {
    if (coeffs.empty()) return {};
    std::int64_t L = 1;
    for (const Rational& a : coeffs) L = boost::integer::lcm(L, a.denominator());
    const int deg = static_cast<int>(coeffs.size()) - 1;
    std::vector<cpp_int> v(coeffs.size());
    for (int j = 0; j <= deg; ++j) {
        cpp_int scaled = 0;
        for (int i = 0; i <= deg; ++i) {
            const Rational& a = coeffs[static_cast<std::size_t>(i)];
            scaled += cpp_int(a.numerator()) * (L / a.denominator()) * basis(j, i);
        }
        if (scaled % L != 0)
            throw ValidationError("polynomial is not integer-valued: q(" + std::to_string(j) +
                                  ") is not an integer");
        v[static_cast<std::size_t>(j)] = scaled / L;
    }
    std::vector<std::int64_t> c(v.size());
    for (std::size_t j = 0; j < v.size(); ++j) {
        c[j] = to_int64(v[0], "binomial coefficient");
        for (std::size_t i = 0; i + 1 < v.size() - j; ++i) v[i] = v[i + 1] - v[i];
    }
    while (c.size() > 1 && c.back() == 0) c.pop_back();
    return c;
}

}  // namespace

IntPolynomial IntPolynomial::from_binomial(const std::vector<Rational>& coeffs) {
    IntPolynomial q;
    q.c_ = certify(coeffs, [](int j, int i) -> cpp_int { return binom(j, i); });
    return q;
}

IntPolynomial IntPolynomial::from_monomial(const std::vector<Rational>& coeffs) {
    IntPolynomial q;
    q.c_ = certify(coeffs, [](int j, int i) -> cpp_int {
        return boost::multiprecision::pow(cpp_int(j), static_cast<unsigned>(i));
    });
    return q;
}

IntPolynomial IntPolynomial::linear(std::int64_t a, std::int64_t b) {
    return from_binomial({Rational(b), Rational(a)});
}

int IntPolynomial::degree() const {
    for (int j = static_cast<int>(c_.size()) - 1; j >= 0; --j)
        if (c_[static_cast<std::size_t>(j)] != 0) return j;
    return 0;
}

std::int64_t poly_eval(const IntPolynomial& q, std::int64_t n) {
    cpp_int sum = 0, b = 1;
    const auto& c = q.binomial_coefficients();
    for (std::size_t j = 0; j < c.size(); ++j) {
        if (c[j] != 0) sum += c[j] * b;
        b = b * (n - static_cast<std::int64_t>(j)) / static_cast<std::int64_t>(j + 1);
    }
    return to_int64(sum, "polynomial value");
}

CorrelationSpec CorrelationSpec::iterates(MpSystemSpec system, ObservableSpec f0,
                                          std::vector<ObservableSpec> fs,
                                          std::vector<std::int64_t> multipliers) {
    if (multipliers.empty())
        for (std::size_t j = 0; j < fs.size(); ++j) multipliers.push_back(static_cast<std::int64_t>(j + 1));
    if (multipliers.size() != fs.size())
        throw ShapeError("one multiplier per observable is required");
    CorrelationSpec spec{std::move(system), std::move(f0), {}};
    for (std::size_t j = 0; j < fs.size(); ++j)
        spec.slots.push_back({std::move(fs[j]), {{0, IntPolynomial::linear(multipliers[j])}}});
    spec.validate();
    return spec;
}

CorrelationSpec CorrelationSpec::commuting(MpSystemSpec system, ObservableSpec f0,
                                           std::vector<ObservableSpec> fs) {
    if (fs.size() != system.transformation_count())
        throw ShapeError("commuting correlation needs one observable per transformation");
    CorrelationSpec spec{std::move(system), std::move(f0), {}};
    for (std::size_t j = 0; j < fs.size(); ++j)
        spec.slots.push_back({std::move(fs[j]), {{j, IntPolynomial::linear(1)}}});
    spec.validate();
    return spec;
}

void CorrelationSpec::validate() const {
    const std::size_t d = system.dimension();
    if (f0.dimension() != d) throw ValidationError("f0 is not defined on the system's space");
    for (const auto& slot : slots) {
        if (slot.f.dimension() != d)
            throw ValidationError("observable is not defined on the system's space");
        for (const auto& t : slot.exponents)
            if (t.transformation >= system.transformation_count())
                throw ValidationError("exponent refers to transformation " +
                                      std::to_string(t.transformation) + " of " +
                                      std::to_string(system.transformation_count()));
    }
}

CorrelationSpec CorrelationSpec::conj() const {
    CorrelationSpec c = *this;
    c.f0 = f0.conj();
    for (auto& slot : c.slots) slot.f = slot.f.conj();
    return c;
}

namespace {

bool all_symbolic(const CorrelationSpec& spec) {
    if (!acts_symbolically(spec.system, spec.f0)) return false;
    for (const auto& slot : spec.slots)
        if (!acts_symbolically(spec.system, slot.f)) return false;
    return true;
}

ObservableSpec symbolic_integrand(const CorrelationSpec& spec, std::int64_t n) {
    ObservableSpec prod = spec.f0;
    for (const auto& slot : spec.slots) {
        ObservableSpec g = slot.f;
        for (const auto& t : slot.exponents)
            g = compose(spec.system, g, t.transformation, poly_eval(t.q, n));
        prod = prod * g;
    }
    return prod;
}

}  // namespace

cplx multicorrelation(const CorrelationSpec& spec, std::int64_t n, const QuadratureGrid& grid) {
    spec.validate();
    if (all_symbolic(spec)) return symbolic_integrand(spec, n).mean();
    return multicorrelation_quadrature(spec, n, grid);
}

cplx multicorrelation_quadrature(const CorrelationSpec& spec, std::int64_t n,
                                 const QuadratureGrid& grid) {
    spec.validate();
    std::vector<std::vector<std::int64_t>> powers;
    for (const auto& slot : spec.slots) {
        std::vector<std::int64_t> m;
        for (const auto& t : slot.exponents) {
            m.push_back(poly_eval(t.q, n));
            if (m.back() < 0 && !spec.system.invertible())
                throw DomainError("negative iterate " + std::to_string(m.back()) +
                                  " of a non-invertible map");
        }
        powers.push_back(std::move(m));
    }
    double K = -1;
    if (all_symbolic(spec))
        K = static_cast<double>(symbolic_integrand(spec, n).max_abs_frequency());
    auto integrand = [&](const Point& x) {
        cplx v = evaluate(spec.system, spec.f0, x);
        for (std::size_t j = 0; j < spec.slots.size(); ++j) {
            const auto& ex = spec.slots[j].exponents;
            Point y = x;
            for (std::size_t t = ex.size(); t-- > 0;)
                y = orbit_point(spec.system, y, powers[j][t], ex[t].transformation);
            v *= evaluate(spec.system, spec.slots[j].f, y);
        }
        return v;
    };
    return integrate_on_grid(spec.system.dimension(), integrand, grid, K);
}

SampledSequence multicorrelation_sequence(const CorrelationSpec& spec, Window window,
                                          const QuadratureGrid& grid) {
    if (window.length() <= 0) throw RangeError("empty correlation window");
    spec.validate();
    return SampledSequence::generate(window.begin, static_cast<std::size_t>(window.length()),
                                     [&](std::int64_t n) { return multicorrelation(spec, n, grid); });
}

}  // namespace nilcorr
