#include "nilcorr/systems.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "nilcorr/error.hpp"
#include "nilcorr/parallel.hpp"

namespace nilcorr {

namespace {

using u128 = unsigned __int128;
using i128 = __int128;

const Freq kMask64 = (Freq(1) << 64) - 1;

bool is_zero(const FreqVec& v) {
    return std::all_of(v.begin(), v.end(), [](const Freq& c) { return c.is_zero(); });
}

// Top 64 bits of (k * p) mod 2^128: the phase of the integer k times the
// exact 128-bit fraction p / 2^128.
Phase wide_scale(i128 k, u128 p) {
    return Phase::from_raw(static_cast<std::uint64_t>((static_cast<u128>(k) * p) >> 64));
}

u128 wide_product(Phase a, Phase b) { return static_cast<u128>(a.raw()) * b.raw(); }

void require_dimension(const MpSystemSpec& sys, const Point& x) {
    if (x.size() != sys.dimension())
        throw ShapeError("point of dimension " + std::to_string(x.size()) + " for a system of dimension " +
                         std::to_string(sys.dimension()));
}

void require_dimension(const MpSystemSpec& sys, const ObservableSpec& F) {
    if (F.dimension() != sys.dimension())
        throw ShapeError("observable of dimension " + std::to_string(F.dimension()) +
                         " on a system of dimension " + std::to_string(sys.dimension()));
}

}  // namespace

std::uint64_t low_bits(const Freq& c) {
    if (c.sign() >= 0) return static_cast<std::uint64_t>(c & kMask64);
    const auto mag = static_cast<std::uint64_t>((-c) & kMask64);
    return 0 - mag;
}

Phase scale(const Freq& c, Phase x) { return x.times(low_bits(c)); }

// --- ObservableSpec ---------------------------------------------------------

ObservableSpec ObservableSpec::character(FreqVec freq, cplx coeff) {
    ObservableSpec F(freq.size());
    F.terms_.push_back({std::move(freq), coeff, Phase{}});
    return F;
}

ObservableSpec ObservableSpec::character(std::initializer_list<long> freq, cplx coeff) {
    FreqVec v;
    for (long c : freq) v.emplace_back(c);
    return character(std::move(v), coeff);
}

ObservableSpec ObservableSpec::constant(std::size_t dimension, cplx c) {
    return character(FreqVec(dimension), c);
}

void ObservableSpec::add_term(TrigTerm t) {
    if (t.freq.size() != dim_) throw ShapeError("term dimension does not match observable");
    terms_.push_back(std::move(t));
}

cplx ObservableSpec::evaluate(const Point& x) const {
    if (x.size() != dim_) throw ShapeError("point dimension does not match observable");
    cplx s = 0;
    for (const auto& t : terms_) {
        Phase p = t.phase;
        for (std::size_t i = 0; i < dim_; ++i) p += scale(t.freq[i], x[i]);
        s += t.coeff * e(p);
    }
    return s;
}

cplx ObservableSpec::mean() const {
    cplx s = 0;
    for (const auto& t : terms_)
        if (is_zero(t.freq)) s += t.coeff * e(t.phase);
    return s;
}

double ObservableSpec::coefficient_l1() const {
    double s = 0;
    for (const auto& t : terms_) s += std::abs(t.coeff);
    return s;
}

Freq ObservableSpec::max_abs_frequency() const {
    Freq m = 0;
    for (const auto& t : terms_)
        for (const auto& c : t.freq) m = std::max(m, Freq(abs(c)));
    return m;
}

bool ObservableSpec::uses_coordinate(std::size_t i) const {
    return std::any_of(terms_.begin(), terms_.end(),
                       [i](const TrigTerm& t) { return !t.freq[i].is_zero(); });
}

ObservableSpec ObservableSpec::conj() const {
    ObservableSpec out(dim_);
    out.terms_.reserve(terms_.size());
    for (const auto& t : terms_) {
        FreqVec f(t.freq.size());
        for (std::size_t i = 0; i < f.size(); ++i) f[i] = -t.freq[i];
        out.terms_.push_back({std::move(f), std::conj(t.coeff), -t.phase});
    }
    return out;
}

ObservableSpec ObservableSpec::operator*(const ObservableSpec& o) const {
    if (o.dim_ != dim_) throw ShapeError("product of observables of different dimension");
    ObservableSpec out(dim_);
    out.terms_.reserve(terms_.size() * o.terms_.size());
    for (const auto& a : terms_)
        for (const auto& b : o.terms_) {
            FreqVec f(dim_);
            for (std::size_t i = 0; i < dim_; ++i) f[i] = a.freq[i] + b.freq[i];
            out.terms_.push_back({std::move(f), a.coeff * b.coeff, a.phase + b.phase});
        }
    if (out.terms_.size() > 1) out.compact();
    return out;
}

ObservableSpec ObservableSpec::operator+(const ObservableSpec& o) const {
    if (o.dim_ != dim_) throw ShapeError("sum of observables of different dimension");
    ObservableSpec out = *this;
    out.terms_.insert(out.terms_.end(), o.terms_.begin(), o.terms_.end());
    out.compact();
    return out;
}

ObservableSpec ObservableSpec::scaled(cplx c) const {
    ObservableSpec out = *this;
    for (auto& t : out.terms_) t.coeff *= c;
    return out;
}

void ObservableSpec::compact() {
    std::sort(terms_.begin(), terms_.end(),
              [](const TrigTerm& a, const TrigTerm& b) { return a.freq < b.freq; });
    std::vector<TrigTerm> merged;
    merged.reserve(terms_.size());
    for (std::size_t i = 0; i < terms_.size();) {
        std::size_t j = i + 1;
        while (j < terms_.size() && terms_[j].freq == terms_[i].freq) ++j;
        if (j == i + 1) {
            merged.push_back(std::move(terms_[i]));
        } else {
            cplx c = 0;
            for (std::size_t t = i; t < j; ++t) c += terms_[t].coeff * e(terms_[t].phase);
            merged.push_back({std::move(terms_[i].freq), c, Phase{}});
        }
        if (merged.back().coeff == cplx(0.0, 0.0)) merged.pop_back();
        i = j;
    }
    terms_ = std::move(merged);
}

// --- MpSystemSpec -------------------------------------------------------------

std::string to_string(SystemKind kind) {
    switch (kind) {
        case SystemKind::rotation: return "rotation";
        case SystemKind::skew: return "skew";
        case SystemKind::doubling: return "doubling";
        case SystemKind::heisenberg: return "heisenberg";
        case SystemKind::commuting_family: return "commuting_family";
    }
    return "unknown";
}

MpSystemSpec MpSystemSpec::rotation(std::vector<Phase> angles) {
    if (angles.empty()) throw ValidationError("rotation needs at least one angle");
    MpSystemSpec s;
    s.kind_ = SystemKind::rotation;
    s.dim_ = angles.size();
    s.params_ = {std::move(angles)};
    return s;
}

MpSystemSpec MpSystemSpec::skew(Phase theta) {
    MpSystemSpec s;
    s.kind_ = SystemKind::skew;
    s.dim_ = 2;
    s.params_ = {{theta}};
    return s;
}

MpSystemSpec MpSystemSpec::doubling() {
    MpSystemSpec s;
    s.kind_ = SystemKind::doubling;
    s.dim_ = 1;
    s.params_ = {{}};
    return s;
}

MpSystemSpec MpSystemSpec::heisenberg(Phase a, Phase b, Phase c) {
    MpSystemSpec s;
    s.kind_ = SystemKind::heisenberg;
    s.dim_ = 3;
    s.params_ = {{a, b, c}};
    return s;
}

MpSystemSpec MpSystemSpec::commuting_family(std::vector<std::vector<Phase>> rotations) {
    if (rotations.empty()) throw ValidationError("commuting family needs at least one rotation");
    const std::size_t d = rotations.front().size();
    if (d == 0) throw ValidationError("commuting family rotations need a dimension");
    for (const auto& r : rotations)
        if (r.size() != d) throw ValidationError("commuting family members act on different tori");
    MpSystemSpec s;
    s.kind_ = SystemKind::commuting_family;
    s.dim_ = d;
    s.params_ = std::move(rotations);
    return s;
}

const std::vector<Phase>& MpSystemSpec::parameters(std::size_t which) const {
    if (which >= params_.size())
        throw ValidationError("transformation index " + std::to_string(which) + " out of range");
    return params_[which];
}

// --- dynamics -----------------------------------------------------------------

Point orbit_point(const MpSystemSpec& sys, const Point& x0, std::int64_t n, std::size_t which) {
    require_dimension(sys, x0);
    const auto& p = sys.parameters(which);
    switch (sys.kind()) {
        case SystemKind::rotation:
        case SystemKind::commuting_family: {
            Point x = x0;
            for (std::size_t i = 0; i < x.size(); ++i) x[i] += p[i] * n;
            return x;
        }
        case SystemKind::skew: {
            const Phase theta = p[0];
            const auto un = static_cast<std::uint64_t>(n);
            return {x0[0] + theta * n, x0[1] + x0[0].times(2 * un) + theta.times(un * un)};
        }
        case SystemKind::doubling: {
            if (n < 0) throw DomainError("the doubling map has no inverse");
            if (n >= 64) return {Phase{}};
            return {Phase::from_raw(x0[0].raw() << n)};
        }
        case SystemKind::heisenberg: {
            const Phase a = p[0], b = p[1], c = p[2];
            const Phase x0p = x0[0], y0 = x0[1], z0 = x0[2];
            const i128 lifted_y = static_cast<i128>(y0.raw()) + static_cast<i128>(n) * static_cast<i128>(b.raw());
            const auto floor_y = static_cast<std::int64_t>(lifted_y >> 64);
            const i128 pairs = static_cast<i128>(n) * (static_cast<i128>(n) - 1) / 2;
            Phase z = z0 + c * n + wide_scale(pairs, wide_product(a, b)) +
                      wide_scale(n, wide_product(a, y0)) - x0p * floor_y - (a * n) * floor_y;
            return {x0p + a * n, y0 + b * n, z};
        }
    }
    throw DomainError("unknown system kind");
}

cplx evaluate(const MpSystemSpec& sys, const ObservableSpec& F, const Point& x) {
    require_dimension(sys, F);
    return F.evaluate(x);
}

bool acts_symbolically(const MpSystemSpec& sys, const ObservableSpec& F) {
    if (sys.kind() != SystemKind::heisenberg) return true;
    return !F.uses_coordinate(2);
}

ObservableSpec compose(const MpSystemSpec& sys, const ObservableSpec& F, std::size_t which,
                       std::int64_t m) {
    require_dimension(sys, F);
    const auto& p = sys.parameters(which);
    ObservableSpec out(F.dimension());
    switch (sys.kind()) {
        case SystemKind::rotation:
        case SystemKind::commuting_family:
            for (auto t : F.terms()) {
                for (std::size_t i = 0; i < t.freq.size(); ++i) t.phase += scale(t.freq[i], p[i] * m);
                out.add_term(std::move(t));
            }
            return out;
        case SystemKind::skew: {
            const Phase theta = p[0];
            const auto um = static_cast<std::uint64_t>(m);
            for (auto t : F.terms()) {
                t.phase += scale(t.freq[0], theta * m) + scale(t.freq[1], theta.times(um * um));
                t.freq[0] += 2 * Freq(m) * t.freq[1];
                out.add_term(std::move(t));
            }
            return out;
        }
        case SystemKind::doubling:
            if (m < 0) throw DomainError("negative iterate of the doubling map");
            for (auto t : F.terms()) {
                t.freq[0] <<= static_cast<unsigned>(m);
                out.add_term(std::move(t));
            }
            return out;
        case SystemKind::heisenberg:
            if (!acts_symbolically(sys, F))
                throw DomainError("vertical characters have no closed-form iterate");
            for (auto t : F.terms()) {
                t.phase += scale(t.freq[0], p[0] * m) + scale(t.freq[1], p[1] * m);
                out.add_term(std::move(t));
            }
            return out;
    }
    throw DomainError("unknown system kind");
}

cplx integrate(const MpSystemSpec& sys, const ObservableSpec& F, const QuadratureGrid& grid) {
    require_dimension(sys, F);
    if (grid.points_per_dim < 2) throw ConfigError("quadrature grid needs at least 2 points per dimension");
    return F.mean();
}

cplx integrate_on_grid(std::size_t dimension, const std::function<cplx(const Point&)>& integrand,
                       const QuadratureGrid& grid, double max_frequency) {
    const std::int64_t P = grid.points_per_dim;
    if (P < 2) throw ConfigError("quadrature grid needs at least 2 points per dimension");
    if (max_frequency >= 0 && static_cast<double>(P) < 2 * max_frequency + 1)
        throw ConfigError("grid of " + std::to_string(P) + " points per dimension is too coarse for frequency " +
                          std::to_string(max_frequency));
    const double total = std::pow(static_cast<double>(P), static_cast<double>(dimension));
    if (total > 1e8) throw ResourceError("quadrature grid exceeds 1e8 points");
    const auto count = static_cast<std::size_t>(total);
    const cplx sum = parallel_sum(count, [&](std::size_t idx) {
        Point x(dimension);
        for (std::size_t i = 0; i < dimension; ++i) {
            x[i] = Phase::from_rational(static_cast<std::int64_t>(idx % static_cast<std::size_t>(P)), P);
            idx /= static_cast<std::size_t>(P);
        }
        return integrand(x);
    });
    return sum / total;
}

double hk_seminorm_estimate(const MpSystemSpec& sys, const ObservableSpec& F, int k,
                            const std::vector<std::int64_t>& H_caps, const QuadratureGrid& grid) {
    require_dimension(sys, F);
    if (k < 1) throw ValidationError("Host-Kra seminorm needs k >= 1");
    if (H_caps.size() != static_cast<std::size_t>(k)) throw ShapeError("need one cap per direction");
    if (grid.points_per_dim < 2) throw ConfigError("quadrature grid needs at least 2 points per dimension");
    std::size_t tuples = 1;
    for (auto H : H_caps) {
        if (H < 1) throw ValidationError("Host-Kra caps must be >= 1");
        tuples *= static_cast<std::size_t>(H);
    }
    const std::size_t vertices = std::size_t{1} << k;
    const ObservableSpec Fc = F.conj();
    const bool symbolic = acts_symbolically(sys, F);

    auto shifts = [&](std::size_t idx) {
        std::vector<std::int64_t> h(static_cast<std::size_t>(k));
        for (std::size_t i = static_cast<std::size_t>(k); i-- > 0;) {
            const auto Hi = static_cast<std::size_t>(H_caps[i]);
            h[i] = static_cast<std::int64_t>(idx % Hi) + 1;
            idx /= Hi;
        }
        std::vector<std::int64_t> m(vertices, 0);
        for (std::size_t eta = 0; eta < vertices; ++eta)
            for (std::size_t i = 0; i < h.size(); ++i)
                if (eta >> i & 1) m[eta] += h[i];
        return m;
    };

    const cplx sum = parallel_sum(tuples, [&](std::size_t idx) -> cplx {
        const auto m = shifts(idx);
        if (symbolic) {
            ObservableSpec prod = ObservableSpec::constant(F.dimension(), 1.0);
            for (std::size_t eta = 0; eta < vertices; ++eta)
                prod = prod * compose(sys, std::popcount(eta) % 2 ? Fc : F, 0, m[eta]);
            return prod.mean();
        }
        return integrate_on_grid(
            F.dimension(),
            [&](const Point& x) {
                cplx v = 1;
                for (std::size_t eta = 0; eta < vertices; ++eta) {
                    const cplx f = F.evaluate(orbit_point(sys, x, m[eta]));
                    v *= std::popcount(eta) % 2 ? std::conj(f) : f;
                }
                return v;
            },
            grid, -1.0);
    });
    const double avg = std::max(sum.real() / static_cast<double>(tuples), 0.0);
    return std::pow(avg, 1.0 / static_cast<double>(vertices));
}

}  // namespace nilcorr
