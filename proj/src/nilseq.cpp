#include "nilcorr/nilseq.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "nilcorr/error.hpp"
#include "nilcorr/parallel.hpp"

namespace nilcorr {

void NilsequenceSpec::validate() const {
    if (system.kind() == SystemKind::doubling)
        throw ValidationError("nilsequences need a nilsystem; the doubling map is not one");
    if (system.kind() == SystemKind::commuting_family)
        throw ValidationError("nilsequences use a single transformation");
    if (F.dimension() != system.dimension() || x0.size() != system.dimension())
        throw ValidationError("observable or basepoint dimension does not match the system");
}

cplx nilsequence_eval(const NilsequenceSpec& spec, std::int64_t n) {
    spec.validate();
    return evaluate(spec.system, spec.F, orbit_point(spec.system, spec.x0, n));
}

SampledSequence nilsequence_samples(const NilsequenceSpec& spec, Window window) {
    spec.validate();
    if (window.length() <= 0) throw RangeError("empty nilsequence window");
    return SampledSequence::generate(window.begin, static_cast<std::size_t>(window.length()),
                                     [&](std::int64_t n) {
                                         return evaluate(spec.system, spec.F,
                                                         orbit_point(spec.system, spec.x0, n));
                                     });
}

namespace {

void check_truncation(int k, const DualTruncation& t) {
    if (k < 1) throw ValidationError("dual degree k must be >= 1");
    if (t.outer < 1 || t.inner < 1) throw ValidationError("dual box sides must be >= 1");
    if (std::pow(static_cast<double>(t.outer), k - 1) * static_cast<double>(t.inner) > 1e10)
        throw ResourceError("dual box exceeds 1e10 shifts");
}

}  // namespace

cplx truncated_dual(const SampledSequence& seq, int k, const DualTruncation& trunc, std::int64_t n) {
    check_truncation(k, trunc);
    if (!seq.covers(Window{n, n + trunc.reach(k) + 1}))
        throw RangeError("dual at " + std::to_string(n) + " needs samples up to " +
                         std::to_string(n + trunc.reach(k)));
    const std::size_t faces = std::size_t{1} << (k - 1);
    std::size_t tuples = 1;
    for (int i = 0; i < k - 1; ++i) tuples *= static_cast<std::size_t>(trunc.outer);

    std::vector<std::int64_t> off(faces);
    CompensatedSum total;
    for (std::size_t idx = 0; idx < tuples; ++idx) {
        // Offsets eta'.h' over the outer directions.
        std::size_t rest = idx;
        std::fill(off.begin(), off.end(), n);
        for (int i = 0; i < k - 1; ++i) {
            const auto h = static_cast<std::int64_t>(rest % static_cast<std::size_t>(trunc.outer)) + 1;
            rest /= static_cast<std::size_t>(trunc.outer);
            for (std::size_t e = 0; e < faces; ++e)
                if (e >> i & 1) off[e] += h;
        }
        cplx fixed = 1;
        for (std::size_t e = 1; e < faces; ++e)
            fixed *= std::popcount(e) % 2 ? std::conj(seq[off[e]]) : seq[off[e]];
        cplx inner = 0;
        for (std::int64_t h = 1; h <= trunc.inner; ++h) {
            cplx p = 1;
            for (std::size_t e = 0; e < faces; ++e)
                p *= std::popcount(e) % 2 ? seq[off[e] + h] : std::conj(seq[off[e] + h]);
            inner += p;
        }
        total.add(fixed * inner);
    }
    return total.value() / (static_cast<double>(tuples) * static_cast<double>(trunc.inner));
}

std::optional<cplx> symbolic_dual(const NilsequenceSpec& spec, int k, std::int64_t n) {
    spec.validate();
    if (k < 1) throw ValidationError("dual degree k must be >= 1");
    ObservableSpec F = spec.F;
    F.compact();
    if (F.terms().empty()) return cplx{0.0};
    if (!F.is_single_character()) return std::nullopt;
    const TrigTerm& t = F.terms().front();
    const auto& p = spec.system.parameters();
    const Point& x0 = spec.x0;

    // Phase coefficients of p(m) = freq . (T^m x0) in m.
    Phase lin, quad;
    switch (spec.system.kind()) {
    case SystemKind::rotation:
        for (std::size_t i = 0; i < p.size(); ++i) lin += scale(t.freq[i], p[i]);
        break;
    case SystemKind::skew:
        lin = scale(t.freq[0], p[0]) + scale(2 * t.freq[1], x0[0]);
        quad = scale(t.freq[1], p[0]);
        break;
    case SystemKind::heisenberg:
        if (t.freq[2] != 0) return std::nullopt;
        lin = scale(t.freq[0], p[0]) + scale(t.freq[1], p[1]);
        break;
    default:
        return std::nullopt;
    }
    const int degree = quad != Phase{} ? 2 : lin != Phase{} ? 1 : 0;
    if (degree >= k) return cplx{0.0};
    const cplx c = t.coeff;
    const double mod = std::pow(std::abs(c), static_cast<double>((std::size_t{1} << k) - 2));
    const cplx value = evaluate(spec.system, F, orbit_point(spec.system, x0, n));
    // value = c e(p(n)); conj(value) = conj(c) e(-p(n)).
    return mod * std::conj(value);
}

DualValue dual_sequence(const NilsequenceSpec& spec, int k, const DualTruncation& trunc,
                        std::int64_t n) {
    spec.validate();
    check_truncation(k, trunc);
    const SampledSequence s = nilsequence_samples(spec, Window{n, n + trunc.reach(k) + 1});
    return {truncated_dual(s, k, trunc, n), symbolic_dual(spec, k, n)};
}

SampledSequence dual_sequence_samples(const NilsequenceSpec& spec, int k,
                                      const DualTruncation& trunc, Window window) {
    spec.validate();
    check_truncation(k, trunc);
    if (window.length() <= 0) throw RangeError("empty dual window");
    const SampledSequence s =
        nilsequence_samples(spec, Window{window.begin, window.end + trunc.reach(k)});
    return SampledSequence::generate(window.begin, static_cast<std::size_t>(window.length()),
                                     [&](std::int64_t n) { return truncated_dual(s, k, trunc, n); });
}

DualConvergenceReport dual_uniform_convergence_check(const NilsequenceSpec& spec, int k,
                                                     const std::vector<DualTruncation>& ladder,
                                                     const std::vector<std::int64_t>& probe_ns) {
    spec.validate();
    if (ladder.empty() || probe_ns.empty())
        throw ValidationError("convergence check needs a ladder and probe positions");
    for (std::size_t i = 0; i < ladder.size(); ++i) {
        check_truncation(k, ladder[i]);
        if (i > 0 && (ladder[i].outer < ladder[i - 1].outer || ladder[i].inner < ladder[i - 1].inner ||
                      (ladder[i].outer == ladder[i - 1].outer && ladder[i].inner == ladder[i - 1].inner)))
            throw ValidationError("truncation ladder must strictly increase");
    }
    const auto [lo, hi] = std::minmax_element(probe_ns.begin(), probe_ns.end());
    std::int64_t reach = 0;
    for (const auto& t : ladder) reach = std::max(reach, t.reach(k));
    const SampledSequence s = nilsequence_samples(spec, Window{*lo, *hi + reach + 1});

    const std::size_t L = ladder.size(), P = probe_ns.size();
    std::vector<cplx> values(L * P);
    parallel_for(L * P, [&](std::size_t i) {
        values[i] = truncated_dual(s, k, ladder[i / P], probe_ns[i % P]);
    });

    std::vector<std::optional<cplx>> exact(P);
    DualConvergenceReport r;
    r.against_symbolic = true;
    for (std::size_t j = 0; j < P; ++j) {
        exact[j] = symbolic_dual(spec, k, probe_ns[j]);
        if (!exact[j]) r.against_symbolic = false;
    }
    for (std::size_t l = 0; l < L; ++l) {
        double dev = 0;
        for (std::size_t j = 0; j < P; ++j) {
            const cplx ref = r.against_symbolic ? *exact[j] : values[(L - 1) * P + j];
            dev = std::max(dev, std::abs(values[l * P + j] - ref));
        }
        r.max_deviation_per_level.push_back(dev);
        if (l > 0 && dev > r.max_deviation_per_level[l - 1] + 1e-12) r.monotone_decreasing = false;
    }
    return r;
}

namespace {

Point grid_point(std::size_t dim, std::int64_t P, std::size_t idx) {
    Point x(dim);
    for (std::size_t i = 0; i < dim; ++i) {
        x[i] = Phase::from_rational(static_cast<std::int64_t>(idx % static_cast<std::size_t>(P)), P);
        idx /= static_cast<std::size_t>(P);
    }
    return x;
}

}  // namespace

DualStability dual_l1_stability_check(const MpSystemSpec& sys, const ObservableSpec& F,
                                      const ObservableSpec& G, int k, const DualTruncation& trunc,
                                      const QuadratureGrid& grid, double slack) {
    check_truncation(k, trunc);
    if (sys.kind() == SystemKind::commuting_family)
        throw ValidationError("dual stability uses a single transformation");
    if (F.dimension() != sys.dimension() || G.dimension() != sys.dimension())
        throw ValidationError("observable dimension does not match the system");
    const std::size_t dim = sys.dimension();
    const std::int64_t P = grid.points_per_dim;
    const double total = std::pow(static_cast<double>(P), static_cast<double>(dim));
    if (P < 2) throw ConfigError("quadrature grid needs at least 2 points per dimension");
    if (total > 1e8) throw ResourceError("quadrature grid exceeds 1e8 points");
    const auto count = static_cast<std::size_t>(total);

    for (std::size_t idx = 0; idx < count; ++idx) {
        const Point x = grid_point(dim, P, idx);
        if (std::abs(F.evaluate(x)) > 1 + 1e-12 || std::abs(G.evaluate(x)) > 1 + 1e-12)
            throw ValidationError("dual stability needs |F|, |G| <= 1");
    }

    const std::int64_t reach = trunc.reach(k);
    const cplx sums = parallel_sum(count, [&](std::size_t idx) {
        const Point x = grid_point(dim, P, idx);
        std::vector<cplx> f(static_cast<std::size_t>(reach + 1)), g(f.size());
        for (std::int64_t m = 0; m <= reach; ++m) {
            const Point y = orbit_point(sys, x, m);
            f[static_cast<std::size_t>(m)] = F.evaluate(y);
            g[static_cast<std::size_t>(m)] = G.evaluate(y);
        }
        const double dual_gap = std::abs(truncated_dual(SampledSequence(0, std::move(f)), k, trunc, 0) -
                                         truncated_dual(SampledSequence(0, std::move(g)), k, trunc, 0));
        // Real part: dual gap; imaginary part: |F - G| at x.
        return cplx{dual_gap, std::abs(F.evaluate(x) - G.evaluate(x))};
    });
    DualStability r;
    r.lhs = sums.real() / total;
    r.rhs = static_cast<double>((std::size_t{1} << k) - 1) * sums.imag() / total;
    r.holds = r.lhs <= r.rhs + slack;
    return r;
}

SampledSequence glue_by_residue(const std::vector<SampledSequence>& parts, std::int64_t W,
                                std::int64_t length) {
    if (W < 1) throw ValidationError("W must be >= 1");
    if (length < 1) throw RangeError("glued length must be >= 1");
    if (static_cast<std::int64_t>(parts.size()) != W)
        throw ShapeError("need exactly W = " + std::to_string(W) + " parts");
    const std::int64_t per = (length + W - 1) / W;
    for (const auto& p : parts)
        if (!p.covers(Window{0, per}))
            throw ShapeError("each part must cover [0, " + std::to_string(per) + ")");
    std::vector<cplx> out(static_cast<std::size_t>(length));
    for (std::int64_t m = 1; m <= length; ++m) {
        const std::int64_t n = (m - 1) / W, b = m - W * n;
        out[static_cast<std::size_t>(m - 1)] = parts[static_cast<std::size_t>(b - 1)][n];
    }
    return SampledSequence(1, std::move(out));
}

SampledSequence extract_residue(const SampledSequence& seq, std::int64_t W, std::int64_t b,
                                std::int64_t count) {
    if (W < 1 || b < 1 || b > W) throw ValidationError("residue b must lie in {1, ..., W}");
    if (count < 1) throw RangeError("extracted length must be >= 1");
    if (!seq.covers(b) || !seq.covers(W * (count - 1) + b))
        throw RangeError("sequence does not cover the requested residue class");
    std::vector<cplx> out(static_cast<std::size_t>(count));
    for (std::int64_t n = 0; n < count; ++n) out[static_cast<std::size_t>(n)] = seq[W * n + b];
    return SampledSequence(0, std::move(out));
}

}  // namespace nilcorr
