#include "nilcorr/decomp.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "nilcorr/error.hpp"
#include "nilcorr/parallel.hpp"

namespace nilcorr {

int PhaseAtom::degree() const {
    for (int j = static_cast<int>(coeffs.size()) - 1; j > 0; --j)
        if (coeffs[static_cast<std::size_t>(j)] != Phase{}) return j;
    return 0;
}

int PhaseAtom::step() const { return std::max(1, degree()); }

cplx PhaseAtom::eval(std::int64_t n) const {
    Phase acc;
    for (std::size_t j = coeffs.size(); j-- > 0;) acc = acc * n + coeffs[j];
    const cplx v = e(acc);
    return dual ? std::conj(v) : v;
}

PhaseAtom PhaseAtom::composed(std::int64_t W, std::int64_t b) const {
    // sum_j a_j (W n + b)^j = sum_i n^i sum_{j >= i} a_j binom(j, i) W^i b^(j - i),
    // with the integer multipliers taken modulo 2^64.
    const std::size_t d = coeffs.size();
    std::vector<Phase> out(d);
    const auto uW = static_cast<std::uint64_t>(W), ub = static_cast<std::uint64_t>(b);
    for (std::size_t j = 0; j < d; ++j) {
        std::uint64_t binom = 1;
        for (std::size_t i = 0; i <= j; ++i) {
            if (i > 0) binom = binom * (j - i + 1) / i;
            std::uint64_t mult = binom;
            for (std::size_t t = 0; t < i; ++t) mult *= uW;
            for (std::size_t t = 0; t < j - i; ++t) mult *= ub;
            out[i] += coeffs[j].times(mult);
        }
    }
    PhaseAtom a{std::move(out), dual, description};
    if (W != 1 || b != 0) {
        std::ostringstream s;
        s << description << " @ " << W << "n+" << b;
        a.description = s.str();
    }
    return a;
}

NilsequenceSpec PhaseAtom::realization() const {
    const int deg = degree();
    auto c = [&](std::size_t j) { return j < coeffs.size() ? coeffs[j] : Phase{}; };
    if (deg <= 1)
        return {MpSystemSpec::rotation({c(1)}), ObservableSpec::character({1}), Point{c(0)}};
    if (deg == 2) {
        if (c(1).raw() & 1)
            throw DomainError("linear coefficient has no exact half; no skew realization");
        // y_n = y0 + 2 n x0 + n^2 theta with 2 x0 = c(1).
        return {MpSystemSpec::skew(c(2)), ObservableSpec::character({0, 1}),
                Point{Phase::from_raw(c(1).raw() >> 1), c(0)}};
    }
    throw DomainError("phase atoms of degree above 2 have no built-in realization");
}

NilDictionary::NilDictionary(int step_bound, Window window) : k_(step_bound), window_(window) {
    if (k_ < 1) throw ValidationError("dictionary step bound must be >= 1");
    if (window_.length() <= 0) throw RangeError("empty dictionary window");
}

void NilDictionary::add(PhaseAtom atom) {
    if (atom.step() > k_)
        throw ValidationError("atom '" + atom.description + "' has step " +
                              std::to_string(atom.step()) + " above the bound " + std::to_string(k_));
    std::vector<cplx> s(static_cast<std::size_t>(window_.length()));
    for (std::int64_t n = window_.begin; n < window_.end; ++n)
        s[static_cast<std::size_t>(n - window_.begin)] = atom.eval(n);
    atoms_.push_back(std::move(atom));
    samples_.push_back(std::move(s));
}

NilDictionary NilDictionary::composed(std::int64_t W, std::int64_t b, Window window) const {
    NilDictionary d(k_, window);
    for (const auto& a : atoms_) d.add(a.composed(W, b));
    return d;
}

NilDictionary NilDictionary::duals_only() const {
    NilDictionary d(k_, window_);
    for (std::size_t i = 0; i < atoms_.size(); ++i)
        if (atoms_[i].dual) {
            d.atoms_.push_back(atoms_[i]);
            d.samples_.push_back(samples_[i]);
        }
    return d;
}

NilDictionary standard_dictionary(const DictionaryOptions& opt, Window window) {
    NilDictionary dict(opt.step, window);
    std::vector<PhaseAtom> atoms;
    std::map<std::vector<std::uint64_t>, bool> seen;
    auto push = [&](std::vector<Phase> coeffs, std::string desc) {
        std::vector<std::uint64_t> key;
        for (Phase p : coeffs) key.push_back(p.raw());
        while (key.size() > 1 && key.back() == 0) key.pop_back();
        if (seen.count(key)) return;
        seen[key] = true;
        atoms.push_back({std::move(coeffs), false, std::move(desc)});
    };
    auto name = [](double theta, std::int64_t c, int d) {
        std::ostringstream s;
        s.precision(17);
        s << "e(" << c << "*" << theta << "*n^" << d << ")";
        return s.str();
    };

    push({Phase{}}, "1");
    for (int d = 1; d <= opt.step; ++d) {
        auto with = [&](Phase a) {
            std::vector<Phase> coeffs(static_cast<std::size_t>(d + 1));
            coeffs[static_cast<std::size_t>(d)] = a;
            return coeffs;
        };
        for (Phase theta : opt.angles)
            for (std::int64_t c : opt.multipliers)
                if (theta * c != Phase{}) push(with(theta * c), name(theta.to_double(), c, d));
        for (std::int64_t a = 1; a < opt.rational_denominator; ++a)
            push(with(Phase::from_rational(a, opt.rational_denominator)),
                 name(static_cast<double>(a) / static_cast<double>(opt.rational_denominator), 1, d));
        for (double f : opt.fiducial)
            for (std::int64_t c : {1, -1})
                push(with(Phase::from_double(f) * c), name(f, c, d));
    }
    if (opt.include_duals) {
        const std::size_t base = atoms.size();
        for (std::size_t i = 0; i < base; ++i) {
            PhaseAtom d = atoms[i];
            d.dual = true;
            d.description = "D" + std::to_string(atoms[i].step() + 1) + "[" + atoms[i].description + "]";
            atoms.push_back(std::move(d));
        }
    }
    for (auto& a : atoms) dict.add(std::move(a));
    return dict;
}

namespace {

// Capped simplex {c >= 0, sum c <= 1}.
void project_capped_simplex(Eigen::VectorXd& c) {
    c = c.cwiseMax(0.0);
    if (c.sum() <= 1.0) return;
    std::vector<double> u(c.data(), c.data() + c.size());
    std::sort(u.begin(), u.end(), std::greater<>());
    double cum = 0, tau = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        cum += u[i];
        const double t = (cum - 1.0) / static_cast<double>(i + 1);
        if (u[i] - t > 0) tau = t;
    }
    c = (c.array() - tau).cwiseMax(0.0).matrix();
}

// Lawson-Hanson active set for min 1/2 c'Qc - q'c, c >= 0.
Eigen::VectorXd nnls_gram(const Eigen::MatrixXd& Q, const Eigen::VectorXd& q) {
    const Eigen::Index m = q.size();
    Eigen::VectorXd c = Eigen::VectorXd::Zero(m);
    std::vector<bool> passive(static_cast<std::size_t>(m), false);
    const double tol = 1e-12 * std::max(1.0, q.cwiseAbs().maxCoeff());
    auto solve_passive = [&] {
        std::vector<Eigen::Index> idx;
        for (Eigen::Index i = 0; i < m; ++i)
            if (passive[static_cast<std::size_t>(i)]) idx.push_back(i);
        Eigen::MatrixXd Qp(idx.size(), idx.size());
        Eigen::VectorXd qp(idx.size());
        for (std::size_t a = 0; a < idx.size(); ++a) {
            qp(static_cast<Eigen::Index>(a)) = q(idx[a]);
            for (std::size_t b = 0; b < idx.size(); ++b)
                Qp(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = Q(idx[a], idx[b]);
        }
        const Eigen::VectorXd zp = Qp.ldlt().solve(qp);
        Eigen::VectorXd z = Eigen::VectorXd::Zero(m);
        for (std::size_t a = 0; a < idx.size(); ++a) z(idx[a]) = zp(static_cast<Eigen::Index>(a));
        return z;
    };
    for (Eigen::Index outer = 0; outer < 3 * m + 10; ++outer) {
        const Eigen::VectorXd w = q - Q * c;
        Eigen::Index best = -1;
        double best_w = tol;
        for (Eigen::Index i = 0; i < m; ++i)
            if (!passive[static_cast<std::size_t>(i)] && w(i) > best_w) {
                best = i;
                best_w = w(i);
            }
        if (best < 0) break;
        passive[static_cast<std::size_t>(best)] = true;
        for (Eigen::Index inner = 0; inner < 3 * m + 10; ++inner) {
            const Eigen::VectorXd z = solve_passive();
            double step = 1.0;
            bool clipped = false;
            for (Eigen::Index i = 0; i < m; ++i)
                if (passive[static_cast<std::size_t>(i)] && z(i) <= 0) {
                    clipped = true;
                    const double denom = c(i) - z(i);
                    if (denom > 0) step = std::min(step, c(i) / denom);
                }
            if (!clipped) {
                c = z;
                break;
            }
            c += step * (z - c);
            for (Eigen::Index i = 0; i < m; ++i)
                if (passive[static_cast<std::size_t>(i)] && c(i) <= 1e-15) {
                    passive[static_cast<std::size_t>(i)] = false;
                    c(i) = 0;
                }
        }
    }
    return c;
}

Eigen::VectorXd fista_capped(const Eigen::MatrixXd& Q, const Eigen::VectorXd& q, Eigen::VectorXd c) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Q, Eigen::EigenvaluesOnly);
    const double L = std::max(es.eigenvalues().maxCoeff(), 1e-300);
    project_capped_simplex(c);
    Eigen::VectorXd y = c, prev = c;
    double t = 1;
    for (int it = 0; it < 50000; ++it) {
        Eigen::VectorXd next = y - (Q * y - q) / L;
        project_capped_simplex(next);
        const double t_next = (1 + std::sqrt(1 + 4 * t * t)) / 2;
        y = next + ((t - 1) / t_next) * (next - prev);
        const double change = (next - prev).cwiseAbs().maxCoeff();
        prev = next;
        t = t_next;
        if (change < 1e-15) break;
    }
    return prev;
}

}  // namespace

FitResult fit_nilsequence(const SampledSequence& alpha, const NilDictionary& dict, FitMode mode) {
    const Window w = dict.window();
    if (dict.size() == 0) throw ValidationError("empty dictionary");
    if (!alpha.covers(w)) throw RangeError("alpha does not cover the dictionary window");
    std::vector<std::size_t> cols;
    for (std::size_t j = 0; j < dict.size(); ++j)
        if (mode == FitMode::least_squares || dict.atoms()[j].dual) cols.push_back(j);
    if (cols.empty()) throw ValidationError("convex mode needs dual atoms in the dictionary");

    const auto len = static_cast<Eigen::Index>(w.length());
    const auto m = static_cast<Eigen::Index>(cols.size());
    Eigen::MatrixXcd A(len, m);
    for (Eigen::Index j = 0; j < m; ++j)
        A.col(j) = Eigen::Map<const Eigen::VectorXcd>(dict.samples()[cols[static_cast<std::size_t>(j)]].data(), len);
    Eigen::VectorXcd y(len);
    for (Eigen::Index i = 0; i < len; ++i) y(i) = alpha[w.begin + i];

    Eigen::MatrixXcd G = A.adjoint() * A;
    const Eigen::VectorXcd r = A.adjoint() * y;
    FitResult out{SampledSequence(w.begin, std::vector<cplx>(static_cast<std::size_t>(len))), {}, false, 0};

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(G, Eigen::EigenvaluesOnly);
    const double emax = es.eigenvalues().maxCoeff(), emin = es.eigenvalues().minCoeff();
    if (emax <= 0 || emin <= 1e-12 * emax) {
        out.regularized = true;
        const double scale = std::max(1.0, G.diagonal().real().maxCoeff());
        G.diagonal().array() += 1e-10 * scale;
    }

    Eigen::VectorXcd c(m);
    if (mode == FitMode::least_squares) {
        c = G.ldlt().solve(r);
    } else {
        const Eigen::MatrixXd Q = G.real();
        const Eigen::VectorXd q = r.real();
        Eigen::VectorXd x = nnls_gram(Q, q);
        if (x.sum() > 1 + 1e-12) x = fista_capped(Q, q, x);
        c = x.cast<cplx>();
    }

    const Eigen::VectorXcd psi = A * c;
    out.coefficients.assign(dict.size(), cplx{0.0});
    for (Eigen::Index j = 0; j < m; ++j) out.coefficients[cols[static_cast<std::size_t>(j)]] = c(j);
    out.psi = SampledSequence(w.begin, std::vector<cplx>(psi.data(), psi.data() + len));
    out.residual = (y - psi).norm();
    return out;
}

DecompositionReport decomposition_report(const SampledSequence& alpha, const SampledSequence& psi,
                                         std::int64_t N, const PrimeTable& table,
                                         double epsilon_target, std::int64_t exclude_modulus,
                                         const CesaroLadder& ladder) {
    if (N < 2) throw RangeError("decomposition report needs N >= 2");
    if (exclude_modulus < 1) throw ValidationError("excluded modulus must be >= 1");
    const Window w{1, N + 1};
    if (!alpha.covers(w) || !psi.covers(w)) throw RangeError("alpha and psi must cover [1, N]");
    if (table.limit() < N) throw RangeError("prime table does not reach N");

    DecompositionReport r;
    r.N = N;
    r.W = exclude_modulus;
    r.epsilon_target = epsilon_target;
    const SampledSequence diff = abs_difference(alpha.slice(w), psi.slice(w));
    const AverageEstimate est = uniform_cesaro_estimate(diff, ladder);
    r.cesaro_l1 = est.value.real();
    r.cesaro_fluctuation = est.fluctuation;

    CompensatedSum s;
    for (std::int64_t p = 2; p <= N; ++p) {
        if (!table.is_prime(p)) continue;
        if (exclude_modulus % p == 0) {
            r.excluded_primes.push_back(p);
            continue;
        }
        s.add(diff[p].real());
        ++r.primes_used;
    }
    if (r.primes_used == 0) throw RangeError("no primes left in [1, N] after exclusions");
    r.prime_l1 = s.real() / static_cast<double>(r.primes_used);
    r.achieved = r.cesaro_l1 <= epsilon_target && r.prime_l1 <= epsilon_target;
    return r;
}

DecompositionReport wtrick_decompose(const SampledSequence& alpha, std::int64_t W,
                                     const PrimeTable& table, const DictBuilder& dict_builder,
                                     double epsilon_target, std::int64_t N, FitMode mode,
                                     ResidueFill fill, SampledSequence* psi_out) {
    if (W < 1) throw ValidationError("W must be >= 1");
    if (N < 1) throw RangeError("N must be >= 1");
    const std::int64_t per = (N + W - 1) / W;
    if (!alpha.covers(Window{1, W * per + 1}))
        throw RangeError("alpha must cover [1, " + std::to_string(W * per) + "]");

    std::vector<SampledSequence> parts(static_cast<std::size_t>(W),
                                       SampledSequence::constant(0, static_cast<std::size_t>(per), 0.0));
    std::vector<FitResult> fits(static_cast<std::size_t>(W),
                                FitResult{SampledSequence::constant(0, 1, 0.0), {}, false, 0});
    std::vector<std::vector<std::string>> names(static_cast<std::size_t>(W));
    std::vector<bool> fitted(static_cast<std::size_t>(W), false);
    parallel_for(static_cast<std::size_t>(W), [&](std::size_t i) {
        const auto b = static_cast<std::int64_t>(i) + 1;
        if (std::gcd(b, W) != 1 && fill == ResidueFill::zero) return;
        const NilDictionary dict = dict_builder(W, b, Window{0, per});
        fits[i] = fit_nilsequence(extract_residue(alpha, W, b, per), dict, mode);
        for (const auto& a : dict.atoms()) names[i].push_back(a.description);
        parts[i] = fits[i].psi;
        fitted[i] = true;
    });

    const SampledSequence psi = glue_by_residue(parts, W, N);
    DecompositionReport r = decomposition_report(alpha, psi, N, table, epsilon_target, W);
    for (std::size_t i = 0; i < fits.size(); ++i) {
        if (!fitted[i]) continue;
        r.regularized = r.regularized || fits[i].regularized;
        r.coefficients.insert(r.coefficients.end(), fits[i].coefficients.begin(), fits[i].coefficients.end());
        for (const auto& n : names[i])
            r.atoms.push_back(W == 1 ? n : "b=" + std::to_string(i + 1) + ": " + n);
    }
    if (psi_out) *psi_out = psi;
    return r;
}

DictBuilder composed_builder(NilDictionary base) {
    return [base = std::move(base)](std::int64_t W, std::int64_t b, Window window) {
        return base.composed(W, b, window);
    };
}

ProductExperiment product_system_experiment(const CorrelationSpec& nil_part,
                                            const CorrelationSpec& mixing_part,
                                            const NilDictionary& dict, double epsilon_target,
                                            std::int64_t N, const PrimeTable& table) {
    const Window w{1, N + 1};
    const SampledSequence a = multicorrelation_sequence(nil_part, w);
    const SampledSequence b = multicorrelation_sequence(mixing_part, w);
    std::vector<cplx> prod(static_cast<std::size_t>(N));
    for (std::int64_t n = 1; n <= N; ++n) prod[static_cast<std::size_t>(n - 1)] = a[n] * b[n];
    ProductExperiment ex{SampledSequence(1, std::move(prod)), SampledSequence::constant(1, 1, 0.0), {}};
    const FitResult fit = fit_nilsequence(ex.alpha, dict, FitMode::least_squares);
    ex.psi = fit.psi;
    ex.report = decomposition_report(ex.alpha, ex.psi, N, table, epsilon_target);
    ex.report.coefficients = fit.coefficients;
    for (const auto& at : dict.atoms()) ex.report.atoms.push_back(at.description);
    ex.report.regularized = fit.regularized;
    return ex;
}

}  // namespace nilcorr
