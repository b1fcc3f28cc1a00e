#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "nilcorr/decomp.hpp"
#include "nilcorr/error.hpp"

using namespace nilcorr;

namespace {

const Phase kTheta = Phase::from_double(0.6180339887498949);

PhaseAtom linear(Phase a, Phase c0 = {}) { return {{c0, a}, false, "lin"}; }
PhaseAtom quadratic(Phase a) { return {{Phase{}, Phase{}, a}, false, "quad"}; }

SampledSequence rotation_alpha(Window w) {
    const auto spec = CorrelationSpec::iterates(MpSystemSpec::rotation({kTheta}), ObservableSpec::character({-1}),
                                                {ObservableSpec::character({1})});
    return multicorrelation_sequence(spec, w);
}

NilDictionary decoys(int k, Window w, std::mt19937_64& rng, int count) {
    NilDictionary d(k, w);
    std::uniform_real_distribution<double> u(0, 1);
    for (int i = 0; i < count; ++i) d.add(i % 2 || k == 1 ? linear(Phase::from_double(u(rng))) : quadratic(Phase::from_double(u(rng))));
    return d;
}

}  // namespace

TEST(PhaseAtom, RealizationIsBitIdentical) {
    const auto lin = linear(kTheta, Phase::from_double(0.3));
    const auto quad = quadratic(kTheta);
    const auto comp = quad.composed(30, 7);
    for (const auto& a : {lin, quad, comp}) {
        const auto spec = a.realization();
        for (std::int64_t n = 0; n < 500; ++n) EXPECT_EQ(a.eval(n), nilsequence_eval(spec, n));
    }
    EXPECT_THROW((PhaseAtom{{Phase{}, Phase::from_raw(1), kTheta}, false, ""}.realization()), DomainError);
}

TEST(PhaseAtom, CompositionIsExact) {
    const PhaseAtom a{{Phase::from_double(0.1), Phase::from_double(0.77), kTheta, Phase::from_double(0.05)}, false, "cubic"};
    for (std::int64_t W : {1, 6, 30})
        for (std::int64_t b = 0; b <= W; ++b) {
            const auto c = a.composed(W, b);
            for (std::int64_t n = 0; n < 50; ++n) EXPECT_EQ(c.eval(n), a.eval(W * n + b));
        }
}

TEST(PhaseAtom, DualAtomIsTruncatedDual) {
    auto q = quadratic(kTheta);
    q.coeffs[1] = Phase::from_double(0.25);
    auto d = q;
    d.dual = true;
    const auto samples = SampledSequence::generate(0, 64, [&](std::int64_t n) { return q.eval(n); });
    for (std::int64_t n = 0; n < 10; ++n)
        EXPECT_NEAR(std::abs(truncated_dual(samples, 3, {8, 8}, n) - d.eval(n)), 0, 1e-12);
}

TEST(Dictionary, StepBoundAndDuals) {
    NilDictionary d(1, {0, 10});
    EXPECT_THROW(d.add(quadratic(kTheta)), ValidationError);
    DictionaryOptions opt;
    opt.angles = {kTheta};
    opt.include_duals = true;
    const auto sd = standard_dictionary(opt, {1, 101});
    EXPECT_EQ(sd.duals_only().size() * 2, sd.size());
    for (const auto& a : sd.atoms()) EXPECT_LE(a.step(), 2);
}

TEST(Fit, ExactRecovery) {
    std::mt19937_64 rng(5);
    const Window w{1, 4001};
    auto dict = decoys(1, w, rng, 20);
    dict.add(linear(kTheta));
    const auto alpha = rotation_alpha({0, 4002});
    const auto fit = fit_nilsequence(alpha, dict, FitMode::least_squares);
    EXPECT_FALSE(fit.regularized);
    EXPECT_NEAR(std::abs(fit.coefficients.back() - 1.0), 0, 1e-10);
    for (std::size_t i = 0; i + 1 < fit.coefficients.size(); ++i) EXPECT_NEAR(std::abs(fit.coefficients[i]), 0, 1e-10);
    EXPECT_LE(fit.residual, 1e-9);
    const auto table = PrimeTable::build(4000);
    const auto r = decomposition_report(alpha, fit.psi, 4000, table, 1e-8);
    EXPECT_LE(r.cesaro_l1, 1e-8);
    EXPECT_LE(r.prime_l1, 1e-8);
    EXPECT_TRUE(r.achieved);
}

TEST(Fit, SkewQuadraticRecovery) {
    const Phase theta = Phase::from_double(0.2360679774997898);
    const auto spec = CorrelationSpec::iterates(MpSystemSpec::skew(theta), ObservableSpec::character({0, 1}),
                                                {ObservableSpec::character({0, -2}), ObservableSpec::character({0, 1})});
    const auto alpha = multicorrelation_sequence(spec, {1, 3001});
    DictionaryOptions opt;
    opt.angles = {theta};
    const auto dict = standard_dictionary(opt, {1, 3001});
    const auto fit = fit_nilsequence(alpha, dict, FitMode::least_squares);
    const auto r = decomposition_report(alpha, fit.psi, 3000, PrimeTable::build(3000), 0.01, 1, {{1024}, 4, 0});
    EXPECT_LE(r.cesaro_l1, 1e-8);
    EXPECT_LE(r.prime_l1, 1e-8);
    EXPECT_TRUE(r.achieved);
}

TEST(Fit, RankDeficientIsRegularized) {
    NilDictionary d(2, {0, 500});
    d.add(linear(Phase::from_rational(1, 2)));
    d.add(quadratic(Phase::from_rational(1, 2)));  // e(n^2 / 2) = e(n / 2)
    const auto alpha = SampledSequence::generate(0, 500, [](std::int64_t n) { return n % 2 ? -1.0 : 1.0; });
    const auto fit = fit_nilsequence(alpha, d, FitMode::least_squares);
    EXPECT_TRUE(fit.regularized);
    EXPECT_LE(fit.residual, 1e-6);
}

TEST(Fit, ResidualShrinksAsDictionaryGrows) {
    std::mt19937_64 rng(17);
    const Window w{0, 2000};
    std::uniform_real_distribution<double> u(-1, 1);
    std::vector<cplx> v(2000);
    for (auto& z : v) z = {u(rng), u(rng)};
    const SampledSequence alpha(0, v);
    NilDictionary d(2, w);
    double prev = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 15; ++i) {
        d.add(i % 2 ? linear(Phase::from_double(u(rng))) : quadratic(Phase::from_double(u(rng))));
        const double r = fit_nilsequence(alpha, d, FitMode::least_squares).residual;
        EXPECT_LE(r, prev + 1e-12 * std::max(1.0, prev));
        prev = r;
    }
}

TEST(Fit, ConvexModeConstraints) {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(-1, 1);
    DictionaryOptions opt;
    opt.step = 1;
    opt.angles = {kTheta};
    opt.include_duals = true;
    const Window w{1, 1001};
    const auto dict = standard_dictionary(opt, w);
    for (int t = 0; t < 10; ++t) {
        std::vector<cplx> v(1000);
        const double scale = 1 + 3 * (t % 3);
        for (auto& z : v) z = scale * cplx{u(rng), u(rng)};
        const auto fit = fit_nilsequence(SampledSequence(1, v), dict, FitMode::convex);
        double sum = 0;
        for (std::size_t i = 0; i < fit.coefficients.size(); ++i) {
            const cplx c = fit.coefficients[i];
            EXPECT_EQ(c.imag(), 0.0);
            EXPECT_GE(c.real(), 0.0);
            if (!dict.atoms()[i].dual) EXPECT_EQ(c, cplx(0.0));
            sum += c.real();
        }
        EXPECT_LE(sum, 1 + 1e-12);
    }
    // Scaled target forces the sum constraint to bind.
    const auto big = SampledSequence::generate(1, 1000, [&](std::int64_t n) { return 3.0 * e(kTheta * n); });
    const auto fit = fit_nilsequence(big, dict, FitMode::convex);
    double sum = 0;
    for (auto c : fit.coefficients) sum += c.real();
    EXPECT_NEAR(sum, 1.0, 1e-6);

    const auto alpha = rotation_alpha({1, 1001});
    const auto exact = fit_nilsequence(alpha, dict, FitMode::convex);
    EXPECT_LE(exact.residual, 1e-8);
    EXPECT_THROW(fit_nilsequence(alpha, standard_dictionary({}, w), FitMode::convex), ValidationError);
}

TEST(Report, Examples) {
    const std::int64_t N = 5000;
    const auto table = PrimeTable::build(N);
    const auto alpha = rotation_alpha({1, N + 1});
    auto r = decomposition_report(alpha, alpha, N, table, 1e-300);
    EXPECT_EQ(r.cesaro_l1, 0.0);
    EXPECT_EQ(r.prime_l1, 0.0);
    EXPECT_TRUE(r.achieved);
    r = decomposition_report(alpha, SampledSequence::constant(1, N, 0.0), N, table, 0.5);
    EXPECT_NEAR(r.cesaro_l1, 1.0, 1e-12);
    EXPECT_NEAR(r.prime_l1, 1.0, 1e-12);
    EXPECT_FALSE(r.achieved);
    r = decomposition_report(alpha, alpha, N, table, 0.1, 30);
    EXPECT_EQ(r.excluded_primes, (std::vector<std::int64_t>{2, 3, 5}));
    EXPECT_EQ(r.primes_used, table.count_upto(N) - 3);
    EXPECT_THROW(decomposition_report(alpha, alpha, N + 1, table, 0.1), RangeError);
}

TEST(WTrick, PlainPathIsBitIdentical) {
    const std::int64_t N = 6000;
    const auto table = PrimeTable::build(N);
    const auto alpha = rotation_alpha({0, N + 31});
    DictionaryOptions opt;
    opt.step = 1;
    opt.angles = {kTheta};
    const auto dict = standard_dictionary(opt, {1, N + 1});
    const auto fit = fit_nilsequence(alpha, dict, FitMode::least_squares);
    const auto plain = decomposition_report(alpha, fit.psi, N, table, 1e-8);
    SampledSequence psi = SampledSequence::constant(0, 1, 0.0);
    const auto w1 = wtrick_decompose(alpha, 1, table, composed_builder(dict), 1e-8, N,
                                     FitMode::least_squares, ResidueFill::zero, &psi);
    EXPECT_EQ(w1.cesaro_l1, plain.cesaro_l1);
    EXPECT_EQ(w1.prime_l1, plain.prime_l1);
    EXPECT_EQ(w1.coefficients, fit.coefficients);
    for (std::int64_t n = 1; n <= N; ++n) ASSERT_EQ(psi[n], fit.psi[n]);
}

TEST(WTrick, ResidueFits) {
    const std::int64_t N = 6000;
    const auto table = PrimeTable::build(N);
    const auto alpha = rotation_alpha({0, N + 31});
    DictionaryOptions opt;
    opt.step = 1;
    opt.angles = {kTheta};
    const auto builder = composed_builder(standard_dictionary(opt, {1, N + 1}));
    for (std::int64_t W : {6, 30}) {
        const auto r = wtrick_decompose(alpha, W, table, builder, 1e-8, N);
        EXPECT_LE(r.prime_l1, 1e-8);
        // Zero parts on the non-coprime residues cost 1 - phi(W)/W in Cesaro mean.
        EXPECT_NEAR(r.cesaro_l1, 1.0 - double(euler_totient(W)) / W, 0.01);
        const auto f = wtrick_decompose(alpha, W, table, builder, 1e-8, N, FitMode::least_squares, ResidueFill::fit);
        EXPECT_LE(f.prime_l1, 1e-8);
        EXPECT_LE(f.cesaro_l1, 1e-8);
        EXPECT_EQ(f.excluded_primes.size(), W == 6 ? 2u : 3u);
    }
    // alpha supported on the coprime residues only.
    const auto mixture = SampledSequence::generate(0, N + 31, [&](std::int64_t n) {
        return std::gcd(n, std::int64_t{6}) == 1 ? alpha[n] : cplx(0.0);
    });
    const auto m = wtrick_decompose(mixture, 6, table, builder, 1e-8, N);
    EXPECT_LE(m.prime_l1, 1e-8);
    EXPECT_LE(m.cesaro_l1, 1e-8);
    // A plain fit of the mixture cannot match it; the residue pipeline can.
    const auto plain = fit_nilsequence(mixture, standard_dictionary(opt, {1, N + 1}), FitMode::least_squares);
    EXPECT_GT(decomposition_report(mixture, plain.psi, N, table, 1e-8).cesaro_l1, 0.1);
}

TEST(ProductExperiment, DoublingFactorVanishes) {
    const std::int64_t N = 4000;
    const auto table = PrimeTable::build(N);
    const auto nil = CorrelationSpec::iterates(MpSystemSpec::rotation({kTheta}), ObservableSpec::character({-1}),
                                               {ObservableSpec::character({1})});
    ObservableSpec f = ObservableSpec::character({1}, 0.5);
    f.add_term({{Freq(-1)}, 0.5, Phase{}});
    const auto mix = CorrelationSpec::iterates(MpSystemSpec::doubling(), f, {f});
    DictionaryOptions opt;
    opt.step = 1;
    opt.angles = {kTheta};
    const auto ex = product_system_experiment(nil, mix, standard_dictionary(opt, {1, N + 1}), 2.0 / N, N, table);
    for (std::int64_t n = 1; n <= N; ++n) ASSERT_EQ(ex.alpha[n], cplx(0.0));
    EXPECT_LE(ex.report.cesaro_l1, 2.0 / N);
    EXPECT_LE(ex.report.prime_l1, 2.0 / N);

    // Trivial mixing factor: pure nil case.
    const auto one = CorrelationSpec::iterates(MpSystemSpec::doubling(), ObservableSpec::constant(1, 1.0),
                                               {ObservableSpec::constant(1, 1.0)});
    const auto pure = product_system_experiment(nil, one, standard_dictionary(opt, {1, N + 1}), 1e-8, N, table);
    EXPECT_TRUE(pure.report.achieved);
}
