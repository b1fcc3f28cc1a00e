#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "nilcorr/error.hpp"
#include "nilcorr/gowers.hpp"
#include "oracles.hpp"

using namespace nilcorr;

namespace {

GowersConfig exact(int k) {
    GowersConfig c;
    c.k = k;
    return c;
}

ZnFunction delta(std::size_t N) {
    std::vector<cplx> v(N, 0.0);
    v[0] = 1.0;
    return ZnFunction(v);
}

}  // namespace

TEST(Gowers, ConstantIsOne) {
    for (int k = 1; k <= 3; ++k)
        EXPECT_NEAR(gowers_norm_zn(ZnFunction::constant(8, 1.0), exact(k)).value, 1.0, 1e-12);
    EXPECT_NEAR(gowers_norm_u2_fft(ZnFunction::constant(32, 1.0)), 1.0, 1e-12);
}

TEST(Gowers, CharacterHasFullU2Norm) {
    const std::size_t N = 16;
    const auto f = ZnFunction::from(N, [&](std::int64_t n) { return oracle::expi(3.0 * n / N); });
    EXPECT_NEAR(gowers_norm_zn(f, exact(2)).value, 1.0, 1e-12);
    // Oracle: naive DFT, fourth moment.
    double m4 = 0;
    for (cplx c : oracle::dft(std::vector<cplx>(f.values().begin(), f.values().end())))
        m4 += std::pow(std::norm(c), 2);
    EXPECT_NEAR(std::pow(m4, 0.25), 1.0, 1e-12);
}

TEST(Gowers, DeltaNorm) {
    EXPECT_NEAR(gowers_norm_zn(delta(8), exact(2)).value, std::pow(8.0, -0.75), 1e-12);
    EXPECT_NEAR(gowers_norm_u2_fft(delta(32)), std::pow(32.0, -0.75), 1e-12);
    // N^{-(k+1)/2^k} at k = 3.
    EXPECT_NEAR(gowers_norm_zn(delta(8), exact(3)).value, std::pow(8.0, -0.5), 1e-12);
}

TEST(Gowers, KOneIsAbsoluteMean) {
    const ZnFunction f({1.0, cplx{0, 1}, -0.5, 0.25});
    EXPECT_NEAR(gowers_norm_zn(f, exact(1)).value, std::abs(cplx{0.75, 1} / 4.0), 1e-12);
}

TEST(Gowers, MatchesBruteForce) {
    std::mt19937_64 rng(11);
    for (int k = 2; k <= 3; ++k)
        for (std::size_t N : {5u, 8u, 9u}) {
            const auto v = oracle::random_disc(N, rng);
            EXPECT_NEAR(gowers_norm_zn(ZnFunction(v), exact(k)).value, oracle::gowers(v, k), 1e-12)
                << "k=" << k << " N=" << N;
        }
}

TEST(Gowers, FftAgreesWithExact) {
    std::mt19937_64 rng(5);
    for (std::size_t N : {8u, 16u, 32u, 64u})
        for (int t = 0; t < 25; ++t) {
            const ZnFunction f(oracle::random_unimodular(N, rng));
            const double ex = gowers_norm_zn(f, exact(2)).value;
            EXPECT_NEAR(gowers_norm_u2_fft(f), ex, 1e-9 * ex);
        }
}

TEST(Gowers, FourierCoefficientsMatchNaiveDft) {
    std::mt19937_64 rng(3);
    const auto v = oracle::random_disc(12, rng);
    const auto fast = fourier_coefficients(ZnFunction(v));
    const auto slow = oracle::dft(v);
    for (std::size_t i = 0; i < v.size(); ++i) EXPECT_NEAR(std::abs(fast[i] - slow[i]), 0, 1e-14);
}

TEST(Gowers, SampledModeTracksExact) {
    std::mt19937_64 rng(9);
    const ZnFunction f(oracle::random_disc(16, rng));
    GowersConfig cfg = exact(2);
    const auto ex = gowers_norm_zn(f, cfg);
    cfg.mode = GowersMode::sampled;
    cfg.sample_count = 200000;
    cfg.rng_seed = 1;
    const auto s1 = gowers_norm_zn(f, cfg);
    EXPECT_LT(std::abs(s1.power - ex.power), 5 * s1.std_error + 1e-12);
    EXPECT_GT(s1.std_error, 0);
    // Same seed, same estimate.
    EXPECT_EQ(gowers_norm_zn(f, cfg).power, s1.power);
    cfg.sample_count = 0;
    EXPECT_THROW(gowers_norm_zn(f, cfg), ValidationError);
}

TEST(Gowers, BudgetAndValidation) {
    GowersConfig cfg = exact(3);
    cfg.budget = 1e5;
    EXPECT_THROW(gowers_norm_zn(ZnFunction::constant(64, 1.0), cfg), ResourceError);
    EXPECT_THROW(gowers_norm_zn(ZnFunction::constant(4, 1.0), exact(0)), ValidationError);
}

TEST(Gowers, ModulationAndScaling) {
    std::mt19937_64 rng(21);
    for (int t = 0; t < 20; ++t) {
        const std::size_t N = 16;
        const ZnFunction f(oracle::random_disc(N, rng));
        const auto chi = ZnFunction::from(N, [&](std::int64_t n) { return oracle::expi(5.0 * n / N); });
        const double base = gowers_norm_zn(f, exact(2)).value;
        EXPECT_NEAR(gowers_norm_zn(f.pointwise_product(chi), exact(2)).value, base, 1e-9);
        const cplx c{0.3, -0.4};
        for (int k = 2; k <= 3; ++k)
            EXPECT_NEAR(gowers_norm_zn(f.scaled(c), exact(k)).value,
                        std::abs(c) * gowers_norm_zn(f, exact(k)).value, 1e-9);
    }
}

TEST(Gowers, MonotoneInK) {
    std::mt19937_64 rng(4);
    for (int t = 0; t < 100; ++t) {
        const std::size_t N = 4 + rng() % 13;
        const ZnFunction f(oracle::random_disc(N, rng));
        EXPECT_LE(gowers_norm_zn(f, exact(2)).value, gowers_norm_zn(f, exact(3)).value + 1e-9);
    }
    const ZnFunction f(oracle::random_disc(8, rng));
    EXPECT_LE(gowers_norm_zn(f, exact(3)).value, gowers_norm_zn(f, exact(4)).value + 1e-9);
}

TEST(Csg, ConstantAndZeroFamilies) {
    std::vector<ZnFunction> ones(4, ZnFunction::constant(8, 1.0));
    auto r = csg_check(ones, exact(2));
    EXPECT_NEAR(r.lhs, 1, 1e-12);
    EXPECT_NEAR(r.rhs, 1, 1e-12);
    EXPECT_TRUE(r.holds);
    ones[2] = ZnFunction::constant(8, 0.0);
    r = csg_check(ones, exact(2));
    EXPECT_EQ(r.lhs, 0);
    EXPECT_EQ(r.rhs, 0);
    EXPECT_TRUE(r.holds);
}

TEST(Csg, CubeAverageMatchesBruteForce) {
    std::mt19937_64 rng(8);
    for (int k = 1; k <= 3; ++k) {
        std::vector<std::vector<cplx>> raw;
        std::vector<ZnFunction> fam;
        for (int i = 0; i < (1 << k); ++i) {
            raw.push_back(oracle::random_disc(7, rng));
            fam.emplace_back(raw.back());
        }
        EXPECT_NEAR(std::abs(cube_average(fam) - oracle::cube(raw, false)), 0, 1e-13);
    }
}

TEST(Csg, RandomFamiliesHold) {
    std::mt19937_64 rng(2024);
    for (int t = 0; t < 300; ++t) {
        const int k = 2 + t % 2;
        std::vector<ZnFunction> fam;
        for (int i = 0; i < (1 << k); ++i) fam.emplace_back(oracle::random_unimodular(16, rng));
        EXPECT_TRUE(csg_check(fam, exact(k)).holds);
    }
}

TEST(Csg, ShapeErrors) {
    std::vector<ZnFunction> fam(4, ZnFunction::constant(8, 1.0));
    fam[1] = ZnFunction::constant(9, 1.0);
    EXPECT_THROW(csg_check(fam, exact(2)), ShapeError);
    fam.pop_back();
    EXPECT_THROW(csg_check(fam, exact(2)), ShapeError);
}

TEST(UniformitySeminorm, Examples) {
    const std::int64_t N = 1 << 14, H = 64;
    const auto one = SampledSequence::constant(0, N + 2 * H, 1.0);
    EXPECT_NEAR(uniformity_seminorm_n(one, 2, H, N), 1.0, 1e-12);
    EXPECT_THROW(uniformity_seminorm_n(one, 3, H, N), RangeError);

    const double theta = std::sqrt(2.0) - 1;
    const auto rot = SampledSequence::generate(0, N + 2 * H, [&](std::int64_t n) {
        return oracle::expi(std::fmod(n * theta, 1.0));
    });
    EXPECT_NEAR(uniformity_seminorm_n(rot, 2, H, N), 1.0, 0.05);

    std::mt19937_64 rng(77);
    std::vector<cplx> signs(N + 2 * H);
    for (auto& s : signs) s = rng() & 1 ? 1.0 : -1.0;
    EXPECT_LE(uniformity_seminorm_n(SampledSequence(0, signs), 2, H, N), 0.15);
}

TEST(UniformitySeminorm, MatchesDirectAverage) {
    std::mt19937_64 rng(6);
    const std::int64_t N = 40, H = 5;
    const auto v = oracle::random_disc(N + 2 * H, rng);
    cplx s = 0;
    for (std::int64_t h1 = 1; h1 <= H; ++h1)
        for (std::int64_t h2 = 1; h2 <= H; ++h2)
            for (std::int64_t n = 0; n < N; ++n)
                s += v[n] * std::conj(v[n + h1]) * std::conj(v[n + h2]) * v[n + h1 + h2];
    const double expect = std::pow(std::max(s.real() / (H * H * N), 0.0), 0.25);
    EXPECT_NEAR(uniformity_seminorm_n(SampledSequence(0, v), 2, H, N), expect, 1e-12);
}

TEST(AntiUniformity, Pairings) {
    const std::int64_t N = 1 << 12, H = 32;
    const auto one = SampledSequence::constant(0, N + 2 * H, 1.0);
    auto r = anti_uniformity_pairing(one, one, 2, {0, N}, H);
    EXPECT_NEAR(r.pairing, 1, 1e-12);
    EXPECT_NEAR(r.b_norm, 1, 1e-12);
    EXPECT_NEAR(r.ratio, 1, 1e-12);

    const auto alt = SampledSequence::generate(0, N + 2 * H, [](std::int64_t n) { return n % 2 ? -1.0 : 1.0; });
    EXPECT_NEAR(anti_uniformity_pairing(one, alt, 2, {0, N}, H).pairing, 0, 1e-15);

    const double theta = 0.6180339887498949;
    const auto alpha = SampledSequence::generate(0, N + 2 * H, [&](std::int64_t n) {
        return oracle::expi(std::fmod(n * theta, 1.0));
    });
    const auto b = SampledSequence::generate(0, N + 2 * H, [&](std::int64_t n) { return std::conj(alpha[n]); });
    r = anti_uniformity_pairing(alpha, b, 2, {0, N}, H);
    EXPECT_LE(r.ratio, 1.1);

    const auto zero = SampledSequence::constant(0, N + 2 * H, 0.0);
    EXPECT_EQ(anti_uniformity_pairing(one, zero, 2, {0, N}, H).ratio, 0.0);
}
