#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "nilcorr/error.hpp"
#include "nilcorr/primes.hpp"
#include "oracles.hpp"

using namespace nilcorr;

TEST(Sieve, SmallTables) {
    const auto t = PrimeTable::build(10);
    EXPECT_EQ(t.primes_upto(10), (std::vector<std::int64_t>{2, 3, 5, 7}));
    EXPECT_FALSE(t.is_prime(1));
    EXPECT_FALSE(t.is_prime(0));
    EXPECT_EQ(PrimeTable::build(30).count_upto(30), 10);
    EXPECT_THROW(t.is_prime(11), RangeError);
    EXPECT_THROW(PrimeTable::build(1), ValidationError);
    // N on a word boundary.
    EXPECT_EQ(PrimeTable::build(127).count_upto(127), 31);
    EXPECT_EQ(PrimeTable::build(128).count_upto(128), 31);
}

TEST(Sieve, MillionAgainstSegmentedOracle) {
    const auto t = PrimeTable::build(1'000'000);
    EXPECT_EQ(oracle::count_primes_segmented(1'000'000), 78498);
    EXPECT_EQ(t.count_upto(1'000'000), 78498);
    for (std::int64_t n : {1000, 65536, 99991, 500000})
        EXPECT_EQ(t.count_upto(n), oracle::count_primes_segmented(n)) << n;
}

TEST(Sieve, CacheRoundTrip) {
    const auto dir = std::filesystem::temp_directory_path() / "nilcorr-sieve-test";
    std::filesystem::create_directories(dir);
    const auto file = dir / "t.bin";
    const auto t = PrimeTable::build(5000);
    t.save(file);
    const auto u = PrimeTable::load(file);
    EXPECT_EQ(u.limit(), 5000);
    EXPECT_EQ(u.primes_upto(5000), t.primes_upto(5000));

    std::ofstream(file, std::ios::binary) << "garbage";
    EXPECT_THROW(PrimeTable::load(file), ValidationError);

    setenv("NILCORR_CACHE", dir.c_str(), 1);
    EXPECT_EQ(sieve(3000).count_upto(3000), 430);
    EXPECT_TRUE(std::filesystem::exists(dir / "sieve-3000.bin"));
    EXPECT_EQ(sieve(3000).count_upto(3000), 430);
    unsetenv("NILCORR_CACHE");
    std::filesystem::remove_all(dir);
}

TEST(VonMangoldt, Examples) {
    const auto t = PrimeTable::build(100);
    EXPECT_EQ(lambda_prime(4, t), 0.0);
    EXPECT_DOUBLE_EQ(lambda_prime(5, t), std::log(5.0));
    EXPECT_EQ(lambda_prime(1, t), 0.0);
    EXPECT_THROW(lambda_prime(101, t), RangeError);

    const auto p = WTrickParams::from_modulus(2, 1);
    EXPECT_DOUBLE_EQ(lambda_Wb(2, p, t), 0.5 * std::log(5.0));
    EXPECT_DOUBLE_EQ(lambda_Wb(3, p, t), 0.5 * std::log(7.0));
    EXPECT_EQ(lambda_Wb(4, p, t), 0.0);
}

TEST(VonMangoldt, WTrickMean) {
    const std::int64_t N = 100000;
    const auto t = PrimeTable::build(6 * N + 1);
    const auto p = WTrickParams::from_modulus(6, 1);
    double s = 0;
    for (std::int64_t n = 1; n <= N; ++n) {
        const double v = lambda_Wb(n, p, t);
        EXPECT_GE(v, 0.0);
        s += v;
    }
    EXPECT_NEAR(s / N, 1.0, 0.05);
}

TEST(Primorial, ValuesAndParams) {
    EXPECT_EQ(primorial(2), 1);
    EXPECT_EQ(primorial(3), 2);
    EXPECT_EQ(primorial(6), 30);
    EXPECT_EQ(primorial(12), 2310);
    EXPECT_THROW(primorial(60), ResourceError);
    EXPECT_EQ(euler_totient(30), 8);
    EXPECT_EQ(coprime_residues(6), (std::vector<std::int64_t>{1, 5}));
    const auto p = WTrickParams::make(6, 7);
    EXPECT_EQ(p.W, 30);
    EXPECT_EQ(p.totient, 8);
    for (std::int64_t W : {2, 6, 30, 210})
        for (std::int64_t b = 1; b <= W; ++b) {
            if (std::gcd(b, W) == 1)
                EXPECT_NO_THROW(WTrickParams::from_modulus(W, b));
            else
                EXPECT_THROW(WTrickParams::from_modulus(W, b), ValidationError);
        }
    EXPECT_THROW(WTrickParams::from_modulus(12, 1), ValidationError);
}

TEST(PrimeGap, Examples) {
    const auto t = PrimeTable::build(1'000'000);
    auto gap = [&](std::int64_t N) {
        return prime_vs_weighted_gap(SampledSequence::constant(1, static_cast<std::size_t>(N), 1.0), N, t).gap;
    };
    EXPECT_LE(gap(100000), 0.01);
    EXPECT_LE(gap(1000000), 0.004);

    // Nonincreasing along 10^3..10^6 with one allowed violation.
    const std::vector<double> g{gap(1000), gap(10000), gap(100000), gap(1000000)};
    int violations = 0;
    for (std::size_t i = 1; i < g.size(); ++i) violations += g[i] > g[i - 1];
    EXPECT_LE(violations, 1);

    const std::int64_t N = 100000;
    const auto alt = SampledSequence::generate(1, N, [](std::int64_t n) { return n % 2 ? -1.0 : 1.0; });
    const auto r = prime_vs_weighted_gap(alt, N, t);
    // Every prime but 2 is odd.
    EXPECT_NEAR(r.prime_avg.real(), -1.0 + 2.0 / t.count_upto(N), 1e-12);
    EXPECT_EQ(prime_vs_weighted_gap(SampledSequence::constant(1, N, 0.0), N, t).gap, 0.0);
    EXPECT_THROW(prime_vs_weighted_gap(alt, N + 1, t), RangeError);
}

TEST(PrimeGap, ResidueBookkeeping) {
    const std::int64_t N = 200000;
    const auto t = PrimeTable::build(N);
    for (std::int64_t W : {1, 2, 6, 30, 210}) {
        std::int64_t total = 0, dividing = 0;
        for (std::int64_t b : coprime_residues(W))
            for (std::int64_t p = 2; p <= N; ++p)
                if (p % W == b % W && t.is_prime(p)) ++total;
        for (std::int64_t p = 2; p <= W; ++p) dividing += t.is_prime(p) && W % p == 0;
        EXPECT_EQ(total, t.count_upto(N) - dividing) << W;
    }
}
