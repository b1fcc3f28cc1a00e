#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "nilcorr/znfn.hpp"

namespace nilcorr {

/// Primality of 0..N with prefix counts.
///
/// Cache file layout (little-endian): 8-byte magic "NCSIEVE1", u32 format
/// version, u64 N, then ceil((N + 1) / 64) u64 words where bit (n % 64) of
/// word n / 64 is set iff n is prime.
class PrimeTable {
public:
    static constexpr std::uint32_t kCacheVersion = 1;

    /// Eratosthenes up to N (N >= 2), followed by a trial-division self-check
    /// of n <= min(N, 10^4).
    static PrimeTable build(std::int64_t N);
    /// Reads a cache file; ValidationError on a malformed or mismatched file.
    static PrimeTable load(const std::filesystem::path& file);
    void save(const std::filesystem::path& file) const;

    std::int64_t limit() const { return N_; }
    /// RangeError outside [0, limit].
    bool is_prime(std::int64_t n) const;
    /// |P cap [1, n]| for n in [0, limit].
    std::int64_t count_upto(std::int64_t n) const;
    std::vector<std::int64_t> primes_upto(std::int64_t n) const;

private:
    PrimeTable(std::int64_t N, std::vector<std::uint64_t> words);
    void index_and_check();

    std::int64_t N_ = 0;
    std::vector<std::uint64_t> words_;
    std::vector<std::int64_t> before_word_;
};

/// PrimeTable::build, going through the cache directory named by the
/// NILCORR_CACHE environment variable when it is set.
PrimeTable sieve(std::int64_t N);

/// log m for prime m, 0 otherwise. RangeError when m is negative or beyond
/// the table.
double lambda_prime(std::int64_t m, const PrimeTable& table);

/// prod_{p prime, p < w} p. ResourceError on overflow.
std::int64_t primorial(std::int64_t w);

/// Euler's totient by trial factorization.
std::int64_t euler_totient(std::int64_t W);

/// The residues b in {1, ..., W} with gcd(b, W) = 1.
std::vector<std::int64_t> coprime_residues(std::int64_t W);

struct WTrickParams {
    std::int64_t w = 2;
    std::int64_t W = 1;
    std::int64_t b = 1;
    std::int64_t totient = 1;

    /// W = primorial(w); ValidationError unless b in {1..W} and gcd(b, W) = 1.
    static WTrickParams make(std::int64_t w, std::int64_t b);
    /// Same, identifying w from W; ValidationError when W is not a primorial.
    static WTrickParams from_modulus(std::int64_t W, std::int64_t b);
};

/// (totient(W) / W) * lambda_prime(W n + b).
double lambda_Wb(std::int64_t n, const WTrickParams& params, const PrimeTable& table);

struct PrimeGap {
    cplx prime_avg;
    cplx weighted_avg;
    double gap = 0;
};

/// prime_avg = average of seq over primes p <= N, weighted_avg =
/// E_{n in [1, N]} lambda_prime(n) seq(n), gap = |prime_avg - weighted_avg|.
PrimeGap prime_vs_weighted_gap(const SampledSequence& seq, std::int64_t N, const PrimeTable& table);

}  // namespace nilcorr
