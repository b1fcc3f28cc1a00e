#include "nilcorr/primes.hpp"

#include <bit>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <numeric>
#include <string>

#include "nilcorr/error.hpp"
#include "nilcorr/parallel.hpp"

namespace nilcorr {

namespace {

constexpr char kMagic[8] = {'N', 'C', 'S', 'I', 'E', 'V', 'E', '1'};

bool trial_division(std::int64_t n) {
    if (n < 2) return false;
    for (std::int64_t d = 2; d * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

template <class T>
void put(std::ostream& out, T v) {
    unsigned char buf[sizeof(T)];
    for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <class T>
T get(std::istream& in) {
    unsigned char buf[sizeof(T)];
    if (!in.read(reinterpret_cast<char*>(buf), sizeof(T)))
        throw ValidationError("truncated sieve cache file");
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(buf[i]) << (8 * i);
    return v;
}

}  // namespace

PrimeTable::PrimeTable(std::int64_t N, std::vector<std::uint64_t> words)
    : N_(N), words_(std::move(words)) {
    index_and_check();
}

void PrimeTable::index_and_check() {
    before_word_.resize(words_.size());
    std::int64_t acc = 0;
    for (std::size_t i = 0; i < words_.size(); ++i) {
        before_word_[i] = acc;
        acc += std::popcount(words_[i]);
    }
    const std::int64_t top = std::min<std::int64_t>(N_, 10000);
    for (std::int64_t n = 0; n <= top; ++n)
        if (is_prime(n) != trial_division(n))
            throw NumericalError("prime table disagrees with trial division at " + std::to_string(n));
}

PrimeTable PrimeTable::build(std::int64_t N) {
    if (N < 2) throw ValidationError("sieve limit must be >= 2");
    if (N > 4'000'000'000) throw ResourceError("sieve limit above 4e9");
    const auto n_words = static_cast<std::size_t>(N / 64 + 1);
    std::vector<std::uint64_t> w(n_words, ~std::uint64_t{0});
    auto clear = [&](std::int64_t n) { w[static_cast<std::size_t>(n >> 6)] &= ~(std::uint64_t{1} << (n & 63)); };
    clear(0);
    clear(1);
    for (std::int64_t p = 2; p * p <= N; ++p)
        if (w[static_cast<std::size_t>(p >> 6)] >> (p & 63) & 1)
            for (std::int64_t m = p * p; m <= N; m += p) clear(m);
    // Bits past N are not part of the table.
    const int used = static_cast<int>(N % 64) + 1;
    if (used < 64) w.back() &= (std::uint64_t{1} << used) - 1;
    return PrimeTable(N, std::move(w));
}

PrimeTable PrimeTable::load(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw ValidationError("cannot open sieve cache " + file.string());
    char magic[8];
    if (!in.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0)
        throw ValidationError("bad sieve cache magic in " + file.string());
    if (get<std::uint32_t>(in) != kCacheVersion)
        throw ValidationError("unsupported sieve cache version in " + file.string());
    const auto N = static_cast<std::int64_t>(get<std::uint64_t>(in));
    if (N < 2) throw ValidationError("bad sieve limit in cache " + file.string());
    std::vector<std::uint64_t> w(static_cast<std::size_t>(N / 64 + 1));
    for (auto& x : w) x = get<std::uint64_t>(in);
    return PrimeTable(N, std::move(w));
}

void PrimeTable::save(const std::filesystem::path& file) const {
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) throw ResourceError("cannot write sieve cache " + file.string());
    out.write(kMagic, 8);
    put<std::uint32_t>(out, kCacheVersion);
    put<std::uint64_t>(out, static_cast<std::uint64_t>(N_));
    for (std::uint64_t x : words_) put<std::uint64_t>(out, x);
    if (!out) throw ResourceError("failed writing sieve cache " + file.string());
}

bool PrimeTable::is_prime(std::int64_t n) const {
    if (n < 0 || n > N_)
        throw RangeError(std::to_string(n) + " outside prime table [0, " + std::to_string(N_) + "]");
    return words_[static_cast<std::size_t>(n >> 6)] >> (n & 63) & 1;
}

std::int64_t PrimeTable::count_upto(std::int64_t n) const {
    if (n < 0 || n > N_)
        throw RangeError(std::to_string(n) + " outside prime table [0, " + std::to_string(N_) + "]");
    const auto i = static_cast<std::size_t>(n >> 6);
    const int bits = static_cast<int>(n & 63) + 1;
    const std::uint64_t mask = bits == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << bits) - 1;
    return before_word_[i] + std::popcount(words_[i] & mask);
}

std::vector<std::int64_t> PrimeTable::primes_upto(std::int64_t n) const {
    std::vector<std::int64_t> out;
    out.reserve(static_cast<std::size_t>(count_upto(n)));
    for (std::int64_t m = 2; m <= n; ++m)
        if (words_[static_cast<std::size_t>(m >> 6)] >> (m & 63) & 1) out.push_back(m);
    return out;
}

PrimeTable sieve(std::int64_t N) {
    const char* dir = std::getenv("NILCORR_CACHE");
    if (dir == nullptr || *dir == '\0') return PrimeTable::build(N);
    const std::filesystem::path file =
        std::filesystem::path(dir) / ("sieve-" + std::to_string(N) + ".bin");
    if (std::filesystem::exists(file)) {
        try {
            PrimeTable t = PrimeTable::load(file);
            if (t.limit() == N) return t;
        } catch (const ValidationError&) {
            // Stale or damaged cache: rebuild below.
        }
    }
    PrimeTable t = PrimeTable::build(N);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    try {
        t.save(file);
    } catch (const ResourceError&) {
        // The cache is an optimization only.
    }
    return t;
}

double lambda_prime(std::int64_t m, const PrimeTable& table) {
    return table.is_prime(m) ? std::log(static_cast<double>(m)) : 0.0;
}

std::int64_t primorial(std::int64_t w) {
    if (w < 2) throw ValidationError("primorial needs w >= 2");
    std::int64_t W = 1;
    for (std::int64_t p = 2; p < w; ++p) {
        if (!trial_division(p)) continue;
        if (__builtin_mul_overflow(W, p, &W)) throw ResourceError("primorial overflows 64 bits");
    }
    return W;
}

std::int64_t euler_totient(std::int64_t W) {
    if (W < 1) throw ValidationError("totient needs W >= 1");
    std::int64_t phi = W, m = W;
    for (std::int64_t p = 2; p * p <= m; ++p) {
        if (m % p != 0) continue;
        while (m % p == 0) m /= p;
        phi -= phi / p;
    }
    if (m > 1) phi -= phi / m;
    return phi;
}

std::vector<std::int64_t> coprime_residues(std::int64_t W) {
    if (W < 1) throw ValidationError("W must be >= 1");
    std::vector<std::int64_t> out;
    for (std::int64_t b = 1; b <= W; ++b)
        if (std::gcd(b, W) == 1) out.push_back(b);
    return out;
}

WTrickParams WTrickParams::make(std::int64_t w, std::int64_t b) {
    WTrickParams p;
    p.w = w;
    p.W = primorial(w);
    if (b < 1 || b > p.W) throw ValidationError("residue b must lie in {1, ..., W}");
    if (std::gcd(b, p.W) != 1)
        throw ValidationError("residue " + std::to_string(b) + " is not coprime to W = " +
                              std::to_string(p.W));
    p.b = b;
    p.totient = euler_totient(p.W);
    return p;
}

WTrickParams WTrickParams::from_modulus(std::int64_t W, std::int64_t b) {
    if (W < 1) throw ValidationError("W must be >= 1");
    std::int64_t w = 2;
    while (primorial(w) < W) ++w;
    if (primorial(w) != W) throw ValidationError(std::to_string(W) + " is not a primorial");
    return make(w, b);
}

double lambda_Wb(std::int64_t n, const WTrickParams& params, const PrimeTable& table) {
    if (std::gcd(params.b, params.W) != 1) throw ValidationError("residue not coprime to W");
    if (n < 0) throw RangeError("lambda_Wb needs n >= 0");
    return static_cast<double>(params.totient) / static_cast<double>(params.W) *
           lambda_prime(params.W * n + params.b, table);
}

PrimeGap prime_vs_weighted_gap(const SampledSequence& seq, std::int64_t N, const PrimeTable& table) {
    if (N < 2) throw RangeError("prime average needs N >= 2");
    if (N > table.limit()) throw RangeError("prime table does not reach N = " + std::to_string(N));
    if (!seq.covers(Window{1, N + 1})) throw RangeError("sequence must cover [1, N]");
    CompensatedSum primes, weighted;
    for (std::int64_t n = 2; n <= N; ++n) {
        if (!table.is_prime(n)) continue;
        primes.add(seq[n]);
        weighted.add(std::log(static_cast<double>(n)) * seq[n]);
    }
    PrimeGap g;
    g.prime_avg = primes.value() / static_cast<double>(table.count_upto(N));
    g.weighted_avg = weighted.value() / static_cast<double>(N);
    g.gap = std::abs(g.prime_avg - g.weighted_avg);
    return g;
}

}  // namespace nilcorr
