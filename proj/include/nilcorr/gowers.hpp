#pragma once

#include <cstdint>
#include <span>

#include "nilcorr/znfn.hpp"

namespace nilcorr {

enum class GowersMode { exact, sampled };

struct GowersConfig {
    int k = 2;
    GowersMode mode = GowersMode::exact;
    /// Monte-Carlo draws of (n, h) in sampled mode.
    std::uint64_t sample_count = 100000;
    std::uint64_t rng_seed = 0;
    /// Exact mode is refused when N^(k+1) exceeds this many operations.
    double budget = 1e9;
};

struct GowersEstimate {
    /// ||f||_{U^k(Z_N)}.
    double value = 0;
    /// The cube average itself, value^(2^k).
    double power = 0;
    /// Standard error of `power`; zero in exact mode.
    double std_error = 0;
};

/// Gowers U^k norm on Z_N.
///
/// Exact mode evaluates the cube average by peeling one direction at a time
/// (multiplicative derivatives f(n) conj f(n+h)), which is algebraically the
/// defining sum. Throws ResourceError when N^(k+1) exceeds cfg.budget and
/// NumericalError when the cube average is not real and nonnegative up to
/// 1e-9 (relative to sup|f|^(2^k)).
GowersEstimate gowers_norm_zn(const ZnFunction& f, const GowersConfig& cfg);

/// U^2 norm through the Fourier identity ||f||_{U^2}^4 = sum_xi |f^(xi)|^4,
/// with f^(xi) = E_n f(n) e(-n xi / N). O(N log N).
double gowers_norm_u2_fft(const ZnFunction& f);

/// Discrete Fourier coefficients E_n f(n) e(-n xi / N), xi = 0..N-1.
std::vector<cplx> fourier_coefficients(const ZnFunction& f);

struct CsgResult {
    double lhs = 0;
    double rhs = 0;
    bool holds = false;
};

/// Cauchy-Schwarz-Gowers check for a family indexed by eta in {0,1}^k.
/// family[m] is f_eta where bit (i-1) of m is eta_i; family.size() == 2^k.
/// lhs = |E_{n,h} prod_eta f_eta(n + eta.h)| (no conjugations),
/// rhs = prod_eta ||f_eta||_{U^k}.
CsgResult csg_check(std::span<const ZnFunction> family, const GowersConfig& cfg);

/// E_{n,h} prod_eta f_eta(n + eta.h) over Z_N x Z_N^k, exact.
cplx cube_average(std::span<const ZnFunction> family, double budget = 1e9);

/// Truncated uniformity seminorm on N:
///   (E_{h in [1,H]^k} E_{n in [0,N)} prod_eta C^|eta| seq(n + eta.h))^(1/2^k).
/// The sample must cover [0, N + kH). The truncated average need not be
/// real; its real part is used and negatives are clamped to 0.
double uniformity_seminorm_n(const SampledSequence& seq, int k, std::int64_t H, std::int64_t N);

struct PairingResult {
    double pairing = 0;
    double b_norm = 0;
    /// pairing / b_norm, +inf when b_norm < 1e-12 < pairing, 0 when both vanish.
    double ratio = 0;
};

/// Lower-bound probe of the anti-uniform seminorm of phi with test sequence b:
/// pairing = |E_{n in window} phi(n) b(n)|, b_norm = uniformity_seminorm_n(b, k, H, window length).
PairingResult anti_uniformity_pairing(const SampledSequence& phi, const SampledSequence& b, int k,
                                      Window window, std::int64_t H);

}  // namespace nilcorr
