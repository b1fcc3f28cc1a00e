#include "nilcorr/gowers.hpp"

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <limits>
#include <mutex>
#include <random>
#include <string>

#include "nilcorr/error.hpp"
#include "nilcorr/parallel.hpp"

namespace nilcorr {

namespace {

using Table = std::vector<std::vector<cplx>>;

cplx mean(const std::vector<cplx>& v) {
    CompensatedSum s;
    for (const cplx& z : v) s.add(z);
    return s.value() / static_cast<double>(v.size());
}

// E_{n, h in Z_N^dim} prod_eta fam[eta](n + eta.h). The last direction is
// summed in closed form: E_{n,h} A(n) B(n+h) = (E A)(E B).
cplx cube_recursive(const Table& fam, int dim, std::size_t N) {
    if (dim == 0) return mean(fam[0]);
    if (dim == 1) return mean(fam[0]) * mean(fam[1]);
    const std::size_t half = std::size_t{1} << (dim - 1);
    Table next(half, std::vector<cplx>(N));
    CompensatedSum acc;
    for (std::size_t h = 0; h < N; ++h) {
        for (std::size_t eta = 0; eta < half; ++eta) {
            const auto& lo = fam[eta];
            const auto& hi = fam[eta | half];
            auto& out = next[eta];
            for (std::size_t n = 0; n < N; ++n) out[n] = lo[n] * hi[(n + h) % N];
        }
        acc.add(cube_recursive(next, dim - 1, N));
    }
    return acc.value() / static_cast<double>(N);
}

void check_budget(std::size_t N, int k, double budget) {
    const double ops = std::pow(static_cast<double>(N), k + 1);
    if (ops > budget)
        throw ResourceError("exact U^" + std::to_string(k) + " on Z_" + std::to_string(N) +
                            " needs " + std::to_string(ops) + " operations, budget is " +
                            std::to_string(budget));
}

Table conjugation_family(const ZnFunction& f, int k) {
    const std::size_t count = std::size_t{1} << k;
    Table fam(count);
    for (std::size_t eta = 0; eta < count; ++eta) {
        const bool conj = std::popcount(eta) % 2 == 1;
        fam[eta].assign(f.values().begin(), f.values().end());
        if (conj)
            for (auto& z : fam[eta]) z = std::conj(z);
    }
    return fam;
}

// Drops rounding-level imaginary parts and negatives of a cube average that
// is real and nonnegative in exact arithmetic.
double clamp_nonnegative(cplx avg, double scale) {
    const double tol = 1e-9 * std::max(1.0, scale);
    if (std::abs(avg.imag()) > tol || avg.real() < -tol)
        throw NumericalError("cube average " + std::to_string(avg.real()) + " + " +
                             std::to_string(avg.imag()) + "i is not real and nonnegative");
    return std::max(avg.real(), 0.0);
}

GowersEstimate sampled_norm(const ZnFunction& f, const GowersConfig& cfg) {
    const std::size_t count = std::size_t{1} << cfg.k;
    if (static_cast<double>(cfg.sample_count) * static_cast<double>(count) > cfg.budget)
        throw ResourceError("sampled U^k estimate exceeds the operation budget");
    const auto N = static_cast<std::int64_t>(f.modulus());
    std::mt19937_64 rng(cfg.rng_seed);
    std::uniform_int_distribution<std::int64_t> pick(0, N - 1);
    std::vector<std::int64_t> h(static_cast<std::size_t>(cfg.k));
    double sum = 0, sum_sq = 0;
    for (std::uint64_t s = 0; s < cfg.sample_count; ++s) {
        const std::int64_t n = pick(rng);
        for (auto& hi : h) hi = pick(rng);
        cplx prod = 1;
        for (std::size_t eta = 0; eta < count; ++eta) {
            std::int64_t pos = n;
            for (int i = 0; i < cfg.k; ++i)
                if (eta >> i & 1) pos += h[static_cast<std::size_t>(i)];
            const cplx v = f(pos);
            prod *= std::popcount(eta) % 2 ? std::conj(v) : v;
        }
        sum += prod.real();
        sum_sq += prod.real() * prod.real();
    }
    const double S = static_cast<double>(cfg.sample_count);
    const double m = sum / S;
    const double var = S > 1 ? std::max(0.0, (sum_sq - S * m * m) / (S - 1)) : 0.0;
    GowersEstimate est;
    est.power = std::max(m, 0.0);
    est.value = std::pow(est.power, 1.0 / static_cast<double>(count));
    est.std_error = std::sqrt(var / S);
    return est;
}

std::mutex& fftw_plan_mutex() {
    static std::mutex m;
    return m;
}

}  // namespace

cplx cube_average(std::span<const ZnFunction> family, double budget) {
    if (family.empty() || !std::has_single_bit(family.size()))
        throw ShapeError("cube family size must be a power of two");
    const int k = std::countr_zero(family.size());
    const std::size_t N = family.front().modulus();
    for (const auto& f : family)
        if (f.modulus() != N) throw ShapeError("cube family members have different moduli");
    check_budget(N, k, budget);
    Table fam;
    fam.reserve(family.size());
    for (const auto& f : family) fam.emplace_back(f.values().begin(), f.values().end());
    return cube_recursive(fam, k, N);
}

GowersEstimate gowers_norm_zn(const ZnFunction& f, const GowersConfig& cfg) {
    if (cfg.k < 1) throw ValidationError("Gowers degree k must be >= 1");
    if (cfg.mode == GowersMode::sampled) {
        if (cfg.sample_count < 1) throw ValidationError("sampled mode needs sample_count >= 1");
        return sampled_norm(f, cfg);
    }
    check_budget(f.modulus(), cfg.k, cfg.budget);
    const Table fam = conjugation_family(f, cfg.k);
    const cplx avg = cube_recursive(fam, cfg.k, f.modulus());
    const double count = static_cast<double>(std::size_t{1} << cfg.k);
    GowersEstimate est;
    est.power = clamp_nonnegative(avg, std::pow(f.sup_norm(), count));
    est.value = std::pow(est.power, 1.0 / count);
    return est;
}

std::vector<cplx> fourier_coefficients(const ZnFunction& f) {
    const std::size_t N = f.modulus();
    std::vector<cplx> in(f.values().begin(), f.values().end());
    std::vector<cplx> out(N);
    auto* in_ptr = reinterpret_cast<fftw_complex*>(in.data());
    auto* out_ptr = reinterpret_cast<fftw_complex*>(out.data());
    fftw_plan plan;
    {
        std::lock_guard lock(fftw_plan_mutex());
        plan = fftw_plan_dft_1d(static_cast<int>(N), in_ptr, out_ptr, FFTW_FORWARD, FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        std::lock_guard lock(fftw_plan_mutex());
        fftw_destroy_plan(plan);
    }
    const double inv = 1.0 / static_cast<double>(N);
    for (auto& z : out) z *= inv;
    return out;
}

double gowers_norm_u2_fft(const ZnFunction& f) {
    CompensatedSum s;
    for (const cplx& c : fourier_coefficients(f)) {
        const double a = std::norm(c);
        s.add(a * a);
    }
    return std::pow(std::max(s.real(), 0.0), 0.25);
}

CsgResult csg_check(std::span<const ZnFunction> family, const GowersConfig& cfg) {
    if (family.size() != (std::size_t{1} << cfg.k))
        throw ShapeError("CSG family must have 2^k members");
    const std::size_t N = family.front().modulus();
    for (const auto& f : family)
        if (f.modulus() != N) throw ShapeError("CSG family members have different moduli");
    CsgResult r;
    r.lhs = std::abs(cube_average(family, cfg.budget));
    r.rhs = 1.0;
    for (const auto& f : family) r.rhs *= gowers_norm_zn(f, cfg).value;
    r.holds = r.lhs <= r.rhs + 1e-9;
    return r;
}

double uniformity_seminorm_n(const SampledSequence& seq, int k, std::int64_t H, std::int64_t N) {
    if (k < 1) throw ValidationError("uniformity seminorm needs k >= 1");
    if (H < 1 || N < 1) throw RangeError("uniformity seminorm needs H >= 1 and N >= 1");
    const Window needed{0, N + k * H};
    if (!seq.covers(needed))
        throw RangeError("uniformity seminorm needs the sequence on [0, " +
                         std::to_string(needed.end) + ")");

    // level(j, g) averages prod over the first j directions of the derivative
    // sequence g, stored on [0, N + jH).
    std::function<cplx(int, const std::vector<cplx>&)> level = [&](int j,
                                                                   const std::vector<cplx>& g) {
        if (j == 0) {
            CompensatedSum s;
            for (std::int64_t n = 0; n < N; ++n) s.add(g[static_cast<std::size_t>(n)]);
            return s.value() / static_cast<double>(N);
        }
        const auto len = static_cast<std::size_t>(N + (j - 1) * H);
        std::vector<cplx> d(len);
        CompensatedSum acc;
        for (std::int64_t h = 1; h <= H; ++h) {
            for (std::size_t m = 0; m < len; ++m)
                d[m] = g[m] * std::conj(g[m + static_cast<std::size_t>(h)]);
            acc.add(level(j - 1, d));
        }
        return acc.value() / static_cast<double>(H);
    };

    const std::vector<cplx> base(seq.values().begin() + (0 - seq.start()),
                                 seq.values().begin() + (needed.end - seq.start()));
    // Top direction in parallel; per-h results are merged in order.
    const auto len = static_cast<std::size_t>(N + (k - 1) * H);
    std::vector<cplx> per_h(static_cast<std::size_t>(H));
    parallel_for(static_cast<std::size_t>(H), [&](std::size_t idx) {
        const std::size_t h = idx + 1;
        std::vector<cplx> d(len);
        for (std::size_t m = 0; m < len; ++m) d[m] = base[m] * std::conj(base[m + h]);
        per_h[idx] = level(k - 1, d);
    });
    CompensatedSum total;
    for (const cplx& v : per_h) total.add(v);
    const double avg = std::max(total.value().real() / static_cast<double>(H), 0.0);
    return std::pow(avg, 1.0 / static_cast<double>(std::size_t{1} << k));
}

PairingResult anti_uniformity_pairing(const SampledSequence& phi, const SampledSequence& b, int k,
                                      Window window, std::int64_t H) {
    if (window.length() <= 0) throw RangeError("empty pairing window");
    if (!phi.covers(window) || !b.covers(window))
        throw RangeError("pairing window not covered by both sequences");
    CompensatedSum s;
    for (std::int64_t n = window.begin; n < window.end; ++n) s.add(phi[n] * b[n]);
    PairingResult r;
    r.pairing = std::abs(s.value() / static_cast<double>(window.length()));
    r.b_norm = uniformity_seminorm_n(b, k, H, window.length());
    if (r.b_norm < 1e-12)
        r.ratio = r.pairing > 1e-12 ? std::numeric_limits<double>::infinity() : 0.0;
    else
        r.ratio = r.pairing / r.b_norm;
    return r;
}

}  // namespace nilcorr
