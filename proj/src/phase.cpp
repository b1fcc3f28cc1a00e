#include "nilcorr/phase.hpp"

#include <cmath>

#include "nilcorr/error.hpp"

namespace nilcorr {

Phase Phase::from_double(double x) {
    if (!std::isfinite(x)) throw ValidationError("phase from non-finite value");
    double frac = x - std::floor(x);
    if (frac >= 1.0) frac = 0.0;
    const double scaled = std::ldexp(frac, 64);
    if (scaled >= 0x1p64) return Phase(0);
    return Phase(static_cast<std::uint64_t>(scaled));
}

Phase Phase::from_rational(std::int64_t num, std::int64_t den) {
    if (den == 0) throw ValidationError("phase with zero denominator");
    if (den < 0) {
        num = -num;
        den = -den;
    }
    std::int64_t r = num % den;
    if (r < 0) r += den;
    const unsigned __int128 scaled =
        (static_cast<unsigned __int128>(static_cast<std::uint64_t>(r)) << 64) /
        static_cast<std::uint64_t>(den);
    return Phase(static_cast<std::uint64_t>(scaled));
}

}  // namespace nilcorr
