#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "nilcorr/systems.hpp"
#include "nilcorr/znfn.hpp"

namespace nilcorr {

/// phi(n) = F(T^n x0) on a rotation, skew or Heisenberg system.
struct NilsequenceSpec {
    MpSystemSpec system;
    ObservableSpec F;
    Point x0;

    /// ValidationError for the doubling map, commuting families and
    /// dimension mismatches.
    void validate() const;
};

cplx nilsequence_eval(const NilsequenceSpec& spec, std::int64_t n);
SampledSequence nilsequence_samples(const NilsequenceSpec& spec, Window window);

/// Box [1, outer]^(k-1) x [1, inner] of shifts h for the truncated dual.
struct DualTruncation {
    std::int64_t outer = 64;
    std::int64_t inner = 64;

    /// Largest offset eta.h reached by the box for degree k.
    std::int64_t reach(int k) const { return (k - 1) * outer + inner; }
};

/// E_{h in box} prod_{eta != 0} C^|eta| seq(n + eta.h). Bit i of eta pairs
/// with h_{i+1}; h_k is the inner direction. The sample must cover
/// [n, n + trunc.reach(k)].
cplx truncated_dual(const SampledSequence& seq, int k, const DualTruncation& trunc, std::int64_t n);

struct DualValue {
    cplx truncated;
    /// D_k phi(n) in the limit, when F is a single character. Assumes the
    /// system's angles are generic (no rational relations beyond those
    /// visible in the exact phase coefficients).
    std::optional<cplx> symbolic;
};

DualValue dual_sequence(const NilsequenceSpec& spec, int k, const DualTruncation& trunc,
                        std::int64_t n);

/// Truncated duals for every n in window.
SampledSequence dual_sequence_samples(const NilsequenceSpec& spec, int k,
                                      const DualTruncation& trunc, Window window);

/// Limit value of D_k phi(n) for a single-character F: along the orbit
/// phi(n) = c e(p(n)) with p polynomial, and D_k phi = |c|^(2^k - 2) conj(c) e(-p)
/// when deg p < k and 0 otherwise. std::nullopt for other observables.
std::optional<cplx> symbolic_dual(const NilsequenceSpec& spec, int k, std::int64_t n);

struct DualConvergenceReport {
    std::vector<double> max_deviation_per_level;
    /// Deviations are nonincreasing along the ladder (within 1e-12).
    bool monotone_decreasing = true;
    /// Deviations are measured against the symbolic limit (true) or against
    /// the finest ladder level (false).
    bool against_symbolic = false;
};

/// Deviation of the truncated dual at each ladder level over the probe
/// positions. ValidationError unless the ladder strictly increases.
DualConvergenceReport dual_uniform_convergence_check(const NilsequenceSpec& spec, int k,
                                                     const std::vector<DualTruncation>& ladder,
                                                     const std::vector<std::int64_t>& probe_ns);

struct DualStability {
    double lhs = 0;
    double rhs = 0;
    bool holds = false;
};

/// lhs = ||D_k F - D_k G||_{L^1} with truncated duals on the grid,
/// rhs = (2^k - 1) ||F - G||_{L^1}; holds when lhs <= rhs + slack.
/// ValidationError when |F| or |G| exceeds 1 on the grid.
DualStability dual_l1_stability_check(const MpSystemSpec& sys, const ObservableSpec& F,
                                      const ObservableSpec& G, int k, const DualTruncation& trunc,
                                      const QuadratureGrid& grid, double slack = 0.05);

/// Interleaves W sequences: output(m) = parts[b-1](n) for m = W n + b with
/// b in {1, ..., W} and n >= 0, so the output starts at m = 1. Each part must
/// cover [0, ceil(length / W)); ShapeError otherwise.
SampledSequence glue_by_residue(const std::vector<SampledSequence>& parts, std::int64_t W,
                                std::int64_t length);

/// part(n) = seq(W n + b) for n in [0, count), b in {1, ..., W}.
SampledSequence extract_residue(const SampledSequence& seq, std::int64_t W, std::int64_t b,
                                std::int64_t count);

}  // namespace nilcorr
