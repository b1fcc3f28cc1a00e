#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "nilcorr/correlation.hpp"
#include "nilcorr/nilseq.hpp"
#include "nilcorr/primes.hpp"

namespace nilcorr {

/// Polynomial phase e(p(n)), p(n) = sum_j coeffs[j] n^j, evaluated exactly
/// modulo 1. A dual atom samples D_{s+1} e(p) = conj e(p) where s = deg p;
/// this identity holds at every truncation because the alternating sum of p
/// over a cube of dimension s + 1 vanishes.
struct PhaseAtom {
    std::vector<Phase> coeffs;
    bool dual = false;
    std::string description;

    int degree() const;
    /// Step of the nilsystem realizing the atom (its degree, at least 1).
    int step() const;
    cplx eval(std::int64_t n) const;
    /// The atom n -> atom(W n + b).
    PhaseAtom composed(std::int64_t W, std::int64_t b) const;
    /// Nilsystem realization for degree <= 2: a circle rotation for linear
    /// phases and the skew product for quadratic ones. Sampling it gives the
    /// same values bit for bit (before conjugation for dual atoms).
    NilsequenceSpec realization() const;
};

class NilDictionary {
public:
    NilDictionary(int step_bound, Window window);

    /// ValidationError when the atom's step exceeds the bound.
    void add(PhaseAtom atom);

    int step_bound() const { return k_; }
    Window window() const { return window_; }
    std::size_t size() const { return atoms_.size(); }
    const std::vector<PhaseAtom>& atoms() const { return atoms_; }
    const std::vector<std::vector<cplx>>& samples() const { return samples_; }

    /// Every atom composed with n -> W n + b, sampled on `window`.
    NilDictionary composed(std::int64_t W, std::int64_t b, Window window) const;
    /// The dual-type atoms only.
    NilDictionary duals_only() const;

private:
    int k_;
    Window window_;
    std::vector<PhaseAtom> atoms_;
    std::vector<std::vector<cplx>> samples_;
};

struct DictionaryOptions {
    /// Largest polynomial degree (the step bound k).
    int step = 2;
    /// The system's own angles; atoms e(c theta n^d) are added for every c in
    /// `multipliers` and d = 1..step.
    std::vector<Phase> angles;
    std::vector<std::int64_t> multipliers{1, -1, 2, -2};
    /// Grid {a / q : 1 <= a < q} used as decoy angles for every degree.
    std::int64_t rational_denominator = 6;
    /// Fixed irrational-looking decoys (and their negatives), every degree.
    std::vector<double> fiducial{0.6180339887498949, 0.4142135623730951, 0.7320508075688772,
                                 0.2360679774997898};
    /// Adds D_{k+1} of every atom (needed by the convex mode).
    bool include_duals = false;
};

/// Constant atom plus polynomial-phase atoms as described by the options.
NilDictionary standard_dictionary(const DictionaryOptions& opt, Window window);

enum class FitMode { least_squares, convex };

struct FitResult {
    SampledSequence psi;
    std::vector<cplx> coefficients;
    /// The normal equations were rank deficient and a 1e-10 ridge was added.
    bool regularized = false;
    /// sqrt(sum over the window of |alpha - psi|^2).
    double residual = 0;
};

/// Fits alpha on the dictionary window. Least squares over complex
/// coefficients, or nonnegative real coefficients with sum <= 1 over the
/// dual atoms (convex mode).
FitResult fit_nilsequence(const SampledSequence& alpha, const NilDictionary& dict, FitMode mode);

struct DecompositionReport {
    std::vector<cplx> coefficients;
    std::vector<std::string> atoms;
    double cesaro_l1 = 0;
    double cesaro_fluctuation = 0;
    double prime_l1 = 0;
    std::int64_t N = 0;
    std::int64_t W = 1;
    /// Primes <= N dividing W, left out of the prime average.
    std::vector<std::int64_t> excluded_primes;
    std::int64_t primes_used = 0;
    double epsilon_target = 0;
    bool achieved = false;
    bool regularized = false;
};

/// cesaro_l1: ladder estimate of the window averages of |alpha - psi| on
/// [1, N]; prime_l1: average of |alpha(p) - psi(p)| over primes p <= N not
/// dividing exclude_modulus.
DecompositionReport decomposition_report(const SampledSequence& alpha, const SampledSequence& psi,
                                         std::int64_t N, const PrimeTable& table,
                                         double epsilon_target, std::int64_t exclude_modulus = 1,
                                         const CesaroLadder& ladder = {});

/// Builds the dictionary for residue b of modulus W on the given window.
using DictBuilder = std::function<NilDictionary(std::int64_t W, std::int64_t b, Window window)>;

enum class ResidueFill { zero, fit };

/// Per-residue fits psi_{W,b} of n -> alpha(W n + b), glued into psi on
/// [1, N]. Residues not coprime to W get the zero sequence (ResidueFill::zero)
/// or their own fit. alpha must cover [1, W ceil(N / W)].
DecompositionReport wtrick_decompose(const SampledSequence& alpha, std::int64_t W,
                                     const PrimeTable& table, const DictBuilder& dict_builder,
                                     double epsilon_target, std::int64_t N,
                                     FitMode mode = FitMode::least_squares,
                                     ResidueFill fill = ResidueFill::zero,
                                     SampledSequence* psi_out = nullptr);

/// Dictionary builder composing a base dictionary (given on [1, N]) with
/// n -> W n + b.
DictBuilder composed_builder(NilDictionary base);

struct ProductExperiment {
    SampledSequence alpha;
    SampledSequence psi;
    DecompositionReport report;
};

/// alpha(n) = alpha_nil(n) * alpha_mix(n) on [1, N] (the multicorrelation of
/// the product system for product observables), fitted with `dict`.
ProductExperiment product_system_experiment(const CorrelationSpec& nil_part,
                                            const CorrelationSpec& mixing_part,
                                            const NilDictionary& dict, double epsilon_target,
                                            std::int64_t N, const PrimeTable& table);

}  // namespace nilcorr
