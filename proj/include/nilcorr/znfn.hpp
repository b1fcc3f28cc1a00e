#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "nilcorr/phase.hpp"

namespace nilcorr {

/// Half-open integer window [begin, end).
struct Window {
    std::int64_t begin = 0;
    std::int64_t end = 0;

    std::int64_t length() const { return end - begin; }
    bool operator==(const Window&) const = default;
};

/// A complex-valued function on Z_N, N = modulus().
class ZnFunction {
public:
    explicit ZnFunction(std::vector<cplx> values);

    static ZnFunction constant(std::size_t modulus, cplx c);
    static ZnFunction from(std::size_t modulus, const std::function<cplx(std::int64_t)>& f);

    std::size_t modulus() const { return values_.size(); }

    /// Value at the residue class of n (any integer).
    cplx operator()(std::int64_t n) const {
        const auto m = static_cast<std::int64_t>(values_.size());
        std::int64_t r = n % m;
        if (r < 0) r += m;
        return values_[static_cast<std::size_t>(r)];
    }

    std::span<const cplx> values() const { return values_; }
    double sup_norm() const;

    ZnFunction conj() const;
    ZnFunction scaled(cplx c) const;
    ZnFunction pointwise_product(const ZnFunction& other) const;

private:
    std::vector<cplx> values_;
};

/// Finite sample of a complex sequence on positions [start, start + size).
class SampledSequence {
public:
    SampledSequence(std::int64_t start, std::vector<cplx> values);

    static SampledSequence generate(std::int64_t start, std::size_t length,
                                    const std::function<cplx(std::int64_t)>& f);
    static SampledSequence constant(std::int64_t start, std::size_t length, cplx c);

    std::int64_t start() const { return start_; }
    std::int64_t end() const { return start_ + static_cast<std::int64_t>(values_.size()); }
    std::size_t size() const { return values_.size(); }
    Window window() const { return {start_, end()}; }

    bool covers(Window w) const { return w.begin >= start_ && w.end <= end() && w.begin <= w.end; }
    bool covers(std::int64_t n) const { return n >= start_ && n < end(); }

    /// Checked access; throws RangeError outside the sample.
    cplx at(std::int64_t n) const;
    /// Unchecked access by absolute position.
    cplx operator[](std::int64_t n) const { return values_[static_cast<std::size_t>(n - start_)]; }

    std::span<const cplx> values() const { return values_; }

    /// Restriction to a sub-window (RangeError if not covered).
    SampledSequence slice(Window w) const;

    bool operator==(const SampledSequence&) const = default;

private:
    std::int64_t start_;
    std::vector<cplx> values_;
};

/// Estimate of a uniform Cesaro limit from a family of windows.
struct AverageEstimate {
    cplx value;
    /// Largest pairwise distance between window averages.
    double fluctuation = 0;
    std::vector<Window> windows_tested;
    std::vector<cplx> window_values;
};

/// Window ladder for uniform Cesaro estimates: every length in `lengths`
/// is tried at `offsets` staggered positions. Lengths that do not fit in
/// the sample are skipped.
struct CesaroLadder {
    std::vector<std::int64_t> lengths{1 << 10, 1 << 12, 1 << 14};
    std::size_t offsets = 4;
    /// Added to every window offset.
    std::int64_t shift = 0;
};

/// (1/(N-M)) sum_{n=M}^{N-1} seq(n).
cplx cesaro_average(const SampledSequence& seq, Window window);

/// num_windows windows of length min_len, evenly staggered over the sample.
AverageEstimate uniform_cesaro_estimate(const SampledSequence& seq, std::int64_t min_len,
                                        std::size_t num_windows);

AverageEstimate uniform_cesaro_estimate(const SampledSequence& seq, const CesaroLadder& ladder);

/// E_{n in window} |a(n) - b(n)|.
double l1_window_distance(const SampledSequence& a, const SampledSequence& b, Window window);

/// Pointwise |a(n) - b(n)| on the common window.
SampledSequence abs_difference(const SampledSequence& a, const SampledSequence& b);

}  // namespace nilcorr
