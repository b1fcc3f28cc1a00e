#include "nilcorr/znfn.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nilcorr/error.hpp"
#include "nilcorr/parallel.hpp"

namespace nilcorr {

namespace {

void require_finite(std::span<const cplx> values, const char* what) {
    for (const cplx& v : values)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw ValidationError(std::string(what) + " contains a non-finite value");
}

std::string show(Window w) {
    return "[" + std::to_string(w.begin) + ", " + std::to_string(w.end) + ")";
}

}  // namespace

ZnFunction::ZnFunction(std::vector<cplx> values) : values_(std::move(values)) {
    if (values_.empty()) throw ValidationError("ZnFunction needs a positive modulus");
    require_finite(values_, "ZnFunction");
}

ZnFunction ZnFunction::constant(std::size_t modulus, cplx c) {
    return ZnFunction(std::vector<cplx>(modulus, c));
}

ZnFunction ZnFunction::from(std::size_t modulus, const std::function<cplx(std::int64_t)>& f) {
    std::vector<cplx> v(modulus);
    for (std::size_t n = 0; n < modulus; ++n) v[n] = f(static_cast<std::int64_t>(n));
    return ZnFunction(std::move(v));
}

double ZnFunction::sup_norm() const {
    double m = 0;
    for (const cplx& v : values_) m = std::max(m, std::abs(v));
    return m;
}

ZnFunction ZnFunction::conj() const {
    std::vector<cplx> v(values_.size());
    std::transform(values_.begin(), values_.end(), v.begin(), [](cplx z) { return std::conj(z); });
    return ZnFunction(std::move(v));
}

ZnFunction ZnFunction::scaled(cplx c) const {
    std::vector<cplx> v(values_.size());
    std::transform(values_.begin(), values_.end(), v.begin(), [c](cplx z) { return c * z; });
    return ZnFunction(std::move(v));
}

ZnFunction ZnFunction::pointwise_product(const ZnFunction& other) const {
    if (other.modulus() != modulus()) throw ShapeError("modulus mismatch in pointwise product");
    std::vector<cplx> v(values_.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = values_[i] * other.values_[i];
    return ZnFunction(std::move(v));
}

SampledSequence::SampledSequence(std::int64_t start, std::vector<cplx> values)
    : start_(start), values_(std::move(values)) {
    if (values_.empty()) throw ValidationError("SampledSequence must be nonempty");
    require_finite(values_, "SampledSequence");
}

SampledSequence SampledSequence::generate(std::int64_t start, std::size_t length,
                                          const std::function<cplx(std::int64_t)>& f) {
    std::vector<cplx> v(length);
    parallel_for((length + 1023) / 1024, [&](std::size_t c) {
        const std::size_t hi = std::min(length, (c + 1) * 1024);
        for (std::size_t i = c * 1024; i < hi; ++i)
            v[i] = f(start + static_cast<std::int64_t>(i));
    });
    return SampledSequence(start, std::move(v));
}

SampledSequence SampledSequence::constant(std::int64_t start, std::size_t length, cplx c) {
    return SampledSequence(start, std::vector<cplx>(length, c));
}

cplx SampledSequence::at(std::int64_t n) const {
    if (!covers(n))
        throw RangeError("position " + std::to_string(n) + " outside sample " + show(window()));
    return (*this)[n];
}

SampledSequence SampledSequence::slice(Window w) const {
    if (!covers(w) || w.length() <= 0)
        throw RangeError("slice " + show(w) + " outside sample " + show(window()));
    const auto first = values_.begin() + (w.begin - start_);
    return SampledSequence(w.begin, std::vector<cplx>(first, first + w.length()));
}

cplx cesaro_average(const SampledSequence& seq, Window window) {
    if (window.end <= window.begin) throw RangeError("empty window " + show(window));
    if (!seq.covers(window))
        throw RangeError("window " + show(window) + " outside sample " + show(seq.window()));
    CompensatedSum s;
    for (std::int64_t n = window.begin; n < window.end; ++n) s.add(seq[n]);
    return s.value() / static_cast<double>(window.length());
}

namespace {

AverageEstimate summarize(const SampledSequence& seq, std::vector<Window> windows) {
    AverageEstimate est;
    CompensatedSum mean;
    for (const Window& w : windows) {
        const cplx v = cesaro_average(seq, w);
        est.window_values.push_back(v);
        mean.add(v);
    }
    est.value = mean.value() / static_cast<double>(windows.size());
    for (std::size_t i = 0; i < est.window_values.size(); ++i)
        for (std::size_t j = i + 1; j < est.window_values.size(); ++j)
            est.fluctuation =
                std::max(est.fluctuation, std::abs(est.window_values[i] - est.window_values[j]));
    est.windows_tested = std::move(windows);
    return est;
}

void staggered(std::vector<Window>& out, const SampledSequence& seq, std::int64_t len,
               std::size_t count, std::int64_t shift) {
    const std::int64_t first = seq.start() + shift;
    const std::int64_t span = seq.end() - len - first;
    if (span < 0 || (count > 1 && span < static_cast<std::int64_t>(count) - 1))
        throw RangeError("sample of length " + std::to_string(seq.size()) + " cannot host " +
                         std::to_string(count) + " windows of length " + std::to_string(len));
    for (std::size_t i = 0; i < count; ++i) {
        const std::int64_t off =
            count == 1 ? 0 : static_cast<std::int64_t>(i) * span / static_cast<std::int64_t>(count - 1);
        out.push_back({first + off, first + off + len});
    }
}

}  // namespace

AverageEstimate uniform_cesaro_estimate(const SampledSequence& seq, std::int64_t min_len,
                                        std::size_t num_windows) {
    if (min_len < 1 || num_windows < 1) throw RangeError("need min_len >= 1 and num_windows >= 1");
    std::vector<Window> windows;
    staggered(windows, seq, min_len, num_windows, 0);
    return summarize(seq, std::move(windows));
}

AverageEstimate uniform_cesaro_estimate(const SampledSequence& seq, const CesaroLadder& ladder) {
    if (ladder.offsets < 1) throw RangeError("ladder needs at least one offset");
    std::vector<Window> windows;
    for (std::int64_t len : ladder.lengths) {
        if (len < 1) throw RangeError("ladder length must be positive");
        if (len + ladder.shift > static_cast<std::int64_t>(seq.size())) continue;
        staggered(windows, seq, len, ladder.offsets, ladder.shift);
    }
    if (windows.empty())
        throw RangeError("no ladder length fits in a sample of length " + std::to_string(seq.size()));
    return summarize(seq, std::move(windows));
}

double l1_window_distance(const SampledSequence& a, const SampledSequence& b, Window window) {
    if (window.end <= window.begin) throw RangeError("empty window " + show(window));
    if (!a.covers(window) || !b.covers(window))
        throw RangeError("window " + show(window) + " not covered by both sequences");
    CompensatedSum s;
    for (std::int64_t n = window.begin; n < window.end; ++n) s.add(std::abs(a[n] - b[n]));
    return s.real() / static_cast<double>(window.length());
}

SampledSequence abs_difference(const SampledSequence& a, const SampledSequence& b) {
    const Window w{std::max(a.start(), b.start()), std::min(a.end(), b.end())};
    if (w.length() <= 0) throw RangeError("sequences do not overlap");
    std::vector<cplx> v(static_cast<std::size_t>(w.length()));
    for (std::int64_t n = w.begin; n < w.end; ++n)
        v[static_cast<std::size_t>(n - w.begin)] = std::abs(a[n] - b[n]);
    return SampledSequence(w.begin, std::move(v));
}

}  // namespace nilcorr
