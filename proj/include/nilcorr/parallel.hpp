#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <vector>

namespace nilcorr {

/// Number of worker threads used by parallel loops. Defaults to the
/// hardware concurrency; 0 restores the default.
void set_thread_count(unsigned n);
unsigned thread_count();

/// Runs body(i) for i in [0, count). The partition into work items never
/// depends on the thread count, so any reduction written on top of it is
/// reproducible bit-for-bit.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

/// Neumaier-compensated accumulator for real or complex sums.
class CompensatedSum {
public:
    void add(double x) { add_part(re_, re_c_, x); }
    void add(std::complex<double> z) {
        add_part(re_, re_c_, z.real());
        add_part(im_, im_c_, z.imag());
    }
    void merge(const CompensatedSum& o) {
        add(o.value());
    }
    std::complex<double> value() const { return {re_ + re_c_, im_ + im_c_}; }
    double real() const { return re_ + re_c_; }

private:
    static void add_part(double& s, double& c, double x) {
        const double t = s + x;
        if (std::abs(s) >= std::abs(x))
            c += (s - t) + x;
        else
            c += (x - t) + s;
        s = t;
    }
    double re_ = 0, re_c_ = 0, im_ = 0, im_c_ = 0;
};

/// Deterministic compensated sum of term(i) over [0, count), computed in
/// fixed-size chunks that run in parallel and are merged in index order.
std::complex<double> parallel_sum(std::size_t count,
                                  const std::function<std::complex<double>(std::size_t)>& term);

}  // namespace nilcorr
