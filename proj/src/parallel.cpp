#include "nilcorr/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

namespace nilcorr {

namespace {

std::atomic<unsigned> g_threads{0};

constexpr std::size_t kChunk = 4096;

// Nested parallel regions run inline on the calling worker.
thread_local bool t_in_region = false;

}  // namespace

void set_thread_count(unsigned n) { g_threads.store(n); }

unsigned thread_count() {
    const unsigned n = g_threads.load();
    if (n != 0) return n;
    return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
    const unsigned workers =
        static_cast<unsigned>(std::min<std::size_t>(thread_count(), count));
    if (workers <= 1 || t_in_region) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto run = [&] {
        const bool outer = t_in_region;
        t_in_region = true;
        try {
            for (std::size_t i = next++; i < count; i = next++) body(i);
        } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            next.store(count);
        }
        t_in_region = outer;
    };
    std::vector<std::jthread> pool;
    pool.reserve(workers - 1);
    for (unsigned t = 1; t < workers; ++t) pool.emplace_back(run);
    run();
    pool.clear();
    if (failure) std::rethrow_exception(failure);
}

std::complex<double> parallel_sum(std::size_t count,
                                  const std::function<std::complex<double>(std::size_t)>& term) {
    const std::size_t chunks = (count + kChunk - 1) / kChunk;
    std::vector<CompensatedSum> partial(chunks);
    parallel_for(chunks, [&](std::size_t c) {
        const std::size_t lo = c * kChunk;
        const std::size_t hi = std::min(count, lo + kChunk);
        for (std::size_t i = lo; i < hi; ++i) partial[c].add(term(i));
    });
    CompensatedSum total;
    for (const auto& p : partial) total.merge(p);
    return total.value();
}

}  // namespace nilcorr
