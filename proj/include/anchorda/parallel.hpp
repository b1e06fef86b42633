#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace anchorda {

// Process-wide cap on worker threads (0 = hardware concurrency).
void set_max_threads(unsigned threads);
unsigned max_threads();

// Runs fn(i) for i in [0, n). Work is split into contiguous chunks; callers
// write results into per-index slots so the outcome never depends on the
// number of threads.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    const std::size_t workers = std::min<std::size_t>(max_threads(), n);
    if (workers <= 1 || n < 64) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const std::size_t chunk = (n + workers - 1) / workers;
    std::vector<std::exception_ptr> errors(workers);
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            const std::size_t begin = w * chunk;
            const std::size_t end = std::min(n, begin + chunk);
            if (begin >= end) break;
            pool.emplace_back([&fn, &errors, w, begin, end] {
                try {
                    for (std::size_t i = begin; i < end; ++i) fn(i);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
    }
    // Rethrow the failure from the lowest index range, as a serial loop would.
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace anchorda
