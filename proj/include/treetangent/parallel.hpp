#pragma once

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace treetangent {

// Worker count: TREETANGENT_THREADS caps it, otherwise all cores.
inline unsigned thread_budget() {
    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("TREETANGENT_THREADS")) {
        long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return std::min<unsigned>(hw, static_cast<unsigned>(v));
    }
    return hw;
}

// Runs fn(i) for i in [0, n). Each index must write only its own slots, so
// results are independent of the thread count. The first exception (lowest
// index) is rethrown on the calling thread.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    const unsigned workers = std::min<std::size_t>(thread_budget(), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::pair<std::size_t, std::exception_ptr>> errors(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < n; i += workers) {
                try {
                    fn(i);
                } catch (...) {
                    if (!errors[w].second) errors[w] = {i, std::current_exception()};
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    std::size_t first = n;
    std::exception_ptr eptr;
    for (auto& [idx, e] : errors)
        if (e && idx < first) {
            first = idx;
            eptr = e;
        }
    if (eptr) std::rethrow_exception(eptr);
}

}  // namespace treetangent
