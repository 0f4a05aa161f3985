#pragma once

#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace eigenpattern {

// Thread cap: EIGENPATTERN_THREADS env var, else hardware concurrency.
inline unsigned max_threads() {
    if (const char* env = std::getenv("EIGENPATTERN_THREADS")) {
        long n = std::strtol(env, nullptr, 10);
        if (n >= 1) return static_cast<unsigned>(n);
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

// Deterministic parallel loop: the index space is split into contiguous
// chunks, each worker writes only to its own indices. Falls back to a plain
// loop when a single thread is available.
inline void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
    unsigned workers = max_threads();
    if (workers <= 1 || count < 2) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    if (workers > count) workers = static_cast<unsigned>(count);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    std::size_t chunk = (count + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        std::size_t begin = w * chunk;
        std::size_t end = std::min(begin + chunk, count);
        if (begin >= end) break;
        pool.emplace_back([&body, begin, end] {
            for (std::size_t i = begin; i < end; ++i) body(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace eigenpattern
