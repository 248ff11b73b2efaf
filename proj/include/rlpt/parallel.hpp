#pragma once

#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace rlpt {

// Runs fn(0..n-1) on up to `workers` threads. Callers make runs
// order-deterministic by writing results into per-index slots; which thread
// handles which index must never matter.
inline void parallel_for(std::size_t n, unsigned workers,
                         const std::function<void(std::size_t)>& fn) {
    if (n == 0) return;
    if (workers <= 1 || n == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const unsigned count = static_cast<unsigned>(std::min<std::size_t>(workers, n));
    std::vector<std::thread> threads;
    threads.reserve(count);
    for (unsigned t = 0; t < count; ++t) {
        threads.emplace_back([&, t] {
            for (std::size_t i = t; i < n; i += count) fn(i);
        });
    }
    for (auto& th : threads) th.join();
}

}  // namespace rlpt
