#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace reviewkit {

/// Calls body(i) for i in [0, n) on up to `workers` threads. The first
/// exception thrown is rethrown once all workers have stopped.
template <typename Body>
void parallel_for(std::size_t n, std::size_t workers, Body&& body) {
    workers = std::min(workers, n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr first;
    std::mutex guard;
    auto work = [&] {
        for (std::size_t i = next++; i < n && !failed; i = next++) {
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(guard);
                if (!first) first = std::current_exception();
                failed = true;
            }
        }
    };
    {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    }
    if (first) std::rethrow_exception(first);
}

} // namespace reviewkit
