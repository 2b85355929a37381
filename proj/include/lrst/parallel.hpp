#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace lrst {

/// Worker count from LRST_THREADS (0 or unset = hardware concurrency).
std::size_t worker_count();

/// Runs body(i) for i in [0, n). Work is handed out dynamically, so callers
/// must write results into per-index slots and reduce in index order.
/// The exception from the lowest failing index is rethrown.
template <class Body>
void parallel_for(std::size_t n, Body&& body, std::size_t workers = 0) {
    if (workers == 0) workers = worker_count();
    if (workers > n) workers = n;
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr error;
    std::size_t error_index = n;

    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
            if (i >= n) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (i < error_index) {
                    error_index = i;
                    error = std::current_exception();
                }
            }
        }
    };
    std::vector<std::jthread> pool;
    pool.reserve(workers - 1);
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
    pool.clear();
    if (error) std::rethrow_exception(error);
}

}  // namespace lrst
