#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace smfr::detail {

/// Runs fn(i) for i in [0, n) on up to `threads` workers (0 = hardware
/// concurrency). Tasks are claimed from a shared counter; callers must write
/// results into preallocated per-index slots so the outcome is independent of
/// scheduling. The first exception is rethrown after all workers join.
inline void parallel_for_index(std::size_t n, int threads,
                               const std::function<void(std::size_t)>& fn) {
    if (n == 0) return;
    std::size_t workers = threads > 0 ? static_cast<std::size_t>(threads)
                                      : std::thread::hardware_concurrency();
    if (workers == 0) workers = 1;
    workers = std::min(workers, n);

    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace smfr::detail
