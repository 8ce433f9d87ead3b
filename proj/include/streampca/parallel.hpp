#pragma once

#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace streampca {

inline unsigned default_workers() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

// Runs fn(0..n-1) on a small work pool. Each index is handed out once; the
// caller's fn must only touch per-index state. The first exception wins and
// is rethrown after all workers join.
inline void parallel_for(long n, const std::function<void(long)>& fn, unsigned workers = 0) {
    if (n <= 0) return;
    if (workers == 0) workers = default_workers();
    if (workers > static_cast<unsigned>(n)) workers = static_cast<unsigned>(n);

    if (workers <= 1) {
        for (long i = 0; i < n; ++i) fn(i);
        return;
    }

    std::atomic<long> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;

    auto body = [&] {
        while (!failed.load(std::memory_order_relaxed)) {
            const long i = next.fetch_add(1, std::memory_order_relaxed);
            if (i >= n) break;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                failed.store(true, std::memory_order_relaxed);
            }
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(body);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

} // namespace streampca
