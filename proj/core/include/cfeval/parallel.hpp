#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace cfeval {

/// Runs fn(k) for k in [0, n) on up to `threads` workers. Each index is
/// visited exactly once; callers write into preallocated slots so the
/// result never depends on scheduling. The first exception thrown by any
/// task is rethrown on the calling thread after all workers stop.
template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn &&fn) {
    const unsigned workers =
        static_cast<unsigned>(std::min<std::size_t>(std::max(1U, threads), n));
    if (workers <= 1) {
        for (std::size_t k = 0; k < n; ++k) fn(k);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;

    auto work = [&] {
        for (std::size_t k = next++; k < n && !failed; k = next++) {
            try {
                fn(k);
            } catch (...) {
                std::lock_guard lock{error_mutex};
                if (!error) error = std::current_exception();
                failed = true;
            }
        }
    };

    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    }
    if (error) std::rethrow_exception(error);
}

} // namespace cfeval
