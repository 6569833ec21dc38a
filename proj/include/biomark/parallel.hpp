#pragma once

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace biomark {

// Runs fn(i) for i in [0, n) across `threads` workers.  Work items land in
// caller-owned slots indexed by i, so results never depend on scheduling;
// the first exception is rethrown after all workers join.
template <typename F>
void parallel_for(std::size_t n, int threads, F&& fn) {
    if (threads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mu;
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mu);
                if (!error) error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    const int width = int(std::min<std::size_t>(std::size_t(threads), n));
    pool.reserve(width);
    for (int t = 0; t < width; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace biomark
