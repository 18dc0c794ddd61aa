#ifndef STOCHMOM_PARALLEL_HPP
#define STOCHMOM_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace stochmom {

inline unsigned default_workers() noexcept
{
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs body(i) for i in [0, n) on up to `workers` threads. Work items must
/// be independent. If several items throw, the one with the lowest index is
/// rethrown, so failures are reported the same way for any schedule.
template <typename Body>
void parallel_for(std::size_t n, unsigned workers, Body&& body)
{
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::size_t error_index = n;
    std::exception_ptr error;

    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
            if (i >= n)
                return;
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

    if (workers == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back(worker);
    }
    if (error)
        std::rethrow_exception(error);
}

}  // namespace stochmom

#endif  // STOCHMOM_PARALLEL_HPP
